#pragma once

#include <chrono>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace terragan::cli::detail {

/// Resolved configuration plus the bookkeeping that ends up in report.json.
class RunContext {
 public:
  RunContext(std::string command, nlohmann::json config, std::ostream& log);

  const std::string& command() const { return command_; }
  const nlohmann::json& config() const { return config_; }
  std::ostream& log() { return log_; }

  template <typename T>
  T get(const std::string& key) const {
    return config_.at(key).get<T>();
  }
  std::uint64_t seed() const { return config_.at("seed").get<std::uint64_t>(); }

  /// Path inside the output directory; parent directories are created.
  std::string out_path(const std::string& relative) const;
  void add_input(const std::string& path);
  void add_output(const std::string& path);

  nlohmann::json& summary() { return summary_; }

  template <typename F>
  auto timed(const std::string& phase, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      RunContext& ctx;
      const std::string& phase;
      std::chrono::steady_clock::time_point start;
      ~Record() { ctx.timings_[phase] = seconds_since(start); }
    } record{*this, phase, start};
    return body();
  }

  /// Writes report.json and config.json into the output directory.
  void write_report(int exit_code, double total_seconds);

  static double seconds_since(std::chrono::steady_clock::time_point start);

 private:
  std::string command_;
  nlohmann::json config_;
  std::ostream& log_;
  std::filesystem::path out_dir_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  nlohmann::json summary_ = nlohmann::json::object();
  nlohmann::json timings_ = nlohmann::json::object();
};

using CommandFn = int (*)(RunContext&);

/// Null for unknown names.
CommandFn find_command(const std::string& name);

std::string file_sha256(const std::string& path);

}  // namespace terragan::cli::detail
