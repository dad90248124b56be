#include "context.hpp"

#include <fstream>

#include "terragan/core/digest.hpp"
#include "terragan/core/errors.hpp"
#include "terragan/gan/checkpoint.hpp"

namespace terragan::cli::detail {

namespace fs = std::filesystem;
using nlohmann::json;

RunContext::RunContext(std::string command, json config, std::ostream& log)
    : command_(std::move(command)), config_(std::move(config)), log_(log), out_dir_(config_.at("out").get<std::string>()) {
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir_.string() + ": " + ec.message());
}

std::string RunContext::out_path(const std::string& relative) const {
  const auto path = out_dir_ / relative;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  return path.string();
}

void RunContext::add_input(const std::string& path) { inputs_.push_back(path); }
void RunContext::add_output(const std::string& path) { outputs_.push_back(path); }

double RunContext::seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex_digest();
}

void RunContext::write_report(int exit_code, double total_seconds) {
  auto files = [](const std::vector<std::string>& paths) {
    json list = json::array();
    for (const auto& p : paths) {
      std::error_code ec;
      const auto size = fs::file_size(p, ec);
      list.push_back({{"path", p}, {"sha256", file_sha256(p)}, {"bytes", ec ? 0 : size}});
    }
    return list;
  };
  timings_["total_seconds"] = total_seconds;
  const json report = {{"command", command_},
                       {"exit_code", exit_code},
                       {"config", config_},
                       {"config_digest", gan::config_digest(config_)},
                       {"inputs", files(inputs_)},
                       {"outputs", files(outputs_)},
                       {"timings", timings_},
                       {"summary", summary_}};
  const auto write = [&](const std::string& name, const json& doc) {
    std::ofstream out(out_path(name));
    if (!out) throw IoError("cannot write " + out_path(name));
    out << doc.dump(2) << "\n";
  };
  write("config.json", config_);
  write("report.json", report);
  log_ << "report: " << out_path("report.json") << "\n";
}

}  // namespace terragan::cli::detail
