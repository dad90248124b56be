#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace terragan::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad flags, bad config
  kExitData = 2,      // unreadable, malformed or corrupt inputs
  kExitContract = 3,  // training contract violation, failed verification
};

/// Subcommand names in help order.
const std::vector<std::string>& subcommands();

/// Flat default configuration of a subcommand; every key is also a
/// `--key-with-dashes` override flag. Throws ConfigError for unknown names.
nlohmann::json default_config(std::string_view subcommand);

/// Overlays `overrides` onto `base`, rejecting keys `base` lacks and values
/// whose JSON type differs from the default's.
nlohmann::json merge_strict(const nlohmann::json& base, const nlohmann::json& overrides, const std::string& source);

/// Runs one invocation. `args` excludes the program name. Progress lines go
/// to `out`; failures go to `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace terragan::cli
