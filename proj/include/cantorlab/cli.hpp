#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cantorlab/error.hpp"
#include "json.hpp"

namespace cantorlab::cli {

enum class ParamType { Int, Real, String, Bool, RealList, Set };

struct ParamSpec {
  std::string key;
  ParamType type;
  nlohmann::json fallback;  ///< null: optional with no default
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
};

/// Every experiment command with its parameters; each also accepts the common
/// parameters (budget, seed where listed, output paths).
const std::vector<CommandSpec>& command_specs();
/// Throws ConfigInvalid for an unknown command.
const CommandSpec& command_spec(const std::string& name);

/// Parses a flag value written on the command line into the parameter's type.
nlohmann::json parse_flag_value(const ParamSpec& spec, const std::string& text);

/// Defaults, then the config object, then flags; unknown keys and wrong
/// types throw ConfigInvalid.
nlohmann::json resolve_params(const CommandSpec& spec, const nlohmann::json& config, const nlohmann::json& flags);

struct RunContext {
  unsigned jobs = 1;
  /// Global budget override (CANTORLAB_BUDGET); a "budget" parameter wins over it.
  std::optional<std::size_t> budget;
};

/// Runs one command on resolved parameters and returns the result record
/// {schema, command, inputs, inputs_digest, outputs, artifacts, runtime_seconds}.
nlohmann::json run_command(const std::string& command, const nlohmann::json& params, const RunContext& context);

/// Reads a config file; IOError names the path, ConfigInvalid on parse errors.
nlohmann::json load_config(const std::filesystem::path& path);

/// 0 success, 2 budget exhaustion, 3 validation or input errors.
int exit_code(ErrorKind kind) noexcept;

std::uint64_t fnv1a64(std::string_view bytes);
/// Digest of the canonical (key-sorted, compact) parameter dump.
std::string inputs_digest(const nlohmann::json& params);

nlohmann::json catalog();

/// Reads CANTORLAB_BUDGET; ConfigInvalid when it is not a positive integer.
std::optional<std::size_t> budget_from_env();

/// Full command-line entry point; returns the process exit code.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cantorlab::cli
