#ifndef VRUCP_CLI_HPP_
#define VRUCP_CLI_HPP_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "vrucp/simulator.hpp"

namespace vrucp::cli {

enum class Source { kDefault, kFile, kFlag };

std::string_view to_string(Source source);

/// Resolved settings plus where each one came from. Keys are flat
/// ("e", "rate", "shape_bits.circle_full", ..., "out_dir").
struct CliConfig {
  sim::SimConfig sim;
  std::string out_dir = ".";
  std::optional<std::string> config_file;
  nlohmann::json values = nlohmann::json::object();
  std::map<std::string, Source> sources;
};

/// Defaults only.
CliConfig default_config();

/// Overlays `patch` (nested or flat keys) onto `config` and rebuilds
/// `config.sim`. Unknown keys and badly typed values are a ConfigError.
void apply(CliConfig& config, const nlohmann::json& patch, Source source);

/// {key: {"value": ..., "source": "default|file|flag"}, ...}
nlohmann::json provenance_json(const CliConfig& config);

/// Entry point of the `vrucp` tool. Returns the process exit code:
/// 0 success, 1 internal error, 2 user or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vrucp::cli

#endif  // VRUCP_CLI_HPP_
