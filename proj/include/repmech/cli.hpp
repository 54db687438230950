#pragma once
/* Scenario configuration files and the command implementations behind the
 * `repmech` executable.
 *
 * Text format, one setting per line, '#' starts a comment:
 *
 *   [environment]
 *   scheme = absolute            # or relative
 *   system_std = 0.1
 *   system_bias = 0
 *   cross_std = 0.1              # default for agents
 *   cross_bias = 0
 *   clamp_observations = false
 *
 *   [agents]
 *   agent = truth quality=0.5
 *   agent = image quality=0.3 g=linear count=2
 *   agent = mixed quality=0.4 lambda=0.5 g=power:0.5 f=1 self=offset:0.1 cross=affine:1:0.05
 *
 *   [mechanism]
 *   type = extended_as
 *   ring = 0,2,1
 *   layers = 2
 *
 *   [simulation]
 *   trials = 100000
 *   seed = 7
 *   strategy = custom            # play the per-agent self=/cross= rules
 *
 * The JSON mirror uses the same section names, with "agents" an array of
 * objects whose keys are the agent tokens ("type", "quality", ...).
 */

#include "repmech/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace repmech::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3, kEquilibriumViolation = 4 };

struct Config {
    ScenarioConfig scenario;
    std::size_t grid = 201;           // best-response grid for check-equilibrium
    double shift_range = 0.5;         // cross-report shift grid half-width
    std::optional<SweepParameter> sweep_parameter;
    std::vector<double> sweep_grid;
};

/// Parses a config from text; JSON when the first non-blank character is '{'.
/// `origin` prefixes error locations. Throws Error{ConfigInvalid} with a
/// "origin:line: message" (or "origin:/json/pointer: message") text.
Config parse_config(const std::string& text, const std::string& origin);

Config load_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration, used for digests.
std::string canonical_config(const Config& config);

/// FNV-1a 64-bit hex digest.
std::string fnv1a_hex(const std::string& bytes);

/// Locale-independent, 12 significant digits.
std::string format_number(double value);

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace repmech::cli
