#pragma once

// Command-line front end. Every subcommand serializes exactly one library
// result; the logic lives here (not in main) so tests can drive it directly.

#include <iosfwd>
#include <string>
#include <vector>

namespace sqapprox::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,      ///< malformed flags or invalid values
  kResonance = 3,  ///< wave-solve hit a (near-)resonant mode
  kWarning = 4,    ///< an estimator warning under --strict
};

inline constexpr int kSchemaVersion = 1;

/// Runs the tool with `args` (without the program name). The report goes to
/// `out` unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 17 significant digits, enough to round-trip any double.
[[nodiscard]] std::string format_double(double v);

}  // namespace sqapprox::cli
