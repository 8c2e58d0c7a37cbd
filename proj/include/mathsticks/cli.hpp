#ifndef MATHSTICKS_CLI_HPP
#define MATHSTICKS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mathsticks {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Failures print a
/// one-line JSON error record on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mathsticks

#endif  // MATHSTICKS_CLI_HPP
