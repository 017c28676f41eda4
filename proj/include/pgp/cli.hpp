#ifndef PGP_CLI_HPP
#define PGP_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace pgp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pgp

#endif  // PGP_CLI_HPP
