#ifndef SLR_TOOLS_CLI_H_
#define SLR_TOOLS_CLI_H_

#include <iosfwd>

namespace slr {

// Entry point of the `slr` tool. Returns the process exit code:
// 0 success, 1 other failure, 2 config error, 3 numeric abort.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace slr

#endif  // SLR_TOOLS_CLI_H_
