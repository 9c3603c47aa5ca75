#ifndef LV_CLI_HPP_
#define LV_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace lv {

// Runs the lv command-line tool in-process. `args` excludes the program name
// (argv[1..]). Returns the process exit code:
//   0  success (including --help)
//   1  computation/data error (bad corpus, missing file, oracle mismatch, ...)
//   2  usage error (unknown flags, missing required options, bad values)
// All command output goes to `out` (or the --out file), messages to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace lv

#endif  // LV_CLI_HPP_
