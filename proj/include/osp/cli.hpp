#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace osp {

/// Runs one command line; `args` excludes the program name. Returns the
/// process exit status; diagnostics go to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace osp
