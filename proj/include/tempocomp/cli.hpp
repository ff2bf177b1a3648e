#pragma once

#include <string>
#include <vector>

namespace tempocomp {

// Parses and runs one command line, program name excluded. Returns the
// process exit code: 0 success, 1 usage error, 2 malformed data or
// configuration, 3 numeric or calibration failure.
int cli_dispatch(std::vector<std::string> args);

}  // namespace tempocomp
