#pragma once

#include <string>
#include <vector>

namespace crqkit::cli {

// Entry point behind the crq executable. Exit codes: 0 success, 1 usage or
// validation error, 2 solver/inference failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace crqkit::cli
