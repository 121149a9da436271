#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace occkit::cli {

/// Environment variable naming a default config file.
inline constexpr const char* kConfigEnv = "OCCKIT_CONFIG";

/// Exit codes: 0 success, 1 parse/io/validation failure, 2 usage or
/// config error.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace occkit::cli
