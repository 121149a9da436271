#pragma once

#include <stdexcept>
#include <string>

namespace occkit {

/// Broad failure classes. The CLI maps these onto exit codes and the
/// `error[<category>]` prefix it prints.
enum class ErrorCategory { kConfig, kParse, kIo, kValidation };

inline const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::kConfig: return "config";
        case ErrorCategory::kParse: return "parse";
        case ErrorCategory::kIo: return "io";
        case ErrorCategory::kValidation: return "validation";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::kConfig, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorCategory::kParse, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorCategory::kValidation, what) {}
};

}  // namespace occkit
