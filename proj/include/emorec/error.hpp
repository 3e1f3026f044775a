#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emorec {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller passed arguments that violate an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data. Carries the offending file and
/// 1-based line (0 when the problem is not tied to a line).
class DataError : public Error {
public:
    DataError(std::string file, std::size_t line, const std::string& message)
        : Error(format(file, line, message)), file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& file, std::size_t line, const std::string& message) {
        std::string out = file;
        if (line > 0) out += ":" + std::to_string(line);
        return out + ": " + message;
    }

    std::string file_;
    std::size_t line_;
};

}  // namespace emorec
