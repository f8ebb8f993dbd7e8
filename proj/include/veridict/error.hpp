#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace veridict {

// Base for all library errors. Subclasses map onto process exit codes
// (config/argument -> 1, io/format -> 2) and C API error codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration: bad alpha, single-class corpus, class-set mismatch...
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Bad call argument: out-of-range edit position, rejected attack input.
class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// Unreadable/unwritable files.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed file contents; carries the byte offset or line of the defect.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::size_t offset)
        : Error(msg + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
    explicit FormatError(const std::string& msg) : Error(msg), offset_(0) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace veridict
