#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xling {

/// Broad failure classes. The CLI maps each onto a process exit code.
enum class ErrorClass {
    config,     ///< usage or configuration problem
    data,       ///< malformed or unreadable input
    numerical,  ///< degenerate input or a numerical precondition failed
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
    ErrorClass error_class() const noexcept { return class_; }

private:
    ErrorClass class_;
};

// Data errors.
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorClass::data, w) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(ErrorClass::data, w) {}
    FormatError(const std::string& w, std::size_t line)
        : Error(ErrorClass::data, "line " + std::to_string(line) + ": " + w), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorClass::data, w) {}
};

// Numerical errors.
struct DegenerateInputError : Error {
    explicit DegenerateInputError(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

struct AlignmentError : Error {
    explicit AlignmentError(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

struct ConstructionError : Error {
    explicit ConstructionError(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

struct TrainingError : Error {
    explicit TrainingError(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

// Config errors.
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorClass::config, w) {}
};

struct InputError : Error {
    explicit InputError(const std::string& w) : Error(ErrorClass::config, w) {}
};

}  // namespace xling
