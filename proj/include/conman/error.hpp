#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace conman {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// context store
class TimeRegression : public Error { using Error::Error; };
class InvalidTuple : public Error { using Error::Error; };
class InvalidInterval : public Error { using Error::Error; };
class UnknownHost : public Error { using Error::Error; };

// document parsing
class SyntaxError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class ReferenceError : public Error { using Error::Error; };
class OrderError : public Error { using Error::Error; };

/// Aggregated validation failures; each entry is a human-readable violation.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

// cost engine
class MissingContext : public Error { using Error::Error; };
class MissingReading : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };

// channel manager
class ShapeMismatch : public Error { using Error::Error; };
class UnknownTechPair : public Error { using Error::Error; };
class IllegalTransition : public Error { using Error::Error; };

}  // namespace conman
