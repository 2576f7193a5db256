#pragma once

#include <stdexcept>
#include <string>

namespace ff {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files (CSV, schema, model files).
class ParseError : public Error {
public:
    using Error::Error;
};

// Bad configuration: unknown stages, invalid flag combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Domain violations at runtime: single-class labels, empty clusters, NA
// where none is allowed, and similar.
class ValueError : public Error {
public:
    using Error::Error;
};

}  // namespace ff
