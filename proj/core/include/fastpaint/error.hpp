#pragma once

#include <stdexcept>

namespace fastpaint {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arrays whose dimensions disagree (frames, canvases, adjoints).
class ShapeError : public Error {
public:
    using Error::Error;
};

// Out-of-range arguments or invalid configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed or incompatible file content (schema version, arity, syntax).
class FormatError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class UnsupportedModeError : public Error {
public:
    using Error::Error;
};

}  // namespace fastpaint
