#pragma once

#include <stdexcept>
#include <string>

namespace namelink {

/// Base class of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed input text (bad JSON line, wrong CSV arity, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but violates a dataset invariant.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or infeasible request.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A model and its input disagree on schema or dimension.
class CompatibilityError : public Error {
public:
    using Error::Error;
};

/// A non-finite value appeared where the math guarantees a finite one.
class NumericFault : public Error {
public:
    using Error::Error;
};

} // namespace namelink
