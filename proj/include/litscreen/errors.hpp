#pragma once

#include <stdexcept>
#include <string>

namespace litscreen {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable files, malformed input rows.
class IoError : public Error {
public:
    using Error::Error;
};

/// Bad configuration values or config files.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot support the requested operation
/// (single-class training data, folds without a class, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// A model or artifact was built against different preprocessing inputs.
class ProvenanceError : public Error {
public:
    using Error::Error;
};

}  // namespace litscreen
