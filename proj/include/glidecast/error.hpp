// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace glidecast {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// Speed fell to or below the minimum where the path-angle rate is defined.
class SingularSpeedError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class InvalidWindowError : public Error {
public:
    using Error::Error;
};

class InvalidRateError : public Error {
public:
    using Error::Error;
};

/// An operation was called out of order (e.g. backward without forward).
class StateError : public Error {
public:
    using Error::Error;
};

/// Configuration could not be parsed or failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Model-file loading failures.
class LoadError : public Error {
public:
    using Error::Error;
};

class MissingFileError : public LoadError {
public:
    using LoadError::LoadError;
};

class VersionMismatchError : public LoadError {
public:
    using LoadError::LoadError;
};

class TruncatedFileError : public LoadError {
public:
    using LoadError::LoadError;
};

} // namespace glidecast
