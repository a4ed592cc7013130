#pragma once

#include <stdexcept>
#include <string>

namespace afrl {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A scalar argument lies outside the operation's domain (e.g. focal power outside [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Tensor or image dimensions do not match what the operation expects.
class ShapeError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// Operations invoked in the wrong order (e.g. backward before forward).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values, or an incompatible combination of inputs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss or parameter.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Base for on-disk format problems (scan directories, checkpoints, CSV).
class FormatError : public Error {
public:
    using Error::Error;
};

class MissingManifestError : public FormatError {
public:
    using FormatError::FormatError;
};

class FrameCountError : public FormatError {
public:
    using FormatError::FormatError;
};

class ChecksumError : public FormatError {
public:
    using FormatError::FormatError;
};

class FormatVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class CorruptHeaderError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
public:
    using FormatError::FormatError;
};

class ArchitectureMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace afrl
