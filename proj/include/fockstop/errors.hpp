#pragma once

#include <stdexcept>
#include <string>

namespace fockstop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested model would exceed the configured dimension cap.
class ModelTooLarge : public Error {
public:
    using Error::Error;
};

/// A shift or convolution would push support past the last bin.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// Operands live on different spaces or have inconsistent sizes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A vector handed to a partially defined map lies outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An operator family failed to factorize across a bin cut.
class AdaptednessError : public Error {
public:
    using Error::Error;
};

/// A stop time, cocycle or projection violates a named invariant.
class ValidationError : public Error {
public:
    ValidationError(std::string invariant, const std::string& detail)
        : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// Bad configuration file or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fockstop
