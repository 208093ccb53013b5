#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes, sizes or indices that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Arguments outside the documented domain (p <= 1, negative tolerances, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Unreadable or unwritable files.
class IoError : public Error {
public:
    using Error::Error;
};

/// Readable files whose content is not a valid tensor/matrix/config.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A Tucker representation is not minimal where minimality is required.
class NotMinimal : public Error {
public:
    using Error::Error;
};

/// Some core matricization is (numerically) rank deficient.
class SingularCore : public Error {
public:
    using Error::Error;
};

/// The point is outside the chart domain: span(w.factor) and the base
/// complement do not form a direct sum.
class CommonComplementViolation : public Error {
public:
    using Error::Error;
};

/// A dense tensor that was expected to lie in the tangent space does not.
class NotInTangentSpace : public Error {
public:
    using Error::Error;
};

/// The reduced trajectory left the fixed-rank manifold.
class RankDegeneracy : public Error {
public:
    RankDegeneracy(std::size_t step, const std::string& what)
        : Error("rank degeneracy at step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Integration produced NaN or Inf.
class NonFiniteState : public Error {
public:
    NonFiniteState(std::size_t step, const std::string& what)
        : Error("non-finite state at step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace tdf
