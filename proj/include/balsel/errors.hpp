#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace balsel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes do not agree or an input is empty.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A matrix is singular to working precision, or a point hits a pole.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Input is outside the domain of the operation (e.g. an unstable model).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative routine failed to converge or a solve is ill-posed.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Requested rank exceeds the numerical rank of the data.
class RankError : public Error {
public:
    RankError(const std::string& what, std::size_t max_admissible)
        : Error(what), max_admissible_(max_admissible) {}

    /// Largest rank that would have been accepted.
    std::size_t max_admissible() const noexcept { return max_admissible_; }

private:
    std::size_t max_admissible_;
};

/// Exclusion constraints leave too few candidates.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

/// Riccati / LQG synthesis failed.
class SynthesisError : public Error {
public:
    using Error::Error;
};

/// Text input could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A configured resource cap would be exceeded.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Empirical snapshots have not decayed over the sampled horizon.
class HorizonError : public Error {
public:
    using Error::Error;
};

}  // namespace balsel
