#pragma once

#include <stdexcept>
#include <string>

namespace fimex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Requested node count is outside the supported range.
class UnsupportedOrder : public Error {
public:
    using Error::Error;
};

/// Interpolation nodes are not pairwise distinct.
class DegenerateInterpolation : public Error {
public:
    using Error::Error;
};

/// Newton iteration failed to reach the tolerance or blew up.
class NewtonDivergence : public Error {
public:
    using Error::Error;
};

/// The (block) Jacobian or resolvent was numerically singular.
class LinearSolveFailure : public Error {
public:
    using Error::Error;
};

/// (I - w B) is singular at the requested Dahlquist point.
class PoleError : public Error {
public:
    using Error::Error;
};

class EigenSolverFailure : public Error {
public:
    using Error::Error;
};

}  // namespace fimex
