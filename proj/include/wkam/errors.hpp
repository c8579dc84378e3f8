#pragma once

#include <stdexcept>
#include <string>

namespace wkam {

/// Base class for every error raised by the toolkit.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or numeric guard violation (dt too large, bad radius, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Grid functions defined on different grids were combined.
struct GridMismatch : Error {
    using Error::Error;
};

/// An operation requiring finite data met a +/-INF sentinel.
struct SentinelValue : Error {
    using Error::Error;
};

/// Scalar fixed-point iteration hit its cap without meeting the tolerance.
struct NonContraction : Error {
    using Error::Error;
};

/// Every candidate of a nodal min/max was a sentinel.
struct AllUnreachable : Error {
    using Error::Error;
};

/// Operation requires the other monotonicity in u.
struct SignMismatch : Error {
    using Error::Error;
};

/// Long-time iteration did not settle within its time budget.
struct NoConvergence : Error {
    using Error::Error;
};

struct EmptyMask : Error {
    using Error::Error;
};

/// A phase-space lift was requested at a node where the function is not differentiable.
struct KinkNode : Error {
    using Error::Error;
};

/// ODE state left the admissible box |u|, |p| <= 1e8.
struct Blowup : Error {
    using Error::Error;
};

}  // namespace wkam
