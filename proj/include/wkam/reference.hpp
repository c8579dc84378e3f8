#pragma once

/// Reference problem H = u + 1/2 |p|^2 on the circle. Its backward weak KAM solution is 0; both 0
/// and u1(x) = -d(x, Z)^2 / 2 are forward solutions, and u1 meets 0 only at x = 0.

#include <wkam/grid.hpp>
#include <wkam/model.hpp>

#include <algorithm>

namespace wkam {

inline ContactModel example_model() { return ContactModel{1, 1.0, Monotonicity::increasing, {}}; }

inline double u1_profile(double x) {
    const double w = wrap({x, 0.0})[0];
    const double d = std::min(w, 1.0 - w);
    return -0.5 * d * d;
}

inline GridFunction example_u1(const TorusGrid& g) {
    return GridFunction::sample(g, [](const Coords& x) { return u1_profile(x[0]); });
}

}  // namespace wkam
