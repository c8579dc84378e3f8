#pragma once

/**
 * @file oracle.hpp
 * @brief Exhaustive node-path enumeration for action functions on tiny 1-D grids.
 *
 * Every path y_0 = x0, y_1, ..., y_n is walked explicitly and the per-step value recursion applied
 * along it; the result at a node is the min (forward action) or max (backward action) over the
 * paths ending there. Nothing here calls into the semigroup code.
 */

#include <wkam/errors.hpp>
#include <wkam/grid.hpp>
#include <wkam/model.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

namespace wkam::oracle {

struct PathEnumSpec {
    TorusGrid grid{1, 4};
    int steps = 1;
    double dt = 0.1;
    ContactModel model;
    std::size_t x0 = 0;
    double u0 = 0.0;
    double lagrangian_shift = 0.0;  // constant added to L
};

inline void validate(const PathEnumSpec& s) {
    if (s.grid.dimension() != 1) throw ConfigError("oracle works on 1-D grids only");
    if (s.grid.nodes_per_axis() > 10) throw ConfigError("oracle grid limited to 10 nodes");
    if (s.steps < 1 || s.steps > 4) throw ConfigError("oracle path length must be 1..4");
    double paths = 1;
    for (int k = 0; k < s.steps; ++k) paths *= s.grid.nodes_per_axis();
    if (paths > 1e4) throw ConfigError("oracle path count exceeds 10^4");
    if (!(s.dt > 0) || !(s.model.lambda * s.dt <= 0.5)) throw ConfigError("oracle needs 0 < lambda dt <= 1/2");
    if (s.model.dimension != 1) throw ConfigError("oracle model must be 1-D");
    if (s.x0 >= s.grid.size()) throw ConfigError("oracle start node out of range");
}

namespace detail {

inline double lagrangian(const PathEnumSpec& s, std::size_t at, double u, std::size_t from, std::size_t to) {
    const double vel = min_displacement(s.grid.coords(from), s.grid.coords(to), 1)[0] / s.dt;
    return eval_L(s.model, {s.grid.coords(at), u, {vel, 0.0}}) + s.lagrangian_shift;
}

/// Solves w = u + dt L(to, w, (to - from) / dt) by plain iteration.
inline double implicit_step(const PathEnumSpec& s, double u, std::size_t from, std::size_t to) {
    double w = u;
    for (int it = 0; it < 1000; ++it) {
        const double next = u + s.dt * lagrangian(s, to, w, from, to);
        if (std::abs(next - w) <= 1e-13 * std::max(1.0, std::abs(next))) return next;
        w = next;
    }
    throw NonContraction("oracle scalar iteration did not converge");
}

template <class Visit>
void for_each_path(const PathEnumSpec& s, Visit&& visit) {
    const int n = s.grid.nodes_per_axis();
    std::vector<std::size_t> path(std::size_t(s.steps) + 1, 0);
    path[0] = s.x0;
    long total = 1;
    for (int k = 0; k < s.steps; ++k) total *= n;
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int k = s.steps; k >= 1; --k) {
            path[std::size_t(k)] = std::size_t(c % n);
            c /= n;
        }
        visit(path);
    }
}

}  // namespace detail

/// h_{x0,u0}(., n dt) over the discrete path class.
inline GridFunction enumerate_action_forward(const PathEnumSpec& s) {
    validate(s);
    std::vector<double> best(s.grid.size(), 0.0);
    std::vector<bool> seen(s.grid.size(), false);
    detail::for_each_path(s, [&](const std::vector<std::size_t>& path) {
        double u = s.u0;
        for (std::size_t k = 1; k < path.size(); ++k) u = detail::implicit_step(s, u, path[k - 1], path[k]);
        const std::size_t end = path.back();
        if (!seen[end] || u < best[end]) {
            best[end] = u;
            seen[end] = true;
        }
    });
    return GridFunction(s.grid, best);
}

/// h^{x0,u0}(., n dt): each step removes dt L at the departure node and current value, max over paths.
inline GridFunction enumerate_action_backward(const PathEnumSpec& s) {
    validate(s);
    std::vector<double> best(s.grid.size(), 0.0);
    std::vector<bool> seen(s.grid.size(), false);
    detail::for_each_path(s, [&](const std::vector<std::size_t>& path) {
        double u = s.u0;
        for (std::size_t k = 1; k < path.size(); ++k)
            u -= s.dt * detail::lagrangian(s, path[k - 1], u, path[k - 1], path[k]);
        const std::size_t end = path.back();
        if (!seen[end] || u > best[end]) {
            best[end] = u;
            seen[end] = true;
        }
    });
    return GridFunction(s.grid, best);
}

}  // namespace wkam::oracle
