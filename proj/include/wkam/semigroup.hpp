#pragma once

/**
 * @file semigroup.hpp
 * @brief Implicit Lax-Oleinik one-step operators on a torus grid.
 *
 * One backward step solves, at every node x,
 *
 *   v(x) = min_y [ u(y) + dt * L(x, v(x), (x - y) / dt) ],
 *
 * and one forward step solves
 *
 *   v(x) = max_y [ u(y) - dt * L(x, v(x), (y - x) / dt) ].
 *
 * L is the mechanical Lagrangian, so the kinetic part separates from the u and x dependence and each
 * node reduces to an inf-convolution followed by a scalar fixed point v = A + dt * L(x, v, 0).
 *
 * The mirror step used for backward action functions evaluates L at the departure node with the
 * known old value instead. It is the exact per-path inverse of the backward step.
 */

#include <wkam/errors.hpp>
#include <wkam/grid.hpp>
#include <wkam/model.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace wkam {

struct SemiConfig {
    double dt = 0.005;
    double tol_fp = 1e-12;
    int max_fp = 200;
    int radius = 0;  // cells; 0 = global search
};

inline void validate(const SemiConfig& cfg, const ContactModel& m) {
    if (!(cfg.dt > 0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive");
    if (!(m.lambda * cfg.dt <= 0.5)) throw ConfigError("contraction guard violated: lambda * dt > 1/2");
    if (!(cfg.tol_fp > 0 && cfg.tol_fp <= 1e-6)) throw ConfigError("tol_fp must lie in (0, 1e-6]");
    if (cfg.max_fp < 20) throw ConfigError("max_fp must be at least 20");
    if (cfg.radius < 0) throw ConfigError("radius must be non-negative");
}

namespace detail {

/// Smallest double v with v - map(v) >= 0 near the converged iterate `v0`. The result depends on
/// the map only, not on the starting guess, so a map that is monotone in its data gives a nodal
/// value that is monotone in the data down to the last bit.
template <class Map>
double canonical_root(Map& map, double v0, double width) {
    auto g = [&](double v) { return v - map(v); };
    double lo = v0, hi = v0;
    if (g(v0) >= 0) {
        for (double w = width; g(lo) >= 0; w *= 2) {
            if (!std::isfinite(w)) return v0;
            lo = v0 - w;
        }
    } else {
        for (double w = width; g(hi) < 0; w *= 2) {
            if (!std::isfinite(w)) return v0;
            hi = v0 + w;
        }
    }
    // g(lo) < 0 <= g(hi)
    for (int it = 0; it < 200; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (g(mid) >= 0 ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace detail

/// Fixed-point iteration v <- map(v) from `guess`. Stops once |map(v) - v| <= tol_fp * max(1, |v|)
/// and then settles on the canonical root next to the iterate.
template <class Map>
double nodal_implicit_solve(Map&& map, double guess, const SemiConfig& cfg) {
    double v = guess;
    for (int it = 0; it < cfg.max_fp; ++it) {
        const double next = map(v);
        if (!std::isfinite(next)) throw NonContraction("nodal map produced a non-finite value");
        const double scale = std::max(1.0, std::abs(next));
        if (std::abs(next - v) <= cfg.tol_fp * scale)
            return detail::canonical_root(map, next, 4 * std::numeric_limits<double>::epsilon() * scale);
        v = next;
    }
    throw NonContraction("nodal fixed point did not converge within max_fp iterations");
}

enum class Direction { backward, forward, mirror };

inline std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::backward: return "backward";
        case Direction::forward: return "forward";
        case Direction::mirror: return "mirror";
    }
    return "?";
}

namespace detail {

enum class Extremum { min, max };

/// Kinetic cost dt * K(d / dt) for every wrapped cell offset o in [0, n).
inline std::vector<double> offset_costs(int n, double dt) {
    std::vector<double> c(n);
    const double dx = 1.0 / n;
    for (int o = 0; o < n; ++o) {
        const int w = o < (n + 1) / 2 ? o : o - n;
        c[o] = dt * kinetic_lagrangian({w * dx / dt, 0.0});
    }
    return c;
}

/// One periodic line: dst[i] = ext_j src[j] +/- cost[(i - j) mod n], sentinels skipped.
/// A node with no finite candidate receives the sentinel of the reduction.
inline void convolve_line(const double* src, std::size_t src_stride, double* dst, std::size_t dst_stride,
                          int n, const std::vector<double>& cost, int radius, Extremum ext) {
    const bool global = radius == 0 || 2 * radius + 1 >= n;
    const double none = ext == Extremum::min ? kInf : -kInf;
    std::vector<double> line(static_cast<std::size_t>(n));
    std::vector<int> finite;
    finite.reserve(std::size_t(n));
    for (int j = 0; j < n; ++j) {
        line[std::size_t(j)] = src[std::size_t(j) * src_stride];
        if (!is_sentinel(line[std::size_t(j)])) finite.push_back(j);
    }
    for (int i = 0; i < n; ++i) {
        double best = none;
        bool found = false;
        auto visit = [&](int j) {
            int o = i - j;
            if (o < 0) o += n;
            const double s = line[std::size_t(j)];
            const double val = ext == Extremum::min ? s + cost[std::size_t(o)] : s - cost[std::size_t(o)];
            if (!found || (ext == Extremum::min ? val < best : val > best)) {
                best = val;
                found = true;
            }
        };
        if (global) {
            for (int j : finite) visit(j);
        } else {
            for (int o = -radius; o <= radius; ++o) {
                const int j = ((i + o) % n + n) % n;
                if (!is_sentinel(line[std::size_t(j)])) visit(j);
            }
        }
        dst[std::size_t(i) * dst_stride] = best;
    }
}

/// ext_y [ f(y) +/- dt K((x - y) / dt) ] on the whole grid. In 2-D the kinetic cost is a sum over
/// axes, so the reduction runs as two 1-D passes. The radius window is the square |o_a| <= r.
inline GridFunction convolve(const GridFunction& f, double dt, int radius, Extremum ext) {
    const auto& g = f.grid();
    const int n = g.nodes_per_axis();
    const auto cost = offset_costs(n, dt);
    GridFunction out(g);
    const double* src = f.values().data();
    double* dst = out.values().data();
    if (g.dimension() == 1) {
        convolve_line(src, 1, dst, 1, n, cost, radius, ext);
        return out;
    }
    std::vector<double> tmp(g.size());
    for (int r = 0; r < n; ++r)
        convolve_line(src + std::size_t(r) * n, 1, tmp.data() + std::size_t(r) * n, 1, n, cost, radius, ext);
    for (int c = 0; c < n; ++c)
        convolve_line(tmp.data() + c, std::size_t(n), dst + c, std::size_t(n), n, cost, radius, ext);
    return out;
}

inline void check_inputs(const GridFunction& u, const ContactModel& m, const SemiConfig& cfg) {
    validate(m);
    validate(cfg, m);
    if (m.dimension != u.grid().dimension()) throw GridMismatch("model and grid dimensions differ");
    bool any = false;
    double max_abs = 0.0;
    for (double v : u.values()) {
        if (is_sentinel(v)) continue;
        any = true;
        max_abs = std::max(max_abs, std::abs(v));
    }
    if (!any) throw AllUnreachable("grid function has no finite value");
    if (cfg.radius > 0) {
        const double speed = cfg.radius * u.grid().spacing() / cfg.dt;
        const double cap = 4.0 * std::sqrt(1.0 + potential_bound(m) + max_abs);
        if (speed < cap)
            throw ConfigError("search radius too small: r*dx/dt = " + std::to_string(speed) +
                              " below speed cap " + std::to_string(cap));
    }
}

/// Seed for sentinel nodes: the smallest (backward) or largest (forward) finite value.
inline double finite_extreme(const GridFunction& u, Extremum ext) {
    double best = ext == Extremum::min ? kInf : -kInf;
    for (double v : u.values()) {
        if (is_sentinel(v)) continue;
        best = ext == Extremum::min ? std::min(best, v) : std::max(best, v);
    }
    return best;
}

}  // namespace detail

/// One step of T^-_dt.
inline GridFunction step_backward(const GridFunction& u, const ContactModel& m, const SemiConfig& cfg) {
    detail::check_inputs(u, m, cfg);
    const auto& g = u.grid();
    const GridFunction a = detail::convolve(u, cfg.dt, cfg.radius, detail::Extremum::min);
    const double seed = detail::finite_extreme(u, detail::Extremum::min);
    GridFunction v(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (is_sentinel(a[i])) throw AllUnreachable("every candidate of a backward step is a sentinel");
        const Coords x = g.coords(i);
        const double ai = a[i];
        v[i] = nodal_implicit_solve(
            [&](double w) { return ai + cfg.dt * eval_L(m, {x, w, {}}); },
            is_sentinel(u[i]) ? seed : u[i], cfg);
    }
    return v;
}

/// One step of T^+_dt, implicit at the arrival node.
inline GridFunction step_forward(const GridFunction& u, const ContactModel& m, const SemiConfig& cfg) {
    detail::check_inputs(u, m, cfg);
    const auto& g = u.grid();
    const GridFunction b = detail::convolve(u, cfg.dt, cfg.radius, detail::Extremum::max);
    const double seed = detail::finite_extreme(u, detail::Extremum::max);
    GridFunction v(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (is_sentinel(b[i])) throw AllUnreachable("every candidate of a forward step is a sentinel");
        const Coords x = g.coords(i);
        const double bi = b[i];
        v[i] = nodal_implicit_solve(
            [&](double w) { return bi - cfg.dt * eval_L(m, {x, w, {}}); },
            is_sentinel(u[i]) ? seed : u[i], cfg);
    }
    return v;
}

/// Forward step with L taken at the departure node and old value:
///   v(z) = max_y [ u(y) - dt * L(y, u(y), 0) - dt K((z - y) / dt) ].
/// Undoes step_backward along every node path, which makes the action round trip exact.
inline GridFunction step_forward_mirror(const GridFunction& u, const ContactModel& m, const SemiConfig& cfg) {
    detail::check_inputs(u, m, cfg);
    const auto& g = u.grid();
    GridFunction q(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        q[i] = is_sentinel(u[i]) ? u[i] : u[i] - cfg.dt * eval_L(m, {g.coords(i), u[i], {}});
    GridFunction v = detail::convolve(q, cfg.dt, cfg.radius, detail::Extremum::max);
    for (double x : v.values())
        if (is_sentinel(x)) throw AllUnreachable("every candidate of a mirror step is a sentinel");
    return v;
}

inline GridFunction step(const GridFunction& u, const ContactModel& m, const SemiConfig& cfg, Direction d) {
    switch (d) {
        case Direction::backward: return step_backward(u, m, cfg);
        case Direction::forward: return step_forward(u, m, cfg);
        case Direction::mirror: return step_forward_mirror(u, m, cfg);
    }
    throw ConfigError("unknown direction");
}

struct EvolveRecord {
    std::vector<double> times;
    std::vector<GridFunction> snapshots;
    std::vector<double> sup_norms;

    [[nodiscard]] const GridFunction& last() const { return snapshots.back(); }
};

/// Number of steps covering t; t must be a positive multiple of dt.
inline long steps_for(double t, double dt) {
    const double r = t / dt;
    const long n = std::lround(r);
    if (n < 1 || std::abs(r - double(n)) > 1e-9 * std::max(1.0, r))
        throw ConfigError("time " + std::to_string(t) + " is not a positive multiple of dt");
    return n;
}

/// Max |v| over finite values.
inline double finite_sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values())
        if (!is_sentinel(v)) m = std::max(m, std::abs(v));
    return m;
}

/// Composes t/dt steps. Snapshots are kept at t=0, every `stride` steps and at the final time;
/// stride 0 keeps only the endpoints.
inline EvolveRecord evolve(const GridFunction& u, const ContactModel& m, const SemiConfig& cfg, double t,
                           Direction d, long stride = 0) {
    const long n = steps_for(t, cfg.dt);
    EvolveRecord rec;
    auto keep = [&](long k, const GridFunction& f) {
        rec.times.push_back(double(k) * cfg.dt);
        rec.snapshots.push_back(f);
        rec.sup_norms.push_back(finite_sup_norm(f));
    };
    keep(0, u);
    GridFunction cur = u;
    for (long k = 1; k <= n; ++k) {
        cur = step(cur, m, cfg, d);
        if (k == n || (stride > 0 && k % stride == 0)) keep(k, cur);
    }
    return rec;
}

/// Final state only, without the snapshot bookkeeping.
inline GridFunction evolve_final(GridFunction u, const ContactModel& m, const SemiConfig& cfg, double t,
                                 Direction d) {
    const long n = steps_for(t, cfg.dt);
    for (long k = 0; k < n; ++k) u = step(u, m, cfg, d);
    return u;
}

/// Value u0 at x0, `fill` elsewhere.
inline GridFunction spike(const TorusGrid& g, std::size_t x0, double u0, double fill) {
    if (x0 >= g.size()) throw ConfigError("spike node out of range");
    GridFunction f(g, fill);
    f[x0] = u0;
    return f;
}

/// h_{x0,u0}(., t): backward evolution of the +INF spike.
inline GridFunction action_forward(const TorusGrid& g, std::size_t x0, double u0, const ContactModel& m,
                                   const SemiConfig& cfg, double t) {
    return evolve_final(spike(g, x0, u0, kInf), m, cfg, t, Direction::backward);
}

/// h^{x0,u0}(., t): mirror evolution of the -INF spike.
inline GridFunction action_backward(const TorusGrid& g, std::size_t x0, double u0, const ContactModel& m,
                                    const SemiConfig& cfg, double t) {
    return evolve_final(spike(g, x0, u0, -kInf), m, cfg, t, Direction::mirror);
}

/// Backward step of the decreasing model, computed directly.
inline GridFunction step_backward_dual(const GridFunction& u, const ContactModel& m, const SemiConfig& cfg) {
    if (m.sign != Monotonicity::decreasing) throw SignMismatch("step_backward_dual needs a decreasing model");
    return step_backward(u, m, cfg);
}

/// The same step obtained as -T^+(-u) for the dual (increasing) model.
inline GridFunction step_backward_via_duality(const GridFunction& u, const ContactModel& m,
                                              const SemiConfig& cfg) {
    if (m.sign != Monotonicity::decreasing)
        throw SignMismatch("step_backward_via_duality needs a decreasing model");
    GridFunction neg = u;
    for (auto& v : neg.values()) v = -v;
    GridFunction out = step_forward(neg, dualize(m), cfg);
    for (auto& v : out.values()) v = -v;
    return out;
}

}  // namespace wkam
