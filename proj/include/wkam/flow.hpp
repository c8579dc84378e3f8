#pragma once

/**
 * @file flow.hpp
 * @brief Contact characteristic flow
 *
 *   x' = H_p,   u' = p . H_p - H,   p' = -H_x - H_u p,
 *
 * integrated with classical RK4, and lifts of grid functions to phase space.
 */

#include <wkam/errors.hpp>
#include <wkam/grid.hpp>
#include <wkam/model.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace wkam {

struct PhaseDerivative {
    Coords dx{};
    double du = 0.0;
    Coords dp{};
};

inline PhaseDerivative contact_rhs(const ContactModel& m, const PhasePoint& s) {
    const Coords grad_v = potential_gradient(m, s.x);
    const double hu = dH_du(m);
    PhaseDerivative d;
    d.dx = s.p;
    d.du = dot(s.p, s.p) - eval_H(m, s);
    for (int a = 0; a < 2; ++a) d.dp[a] = -grad_v[a] - hu * s.p[a];
    return d;
}

struct OrbitSummary {
    double sup_abs_H = 0.0;
    Coords window_mean{};           // circular mean position over the trailing 10% of states
    double window_distance = 0.0;   // max distance of trailing states to the mask
    double max_graph_gap = 0.0;     // max |u(t) - f(x(t))| along the orbit
};

struct OrbitRecord {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    std::vector<double> H_values;
    OrbitSummary summary;
};

inline constexpr double kBlowupBound = 1e8;

/// RK4 with fixed step. Negative t integrates the time-reversed field. The step is adjusted to
/// t / round(|t| / h_ode) so that the final time is hit exactly.
inline OrbitRecord integrate(const ContactModel& m, PhasePoint s0, double t, double h_ode = 1e-3) {
    validate(m);
    if (!(h_ode > 0)) throw ConfigError("h_ode must be positive");
    const double ratio = std::abs(t) / h_ode;
    if (ratio > 1e7) throw ConfigError("too many ODE steps requested");
    const long n = std::max(1L, std::lround(ratio));
    const double h = t / double(n);

    auto axpy = [](const PhasePoint& s, const PhaseDerivative& k, double c) {
        PhasePoint r = s;
        for (int a = 0; a < 2; ++a) {
            r.x[a] += c * k.dx[a];
            r.p[a] += c * k.dp[a];
        }
        r.u += c * k.du;
        return r;
    };

    OrbitRecord rec;
    rec.times.reserve(n + 1);
    rec.states.reserve(n + 1);
    rec.H_values.reserve(n + 1);
    PhasePoint s = s0;
    s.x = wrap(s.x);
    auto keep = [&](long k) {
        rec.times.push_back(double(k) * h);
        rec.states.push_back(s);
        rec.H_values.push_back(eval_H(m, s));
    };
    keep(0);
    for (long k = 1; k <= n; ++k) {
        const auto k1 = contact_rhs(m, s);
        const auto k2 = contact_rhs(m, axpy(s, k1, h / 2));
        const auto k3 = contact_rhs(m, axpy(s, k2, h / 2));
        const auto k4 = contact_rhs(m, axpy(s, k3, h));
        for (int a = 0; a < 2; ++a) {
            s.x[a] += h / 6 * (k1.dx[a] + 2 * k2.dx[a] + 2 * k3.dx[a] + k4.dx[a]);
            s.p[a] += h / 6 * (k1.dp[a] + 2 * k2.dp[a] + 2 * k3.dp[a] + k4.dp[a]);
        }
        s.u += h / 6 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du);
        s.x = wrap(s.x);
        if (!(std::abs(s.u) <= kBlowupBound && std::abs(s.p[0]) <= kBlowupBound &&
              std::abs(s.p[1]) <= kBlowupBound))
            throw Blowup("orbit left the admissible box at t = " + std::to_string(double(k) * h));
        keep(k);
    }
    for (double H : rec.H_values) rec.summary.sup_abs_H = std::max(rec.summary.sup_abs_H, std::abs(H));
    return rec;
}

/// (x, u(x), Du(x)) at a node; refuses nodes flagged by kink_mask(u, kappa).
inline PhasePoint lift(const GridFunction& u, std::size_t node, double kappa = 0.1) {
    require_finite(u, "lift");
    const auto& g = u.grid();
    if (node >= g.size()) throw ConfigError("lift node out of range");
    if (kink_mask(u, kappa)[node]) throw KinkNode("lift requested at a kink node");
    const auto grad = gradient_central(u);
    return {g.coords(node), u[node], grad.values[node]};
}

namespace detail {

/// Circular mean per axis, so that windows straddling 0 average correctly.
inline Coords circular_mean(const std::vector<PhasePoint>& states, std::size_t from, int dim) {
    Coords mean{};
    for (int a = 0; a < dim; ++a) {
        double sx = 0.0, cx = 0.0;
        for (std::size_t i = from; i < states.size(); ++i) {
            sx += std::sin(2 * std::numbers::pi * states[i].x[a]);
            cx += std::cos(2 * std::numbers::pi * states[i].x[a]);
        }
        mean[a] = std::atan2(sx, cx) / (2 * std::numbers::pi);
    }
    return wrap(mean);
}

inline void summarize(OrbitRecord& rec, const GridFunction& graph, const Mask& mask) {
    const int dim = graph.grid().dimension();
    const std::size_t from = rec.states.size() - std::max<std::size_t>(1, rec.states.size() / 10);
    rec.summary.window_mean = circular_mean(rec.states, from, dim);
    rec.summary.window_distance = 0.0;
    for (std::size_t i = from; i < rec.states.size(); ++i)
        rec.summary.window_distance =
            std::max(rec.summary.window_distance, distance_to_mask(mask, rec.states[i].x));
    rec.summary.max_graph_gap = 0.0;
    for (const auto& s : rec.states)
        rec.summary.max_graph_gap = std::max(rec.summary.max_graph_gap, std::abs(s.u - interpolate(graph, s.x)));
}

}  // namespace detail

/// Lift of u_minus at x0 followed backward in time for t; summary against `mask`.
inline OrbitRecord calibrated_backward_orbit(const GridFunction& u_minus, std::size_t x0, const ContactModel& m,
                                             double t, const Mask& mask, double h_ode = 1e-3, double kappa = 0.1) {
    require_same_grid(u_minus.grid(), mask.grid());
    if (!mask.any()) throw EmptyMask("orbit summary needs a nonempty mask");
    auto rec = integrate(m, lift(u_minus, x0, kappa), -std::abs(t), h_ode);
    detail::summarize(rec, u_minus, mask);
    return rec;
}

/// Lift of v_plus at x0 followed forward in time for t; summary against `mask`.
inline OrbitRecord forward_orbit_to_omega(const GridFunction& v_plus, std::size_t x0, const ContactModel& m,
                                          double t, const Mask& mask, double h_ode = 1e-3, double kappa = 0.1) {
    require_same_grid(v_plus.grid(), mask.grid());
    if (!mask.any()) throw EmptyMask("orbit summary needs a nonempty mask");
    auto rec = integrate(m, lift(v_plus, x0, kappa), std::abs(t), h_ode);
    detail::summarize(rec, v_plus, mask);
    return rec;
}

}  // namespace wkam
