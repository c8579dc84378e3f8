#pragma once

/**
 * @file model.hpp
 * @brief Contact Hamiltonians of mechanical type on the flat torus.
 *
 * The family is
 *
 *   H(x,u,p) = sigma * lambda * u + 1/2 |p|^2 + V(x),   sigma = +1 (increasing) or -1 (decreasing)
 *
 * with a cosine-series potential V(x) = sum_j c_j cos(2 pi k_j x_{axis_j}). Its Legendre dual is
 *
 *   L(x,u,v) = 1/2 |v|^2 - sigma * lambda * u - V(x),
 *
 * so dL/du = -sigma * lambda exactly. The duality map H(x,u,p) -> H(x,-u,-p) flips sigma and leaves
 * V untouched.
 */

#include <wkam/errors.hpp>

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace wkam {

/// Coordinates on T^d or a (co)vector in R^d. For d = 1 the second slot stays 0.
using Coords = std::array<double, 2>;

enum class Monotonicity { increasing, decreasing };

inline std::string_view to_string(Monotonicity s) {
    return s == Monotonicity::increasing ? "increasing" : "decreasing";
}

/// One cosine mode c * cos(2 pi k x_axis). k = 0 contributes the constant c.
struct CosineTerm {
    int axis = 0;
    int k = 0;
    double c = 0.0;

    bool operator==(const CosineTerm&) const = default;
};

struct ContactModel {
    int dimension = 1;
    double lambda = 1.0;
    Monotonicity sign = Monotonicity::increasing;
    std::vector<CosineTerm> potential;

    /// +1 for the increasing family, -1 for the decreasing one.
    [[nodiscard]] double sigma() const { return sign == Monotonicity::increasing ? 1.0 : -1.0; }

    bool operator==(const ContactModel&) const = default;
};

/// Structural checks (dimension, finite coefficients, axes in range). lambda is checked by
/// check_conditions so that degenerate models can still be loaded and reported on.
inline void validate(const ContactModel& m) {
    if (m.dimension != 1 && m.dimension != 2)
        throw ConfigError("model dimension must be 1 or 2");
    if (!std::isfinite(m.lambda) || m.lambda < 0)
        throw ConfigError("model lambda must be finite and non-negative");
    for (const auto& t : m.potential) {
        if (t.axis < 0 || t.axis >= m.dimension)
            throw ConfigError("potential term axis out of range");
        if (t.k < 0)
            throw ConfigError("potential term frequency must be non-negative");
        if (!std::isfinite(t.c))
            throw ConfigError("potential coefficient must be finite");
    }
}

struct PhasePoint {
    Coords x{};
    double u = 0.0;
    Coords p{};
};

struct VelocityPoint {
    Coords x{};
    double u = 0.0;
    Coords v{};
};

/// Wraps every coordinate into [0,1).
inline Coords wrap(Coords x) {
    for (auto& c : x) {
        c -= std::floor(c);
        if (c >= 1.0) c = 0.0;  // floor rounding for tiny negatives
    }
    return x;
}

inline double dot(const Coords& a, const Coords& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double potential(const ContactModel& m, const Coords& x) {
    double v = 0.0;
    for (const auto& t : m.potential)
        v += t.k == 0 ? t.c : t.c * std::cos(2.0 * std::numbers::pi * t.k * x[t.axis]);
    return v;
}

inline Coords potential_gradient(const ContactModel& m, const Coords& x) {
    Coords g{};
    for (const auto& t : m.potential) {
        if (t.k == 0) continue;
        const double w = 2.0 * std::numbers::pi * t.k;
        g[t.axis] -= t.c * w * std::sin(w * x[t.axis]);
    }
    return g;
}

/// max |V| bound from the coefficients (sum of |c_j|).
inline double potential_bound(const ContactModel& m) {
    double b = 0.0;
    for (const auto& t : m.potential) b += std::abs(t.c);
    return b;
}

inline double eval_H(const ContactModel& m, const PhasePoint& s) {
    return m.sigma() * m.lambda * s.u + 0.5 * dot(s.p, s.p) + potential(m, s.x);
}

/// Kinetic part 1/2 |v|^2 of the Lagrangian. It is a sum over axes, which the semigroup exploits
/// to split 2-D inf-convolutions into two 1-D passes.
inline double kinetic_lagrangian(const Coords& v) { return 0.5 * dot(v, v); }

inline double eval_L(const ContactModel& m, const VelocityPoint& s) {
    return kinetic_lagrangian(s.v) - m.sigma() * m.lambda * s.u - potential(m, s.x);
}

/// dH/du, constant over phase space for this family.
inline double dH_du(const ContactModel& m) { return m.sigma() * m.lambda; }

/// Fiberwise Legendre transform sup_p { <v,p> - H(x,u,p) } computed numerically from eval_H alone.
/// The kinetic part is separable, so the sup is taken one axis at a time with Brent's method on a
/// bracket around the expected maximiser.
inline double legendre_numeric(const ContactModel& m, const VelocityPoint& s) {
    const Coords zero{};
    const double h0 = eval_H(m, {s.x, s.u, zero});
    double sup = -h0;
    for (int a = 0; a < m.dimension; ++a) {
        auto neg_objective = [&](double q) {
            Coords p{};
            p[a] = q;
            return -(s.v[a] * q - (eval_H(m, {s.x, s.u, p}) - h0));
        };
        const double half_width = 10.0 + 4.0 * std::abs(s.v[a]);
        const auto [arg, val] = boost::math::tools::brent_find_minima(
            neg_objective, -half_width, half_width, std::numeric_limits<double>::digits);
        (void)arg;
        sup += -val;
    }
    return sup;
}

[[nodiscard]] inline ContactModel dualize(ContactModel m) {
    m.sign = m.sign == Monotonicity::increasing ? Monotonicity::decreasing : Monotonicity::increasing;
    return m;
}

/// Outcome of one sampled hypothesis.
struct ConditionCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ConditionReport {
    ConditionCheck convexity;       // Hessian in p positive definite
    ConditionCheck superlinearity;  // H / |p| grows without bound
    ConditionCheck decreasing;      // -lambda <= dH/du < 0
    ConditionCheck increasing;      // 0 < dH/du <= lambda
    double du_min = 0.0;
    double du_max = 0.0;
    double hessian_min_eig = 0.0;
    Monotonicity sign = Monotonicity::increasing;

    /// Convexity, superlinearity and the monotonicity condition matching the model's sign.
    [[nodiscard]] bool passed() const {
        const bool mono = sign == Monotonicity::increasing ? increasing.passed : decreasing.passed;
        return convexity.passed && superlinearity.passed && mono;
    }
};

/// Samples (x,u,p) and checks the standing hypotheses by finite differences of eval_H.
/// The lower bound delta of |dH/du| is lambda itself (the derivative is constant for this family).
inline ConditionReport check_conditions(const ContactModel& m, int n_samples, std::uint64_t seed = 1) {
    if (n_samples < 1) throw ConfigError("check_conditions needs at least one sample");
    validate(m);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> box(-5.0, 5.0);

    ConditionReport r;
    r.sign = m.sign;
    r.du_min = std::numeric_limits<double>::infinity();
    r.du_max = -std::numeric_limits<double>::infinity();
    r.hessian_min_eig = std::numeric_limits<double>::infinity();
    double worst_growth = std::numeric_limits<double>::infinity();

    for (int i = 0; i < n_samples; ++i) {
        PhasePoint s;
        for (int a = 0; a < m.dimension; ++a) {
            s.x[a] = unit(rng);
            s.p[a] = box(rng);
        }
        s.u = box(rng);

        // Hessian in p by central second differences.
        const double h = 1e-3;
        auto H_at = [&](double dp0, double dp1) {
            PhasePoint q = s;
            q.p[0] += dp0;
            q.p[1] += dp1;
            return eval_H(m, q);
        };
        const double h00 = (H_at(h, 0) - 2 * H_at(0, 0) + H_at(-h, 0)) / (h * h);
        double min_eig = h00;
        if (m.dimension == 2) {
            const double h11 = (H_at(0, h) - 2 * H_at(0, 0) + H_at(0, -h)) / (h * h);
            const double h01 = (H_at(h, h) - H_at(h, -h) - H_at(-h, h) + H_at(-h, -h)) / (4 * h * h);
            const double tr = h00 + h11;
            const double det = h00 * h11 - h01 * h01;
            min_eig = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
        }
        r.hessian_min_eig = std::min(r.hessian_min_eig, min_eig);

        // Superlinearity probe along a random unit direction.
        Coords dir{};
        double norm = 0.0;
        for (int a = 0; a < m.dimension; ++a) {
            dir[a] = box(rng);
            norm += dir[a] * dir[a];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            dir = {1.0, 0.0};
            norm = 1.0;
        }
        auto ratio = [&](double radius) {
            PhasePoint q = s;
            for (int a = 0; a < 2; ++a) q.p[a] = radius * dir[a] / norm;
            return eval_H(m, q) / radius;
        };
        worst_growth = std::min(worst_growth, ratio(100.0) - ratio(10.0));

        const double hu = 1e-4 * std::max(1.0, std::abs(s.u));
        PhasePoint up = s, dn = s;
        up.u += hu;
        dn.u -= hu;
        const double du = (eval_H(m, up) - eval_H(m, dn)) / (2 * hu);
        r.du_min = std::min(r.du_min, du);
        r.du_max = std::max(r.du_max, du);
    }

    const double tol = 1e-6 * std::max(1.0, std::abs(m.lambda));
    r.convexity = {"strict convexity", r.hessian_min_eig > 1e-6,
                   "min Hessian eigenvalue " + std::to_string(r.hessian_min_eig)};
    r.superlinearity = {"superlinearity", worst_growth > 1.0,
                        "min growth of H/|p| from |p|=10 to 100: " + std::to_string(worst_growth)};
    const std::string range = "dH/du in [" + std::to_string(r.du_min) + ", " + std::to_string(r.du_max) + "]";
    r.increasing = {"moderate increasing",
                    m.lambda > 0 && r.du_min > 0 && r.du_min >= m.lambda - tol && r.du_max <= m.lambda + tol,
                    range};
    r.decreasing = {"moderate decreasing",
                    m.lambda > 0 && r.du_max < 0 && r.du_min >= -m.lambda - tol && r.du_max <= -m.lambda + tol,
                    range};
    return r;
}

}  // namespace wkam
