#pragma once

/**
 * @file weakkam.hpp
 * @brief Backward and forward weak KAM solutions, coincidence sets, representation and the
 * long-time boundedness classification.
 */

#include <wkam/errors.hpp>
#include <wkam/grid.hpp>
#include <wkam/model.hpp>
#include <wkam/semigroup.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wkam {

struct SolverConfig {
    double tol_conv = 1e-6;  // residual per unit time
    double t_max = 200.0;
    /// Keep stepping the backward iteration after convergence until the residual stops shrinking.
    /// Forward iterations are unstable near u_minus, so any error left in u_minus grows like
    /// e^{lambda t} in solve_u_plus; solving u_minus to roundoff keeps that growth invisible.
    bool polish = true;
};

struct SolveOutcome {
    GridFunction u;
    double residual = 0.0;  // sup_diff(step(u), u) of the last step taken
    double time = 0.0;      // evolution time spent
};

/// Default coincidence/Aubry mask width.
inline double default_mask_eps(const TorusGrid& g, const SemiConfig& cfg) {
    return 10.0 * (g.spacing() + cfg.dt);
}

/// Default band for classify_initial.
inline double default_touch_eps(const TorusGrid& g, const SemiConfig& cfg) {
    return 5.0 * (g.spacing() + cfg.dt);
}

namespace detail {

inline void require_increasing(const ContactModel& m, const char* what) {
    if (m.sign != Monotonicity::increasing) throw SignMismatch(std::string(what) + " needs an increasing model");
}

inline SolveOutcome iterate_to_fixed_point(GridFunction cur, const ContactModel& m, const SemiConfig& cfg,
                                           const SolverConfig& sc, Direction d, bool polish, const char* what) {
    if (!(sc.tol_conv > 0) || !(sc.t_max > 0)) throw ConfigError("tol_conv and t_max must be positive");
    const double target = sc.tol_conv * cfg.dt;
    const long max_steps = std::max(1L, long(std::ceil(sc.t_max / cfg.dt - 1e-9)));
    double residual = 0.0;
    long k = 1;
    for (; k <= max_steps; ++k) {
        GridFunction next = step(cur, m, cfg, d);
        residual = sup_diff(next, cur);
        cur = std::move(next);
        if (residual <= target) break;
    }
    if (k > max_steps) {
        if (residual > 10.0 * target)
            throw NoConvergence(std::string(what) + ": residual " + std::to_string(residual) + " after t_max " +
                                std::to_string(sc.t_max));
        return {std::move(cur), residual, double(max_steps) * cfg.dt};
    }
    if (polish) {
        // Continue down to roundoff, since forward iteration amplifies any error left in u_minus.
        const double floor = 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, sup_norm(cur));
        for (long extra = 0; extra < max_steps && residual > floor; ++extra) {
            GridFunction next = step(cur, m, cfg, d);
            const double r = sup_diff(next, cur);
            if (r >= residual) break;
            residual = r;
            cur = std::move(next);
            ++k;
        }
    }
    return {std::move(cur), residual, double(k) * cfg.dt};
}

}  // namespace detail

/// Long-time limit of T^-_t phi0.
inline SolveOutcome solve_u_minus(const ContactModel& m, const GridFunction& phi0, const SemiConfig& cfg,
                                  const SolverConfig& sc = {}) {
    detail::require_increasing(m, "solve_u_minus");
    require_finite(phi0, "solve_u_minus");
    return detail::iterate_to_fixed_point(phi0, m, cfg, sc, Direction::backward, sc.polish, "solve_u_minus");
}

/// Long-time limit of T^+_t u_minus, iterated with the mirror step. The mirror step M and the
/// backward step T satisfy M(T u) <= u and T(M u) >= u exactly, so M u_minus <= u_minus holds on the
/// grid and the iterates decrease monotonically. The arrival-node forward step lacks this and drifts
/// away from u_minus when V is not constant.
inline SolveOutcome solve_u_plus(const ContactModel& m, const GridFunction& u_minus, const SemiConfig& cfg,
                                 const SolverConfig& sc = {}) {
    detail::require_increasing(m, "solve_u_plus");
    require_finite(u_minus, "solve_u_plus");
    return detail::iterate_to_fixed_point(u_minus, m, cfg, sc, Direction::mirror, false, "solve_u_plus");
}

inline Mask coincidence_set(const GridFunction& u_minus, const GridFunction& v_plus, double eps) {
    require_same_grid(u_minus.grid(), v_plus.grid());
    Mask out(u_minus.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
        if (std::abs(u_minus[i] - v_plus[i]) < eps) out.set(i);
    return out;
}

struct BoundCertificate {
    double sup_bound = 0.0;
    double lip_bound = 0.0;
};

/// Largest sup-norm and discrete Lipschitz constant over a family of functions.
inline BoundCertificate wkam_bound_certificate(std::span<const GridFunction> list) {
    BoundCertificate c;
    for (const auto& v : list) {
        c.sup_bound = std::max(c.sup_bound, sup_norm(v));
        c.lip_bound = std::max(c.lip_bound, lipschitz_constant(v));
    }
    return c;
}

struct WeakKamResult {
    GridFunction u_minus;
    GridFunction u_plus;
    double residual_minus = 0.0;
    double residual_plus = 0.0;
    double time_minus = 0.0;
    double time_plus = 0.0;
    Mask aubry_mask;
    double sup_bound = 0.0;
    double lip_bound = 0.0;
    double mask_eps = 0.0;
};

/// u_minus from phi0, then u_plus from u_minus, the Aubry mask at `mask_eps` (<= 0 picks the
/// default) and the bound certificate of u_plus.
inline WeakKamResult solve_weak_kam(const ContactModel& m, const GridFunction& phi0, const SemiConfig& cfg,
                                    const SolverConfig& sc = {}, double mask_eps = 0.0) {
    auto minus = solve_u_minus(m, phi0, cfg, sc);
    auto plus = solve_u_plus(m, minus.u, cfg, sc);
    const double eps = mask_eps > 0 ? mask_eps : default_mask_eps(phi0.grid(), cfg);
    Mask aubry = coincidence_set(minus.u, plus.u, eps);
    const auto cert = wkam_bound_certificate(std::span<const GridFunction>(&plus.u, 1));
    return {minus.u, plus.u, minus.residual, plus.residual, minus.time, plus.time,
            aubry, cert.sup_bound, cert.lip_bound, eps};
}

inline Mask aubry_set(const WeakKamResult& r, double eps) { return coincidence_set(r.u_minus, r.u_plus, eps); }

/// sup over mask nodes xi and tau in {dt, ..., t_rep} of h^{xi, v_plus(xi)}(., tau).
/// Both sups commute with the monotone mirror step, so a single evolution of the masked data
/// (v_plus on the mask, -INF elsewhere) with a running max gives the same values as one evolution
/// per node.
inline GridFunction represent(const GridFunction& v_plus, const Mask& mask, const ContactModel& m,
                              const SemiConfig& cfg, double t_rep) {
    require_same_grid(v_plus.grid(), mask.grid());
    if (!mask.any()) throw EmptyMask("represent needs a nonempty mask");
    const auto& g = v_plus.grid();
    GridFunction cur(g, -kInf);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!mask[i]) continue;
        if (is_sentinel(v_plus[i])) throw SentinelValue("represent: sentinel on a mask node");
        cur[i] = v_plus[i];
    }
    const long n = steps_for(t_rep, cfg.dt);
    GridFunction best(g, -kInf);
    for (long k = 0; k < n; ++k) {
        cur = step_forward_mirror(cur, m, cfg);
        for (std::size_t i = 0; i < g.size(); ++i) best[i] = std::max(best[i], cur[i]);
    }
    return best;
}

enum class Verdict { Bounded, DivergesUp, DivergesDown, Indeterminate };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Bounded: return "Bounded";
        case Verdict::DivergesUp: return "DivergesUp";
        case Verdict::DivergesDown: return "DivergesDown";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "?";
}

/// Prediction for T^+_t phi from the gap D = max(phi - u_minus): bounded iff phi <= u_minus and the
/// two touch, up to touch_eps.
inline Verdict classify_initial(const GridFunction& phi, const GridFunction& u_minus, double touch_eps) {
    require_same_grid(phi.grid(), u_minus.grid());
    if (!phi.all_finite() || !u_minus.all_finite()) return Verdict::Indeterminate;
    double gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phi.size(); ++i) gap = std::max(gap, phi[i] - u_minus[i]);
    if (gap > touch_eps) return Verdict::DivergesUp;
    if (gap < -touch_eps) return Verdict::DivergesDown;
    return Verdict::Bounded;
}

/// Same prediction for the decreasing equation, whose solution is -T^+_t(-phi).
inline Verdict classify_initial_decreasing(const GridFunction& phi, const GridFunction& u_minus,
                                           double touch_eps) {
    GridFunction neg = phi;
    for (auto& v : neg.values()) v = -v;
    switch (classify_initial(neg, u_minus, touch_eps)) {
        case Verdict::DivergesUp: return Verdict::DivergesDown;
        case Verdict::DivergesDown: return Verdict::DivergesUp;
        case Verdict::Bounded: return Verdict::Bounded;
        case Verdict::Indeterminate: return Verdict::Indeterminate;
    }
    return Verdict::Indeterminate;
}

struct LongtimeOptions {
    double t_max = 50.0;
    double k_div = 1e6;
    double delta = 1.0;       // start of the tail window for K_delta and kappa_delta
    double touch_eps = -1.0;  // < 0 picks the default
    Direction scheme = Direction::mirror;  // forward or mirror
};

struct LongtimeVerdict {
    Verdict prediction = Verdict::Indeterminate;
    Verdict empirical = Verdict::Indeterminate;
    double max_abs_seen = 0.0;
    double time_horizon = 0.0;
    double exit_time = -1.0;  // first time |w| > k_div, -1 if never
    double k_delta = 0.0;     // max sup-norm for t >= delta
    double kappa_delta = 0.0; // max Lipschitz constant for t >= delta

    [[nodiscard]] bool agrees() const { return prediction == empirical; }
};

/// Runs T^+_t phi up to t_max or until some node leaves [-k_div, k_div].
inline LongtimeVerdict verify_longtime(const GridFunction& phi, const GridFunction& u_minus,
                                       const ContactModel& m, const SemiConfig& cfg,
                                       const LongtimeOptions& opt = {}) {
    detail::require_increasing(m, "verify_longtime");
    require_finite(phi, "verify_longtime");
    if (opt.scheme == Direction::backward) throw ConfigError("verify_longtime runs a forward scheme");
    const double eps = opt.touch_eps >= 0 ? opt.touch_eps : default_touch_eps(phi.grid(), cfg);
    LongtimeVerdict r;
    r.prediction = classify_initial(phi, u_minus, eps);
    r.empirical = Verdict::Bounded;
    r.max_abs_seen = sup_norm(phi);
    const long n = steps_for(opt.t_max, cfg.dt);
    GridFunction cur = phi;
    for (long k = 1; k <= n; ++k) {
        cur = step(cur, m, cfg, opt.scheme);
        const double t = double(k) * cfg.dt;
        double hi = -kInf, lo = kInf;
        for (double v : cur.values()) {
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        r.max_abs_seen = std::max({r.max_abs_seen, std::abs(hi), std::abs(lo)});
        r.time_horizon = t;
        if (hi > opt.k_div || lo < -opt.k_div) {
            r.empirical = hi > opt.k_div ? Verdict::DivergesUp : Verdict::DivergesDown;
            r.exit_time = t;
            break;
        }
        if (t >= opt.delta - 1e-12) {
            r.k_delta = std::max(r.k_delta, sup_norm(cur));
            r.kappa_delta = std::max(r.kappa_delta, lipschitz_constant(cur));
        }
    }
    return r;
}

struct FixedPointCheck {
    double step_residual = 0.0;  // sup_diff(step_forward(v), v)
    double rate = 0.0;           // step_residual / dt
    double step1_defect = 0.0;   // max(v - step_backward(v), 0)
    bool step1_holds = false;    // step1_defect <= 10 tol_fp
};

/// Forward fixed-point residual of v, plus the one-sided check T^-v >= v.
inline FixedPointCheck forward_fixed_point_check(const GridFunction& v, const ContactModel& m,
                                                 const SemiConfig& cfg) {
    detail::require_increasing(m, "forward_fixed_point_check");
    require_finite(v, "forward_fixed_point_check");
    FixedPointCheck c;
    c.step_residual = sup_diff(step_forward(v, m, cfg), v);
    c.rate = c.step_residual / cfg.dt;
    const GridFunction b = step_backward(v, m, cfg);
    for (std::size_t i = 0; i < v.size(); ++i) c.step1_defect = std::max(c.step1_defect, v[i] - b[i]);
    c.step1_holds = c.step1_defect <= 10.0 * cfg.tol_fp;
    return c;
}

/// max over mask nodes of |T^-v - v|.
inline double backward_residual_on_mask(const GridFunction& v, const Mask& mask, const ContactModel& m,
                                        const SemiConfig& cfg) {
    require_same_grid(v.grid(), mask.grid());
    const GridFunction b = step_backward(v, m, cfg);
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask[i]) r = std::max(r, std::abs(b[i] - v[i]));
    return r;
}

struct ActionTrace {
    double min_after_delta = 0.0;
    double max_after_delta = 0.0;
    double exit_time = -1.0;
    Verdict outcome = Verdict::Bounded;
};

/// Follows h^{x0,v0}(., t) for t up to t_max and reports its range over [delta, t_max] or the first
/// exit from [-k_div, k_div].
inline ActionTrace trace_action_backward(std::size_t x0, double v0, const TorusGrid& g, const ContactModel& m,
                                         const SemiConfig& cfg, double t_max, double delta, double k_div) {
    const long n = steps_for(t_max, cfg.dt);
    GridFunction cur = spike(g, x0, v0, -kInf);
    ActionTrace tr;
    tr.min_after_delta = std::numeric_limits<double>::infinity();
    tr.max_after_delta = -std::numeric_limits<double>::infinity();
    for (long k = 1; k <= n; ++k) {
        cur = step_forward_mirror(cur, m, cfg);
        const double t = double(k) * cfg.dt;
        const auto [lo, hi] = std::minmax_element(cur.values().begin(), cur.values().end());
        if (*hi > k_div || *lo < -k_div) {
            tr.outcome = *hi > k_div ? Verdict::DivergesUp : Verdict::DivergesDown;
            tr.exit_time = t;
            return tr;
        }
        if (t >= delta - 1e-12) {
            tr.min_after_delta = std::min(tr.min_after_delta, *lo);
            tr.max_after_delta = std::max(tr.max_after_delta, *hi);
        }
    }
    return tr;
}

}  // namespace wkam
