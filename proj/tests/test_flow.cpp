#include <wkam/flow.hpp>
#include <wkam/reference.hpp>
#include <wkam/weakkam.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wkam;

namespace {

const ContactModel kCosine{1, 1.0, Monotonicity::increasing, {{0, 1, 0.3}}};

}  // namespace

TEST(Flow, VectorFieldClosedForms) {
    const auto m = example_model();
    const auto d = contact_rhs(m, {{0.2, 0}, 0.0, {1.0, 0}});
    EXPECT_DOUBLE_EQ(d.dx[0], 1.0);
    EXPECT_DOUBLE_EQ(d.du, 0.5);
    EXPECT_DOUBLE_EQ(d.dp[0], -1.0);
    const auto rest = contact_rhs(m, {{0.7, 0}, 0.0, {0, 0}});
    EXPECT_EQ(rest.dx[0], 0.0);
    EXPECT_EQ(rest.du, 0.0);
    EXPECT_EQ(rest.dp[0], 0.0);
}

TEST(Flow, EquilibriumIsFixed) {
    const auto rec = integrate(example_model(), {{0.3, 0}, 0.0, {0, 0}}, 5.0);
    for (const auto& s : rec.states) {
        EXPECT_EQ(s.x[0], 0.3);
        EXPECT_EQ(s.u, 0.0);
        EXPECT_EQ(s.p[0], 0.0);
    }
    EXPECT_NEAR(rec.times.back(), 5.0, 1e-12);
}

TEST(Flow, EnergyDecaysExponentially) {
    const auto rec = integrate(example_model(), {{0, 0}, 0.0, {1.0, 0}}, 1.0);
    EXPECT_NEAR(rec.H_values.front(), 0.5, 1e-15);
    EXPECT_NEAR(rec.H_values.back(), 0.5 * std::exp(-1.0), 1e-8);
}

TEST(Flow, ZeroEnergyLevelIsInvariant) {
    // H = u + p^2/2 + V vanishes for u = -p^2/2 - V(x).
    const double p = 0.8, x = 0.1;
    const double u = -0.5 * p * p - potential(kCosine, {x, 0});
    const auto rec = integrate(kCosine, {{x, 0}, u, {p, 0}}, 10.0);
    EXPECT_LE(rec.summary.sup_abs_H, 1e-8);
}

TEST(Flow, EnergyTransportOnRandomStarts) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> box(-1, 1), unit(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const PhasePoint s0{{unit(rng), 0}, box(rng), {box(rng), 0}};
        const auto rec = integrate(kCosine, s0, 10.0);
        const double h0 = rec.H_values.front();
        for (std::size_t k = 0; k < rec.times.size(); k += 500)
            EXPECT_NEAR(rec.H_values[k], h0 * std::exp(-rec.times[k]), 1e-6);
    }
}

TEST(Flow, TimeReversalReturnsToStart) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> box(-1, 1), unit(0, 1);
    const ContactModel m2{2, 0.5, Monotonicity::increasing, {{0, 1, 0.3}, {1, 2, 0.2}}};
    for (int trial = 0; trial < 5; ++trial) {
        const PhasePoint s0{{unit(rng), unit(rng)}, box(rng), {box(rng), box(rng)}};
        const auto there = integrate(m2, s0, 5.0).states.back();
        const auto back = integrate(m2, there, -5.0).states.back();
        const Coords d = min_displacement(back.x, s0.x, 2);
        EXPECT_LE(std::abs(d[0]) + std::abs(d[1]), 1e-6);
        EXPECT_NEAR(back.u, s0.u, 1e-6);
        EXPECT_NEAR(back.p[0], s0.p[0], 1e-6);
        EXPECT_NEAR(back.p[1], s0.p[1], 1e-6);
    }
}

TEST(Flow, BlowupAndStepLimits) {
    EXPECT_THROW(integrate(example_model(), {{0, 0}, 0.0, {1e4, 0}}, -20.0), Blowup);
    EXPECT_THROW(integrate(example_model(), {{0, 0}, 0.0, {0, 0}}, 1e5, 1e-3), ConfigError);
    EXPECT_THROW(integrate(example_model(), {{0, 0}, 0.0, {0, 0}}, 1.0, 0.0), ConfigError);
}

TEST(Flow, LiftReadsSlopes) {
    const TorusGrid g(1, 256);
    const auto s = lift(GridFunction(g), 10);
    EXPECT_EQ(s.u, 0.0);
    EXPECT_EQ(s.p[0], 0.0);
    const auto u1 = example_u1(g);
    const auto q = lift(u1, 64);
    EXPECT_DOUBLE_EQ(q.x[0], 0.25);
    EXPECT_DOUBLE_EQ(q.u, -0.03125);
    EXPECT_NEAR(q.p[0], -0.25, 1e-3);
    EXPECT_THROW(lift(u1, 128), KinkNode);
    EXPECT_THROW(lift(u1, 256), ConfigError);
}

TEST(Flow, CalibratedOrbitOfConstantSolution) {
    const TorusGrid g(1, 64);
    const ContactModel m{1, 2.0, Monotonicity::increasing, {{0, 0, 0.5}}};
    Mask all(g);
    for (std::size_t i = 0; i < g.size(); ++i) all.set(i);
    const auto rec = calibrated_backward_orbit(GridFunction(g, -0.25), 7, m, 5.0, all);
    EXPECT_EQ(rec.summary.window_distance, 0.0);
    EXPECT_LE(rec.summary.sup_abs_H, 1e-15);
    EXPECT_LE(rec.summary.max_graph_gap, 1e-15);
    EXPECT_THROW(calibrated_backward_orbit(GridFunction(g, -0.25), 7, m, 5.0, Mask(g)), EmptyMask);
}

TEST(Flow, BackwardEnergyGrowth) {
    // Off the zero level, H(-t) = H(0) e^{lambda t}.
    const ContactModel m{1, 2.0, Monotonicity::increasing, {{0, 0, 0.5}}};
    const auto rec = integrate(m, {{0.1, 0}, -0.25 + 1e-6, {0, 0}}, -3.0);
    EXPECT_NEAR(rec.H_values.front(), 2e-6, 1e-15);
    EXPECT_NEAR(rec.H_values.back(), 2e-6 * std::exp(6.0), 1e-9);
}

TEST(Flow, ForwardOrbitOfKinkProfileReachesTheWell) {
    const TorusGrid g(1, 256);
    Mask omega(g);
    omega.set(0);
    const auto rec = forward_orbit_to_omega(example_u1(g), 64, example_model(), 20.0, omega);
    EXPECT_LE(rec.summary.window_distance, 5e-2);
    EXPECT_LE(rec.summary.max_graph_gap, 5e-2);
    EXPECT_LE(std::abs(rec.H_values.back()), std::abs(rec.H_values.front()) + 1e-12);
}

TEST(Flow, OrbitsWithPotentialFollowTheGraphsTowardTheAubrySet) {
    // The Aubry set sits at the maximum of V (x = 0), a saddle of the flow, so only short
    // horizons are well conditioned.
    const TorusGrid g(1, 128);
    SemiConfig c;
    c.dt = 0.01;
    const auto res = solve_weak_kam(kCosine, GridFunction(g), c);
    const auto fwd = forward_orbit_to_omega(res.u_plus, 40, kCosine, 0.5, res.aubry_mask);
    EXPECT_LE(fwd.summary.max_graph_gap, 5e-2);
    EXPECT_LE(torus_distance(fwd.states.back().x, {0, 0}, 1), 5e-2);
    const auto bwd = calibrated_backward_orbit(res.u_minus, 40, kCosine, 0.5, res.aubry_mask);
    EXPECT_LE(bwd.summary.max_graph_gap, 5e-2);
    EXPECT_LE(torus_distance(bwd.states.back().x, {0, 0}, 1), 0.15);
}
