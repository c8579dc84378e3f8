// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <wkam/flow.hpp>
#include <wkam/io.hpp>
#include <wkam/oracle.hpp>
#include <wkam/reference.hpp>
#include <wkam/semigroup.hpp>
#include <wkam/weakkam.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace wkam;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[violated: " << what << "] ";
        }
    }
};

std::string f(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

SemiConfig with_dt(double dt) {
    SemiConfig c;
    c.dt = dt;
    return c;
}

GridFunction random_function(const TorusGrid& g, std::mt19937_64& rng, double amp = 1.0) {
    std::uniform_real_distribution<double> box(-amp, amp);
    return GridFunction::sample(g, [&](const Coords&) { return box(rng); });
}

ContactModel random_increasing(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-0.5, 0.5);
    return ContactModel{1, 0.2 + std::abs(c(rng)) * 4, Monotonicity::increasing, {{0, 1, c(rng)}, {0, 2, c(rng)}}};
}

// 1: backward solution of the flat model.
void criterion_1(Outcome& o) {
    std::mt19937_64 rng(101);
    const TorusGrid g(1, 256);
    const auto r = solve_u_minus(example_model(), random_function(g, rng), with_dt(0.005));
    const double s = sup_norm(r.u);
    o.detail << "N=256 dt=0.005 sup|u_minus|=" << f(s) << " (<= 5e-2), converged at t=" << r.time << ". ";
    o.require(s <= 5e-2, "sup norm");
}

// 2: forward solutions of the flat model and separation of a non-solution.
void criterion_2(Outcome& o) {
    const TorusGrid g(1, 256);
    const auto m = example_model();
    const auto c = with_dt(0.2);
    const double dx = g.spacing();
    const double r0 = forward_fixed_point_check(GridFunction(g), m, c).step_residual;
    const auto u1 = example_u1(g);
    const double r1 = forward_fixed_point_check(u1, m, c).step_residual;
    GridFunction shifted = u1;
    for (auto& v : shifted.values()) v += 0.05;
    const double r2 = forward_fixed_point_check(shifted, m, c).step_residual;
    const double C = r1 / (0.1 * (dx + c.dt));
    o.detail << "N=256 dt=0.2: residual(0)=" << f(r0) << " (<= tol_fp), residual(u1)=" << f(r1)
             << " = 0.1(dx+dt)C with C=" << f(C) << " (<= 50), residual(u1+0.05)=" << f(r2) << " (> 0.01). ";
    o.require(r0 <= c.tol_fp, "residual of zero");
    o.require(C <= 50, "constant C");
    o.require(r2 > 0.01, "separation");
}

// 3: duality of the decreasing backward step.
void criterion_3(Outcome& o) {
    std::mt19937_64 rng(303);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const TorusGrid g(1, 16 + int(rng() % 113));
        auto m = random_increasing(rng);
        m.sign = Monotonicity::decreasing;
        const auto c = with_dt(0.01 + 0.04 * double(rng() % 3));
        const auto u = random_function(g, rng);
        worst = std::max(worst, sup_diff(step_backward_dual(u, m, c), step_backward_via_duality(u, m, c)));
    }
    o.detail << "20 random functions, max sup_diff=" << f(worst) << " (<= 10 tol_fp = 1e-11). ";
    o.require(worst <= 10 * SemiConfig{}.tol_fp, "duality gap");
}

// 4: dynamic programming against exhaustive path enumeration.
void criterion_4(Outcome& o) {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> box(-1, 1);
    double worst_f = 0.0, worst_b = 0.0;
    for (int k = 0; k < 50; ++k) {
        const int n = 4 + int(rng() % 5);
        const int steps = 1 + int(rng() % 3);
        const double dt = 0.05 + 0.05 * double(rng() % 3);
        oracle::PathEnumSpec s;
        s.grid = TorusGrid(1, n);
        s.steps = steps;
        s.dt = dt;
        s.model = random_increasing(rng);
        s.x0 = rng() % std::size_t(n);
        s.u0 = box(rng);
        const auto c = with_dt(dt);
        worst_f = std::max(worst_f, sup_diff(oracle::enumerate_action_forward(s),
                                             action_forward(s.grid, s.x0, s.u0, s.model, c, steps * dt)));
        worst_b = std::max(worst_b, sup_diff(oracle::enumerate_action_backward(s),
                                             action_backward(s.grid, s.x0, s.u0, s.model, c, steps * dt)));
    }
    o.detail << "50 cases N<=8 n<=3: forward action " << f(worst_f) << ", backward action " << f(worst_b)
             << " (<= 1e-9). ";
    o.require(worst_f <= 1e-9 && worst_b <= 1e-9, "agreement");
}

// 5: monotonicity, nonexpansiveness, forward expansion bound, u0-contraction of the action.
void criterion_5(Outcome& o) {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> unit(0, 1), box(-1, 1);
    int order_violations = 0;
    double worst_back = 0.0, worst_fwd = 0.0, worst_action = 0.0;
    for (int k = 0; k < 200; ++k) {
        const TorusGrid g(1, 8 + int(rng() % 41));
        const auto m = random_increasing(rng);
        const auto c = with_dt(0.01 + 0.02 * double(rng() % 3));
        const auto u = random_function(g, rng);
        GridFunction w = u;
        for (auto& v : w.values()) v += unit(rng) * (rng() % 2 ? 1.0 : 0.0);
        for (auto d : {Direction::backward, Direction::forward, Direction::mirror}) {
            const auto su = step(u, m, c, d), sw = step(w, m, c, d);
            for (std::size_t i = 0; i < g.size(); ++i)
                if (su[i] > sw[i]) ++order_violations;
        }
        const GridFunction v = random_function(g, rng);
        const double in = sup_diff(u, v);
        worst_back = std::max(worst_back, sup_diff(step_backward(u, m, c), step_backward(v, m, c)) / in);
        worst_fwd = std::max(worst_fwd, sup_diff(step_forward(u, m, c), step_forward(v, m, c)) / in *
                                            (1 - m.lambda * c.dt));
        const std::size_t x0 = rng() % g.size();
        const double a = box(rng), b = box(rng);
        const double t = double(1 + rng() % 5) * c.dt;
        const auto ha = action_forward(g, x0, a, m, c, t), hb = action_forward(g, x0, b, m, c, t);
        for (std::size_t i = 0; i < g.size(); ++i)
            worst_action = std::max(worst_action, std::abs(ha[i] - hb[i]) / std::abs(a - b));
    }
    o.detail << "200 pairs: order violations " << order_violations << ", T- ratio " << f(worst_back)
             << " (<= 1+1e-12), T+ ratio times (1 - lambda dt) " << f(worst_fwd)
             << " (<= 1+1e-12), action |dout|/|du0| " << f(worst_action) << " (<= 1). ";
    o.require(order_violations == 0, "monotonicity");
    o.require(worst_back <= 1 + 1e-12, "T- nonexpansive");
    o.require(worst_fwd <= 1 + 1e-12, "T+ expansion");
    o.require(worst_action <= 1 + 1e-12, "u0-contraction");
}

// 6: forward/backward action round trip.
void criterion_6(Outcome& o) {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> box(-1, 1);
    double worst = 0.0;
    const auto m = example_model();
    for (int k = 0; k < 30; ++k) {
        const TorusGrid g(1, 16 + int(rng() % 113));
        const auto c = with_dt(0.01 + 0.01 * double(rng() % 5));
        const std::size_t x0 = rng() % g.size(), x = rng() % g.size();
        const double u0 = box(rng);
        const double t = double(1 + rng() % 10) * c.dt;
        const auto h = action_forward(g, x0, u0, m, c, t);
        const auto back = action_backward(g, x, h[x], m, c, t);
        worst = std::max(worst, std::abs(back[x0] - u0));
    }
    o.detail << "30 round trips, max |recovered - u0|=" << f(worst) << " (<= 10 tol_fp). ";
    o.require(worst <= 10 * SemiConfig{}.tol_fp, "round trip");
}

// 7: long-time dichotomy and classification.
void criterion_7(Outcome& o) {
    const TorusGrid g(1, 256);
    const auto m = example_model();
    const auto c = with_dt(0.005);
    const GridFunction zero(g);
    LongtimeOptions opt;
    opt.scheme = Direction::forward;
    const auto z = verify_longtime(zero, zero, m, c, opt);
    const auto up = verify_longtime(GridFunction(g, 0.1), zero, m, c, opt);
    const auto down = verify_longtime(GridFunction(g, -0.1), zero, m, c, opt);
    const auto k = verify_longtime(example_u1(g), zero, m, c, opt);
    o.detail << "phi=0 max|w|=" << f(z.max_abs_seen) << " (<= 5e-2); +0.1 exits at t=" << up.exit_time
             << ", -0.1 at t=" << down.exit_time << " (< 20); verdicts 0:" << to_string(z.prediction) << "/"
             << to_string(z.empirical) << " +0.1:" << to_string(up.prediction) << "/" << to_string(up.empirical)
             << " -0.1:" << to_string(down.prediction) << "/" << to_string(down.empirical)
             << " u1:" << to_string(k.prediction) << "/" << to_string(k.empirical) << ". ";
    o.require(z.max_abs_seen <= 5e-2 && z.empirical == Verdict::Bounded, "zero stays bounded");
    o.require(up.empirical == Verdict::DivergesUp && up.exit_time > 0 && up.exit_time < 20, "+0.1 exit");
    o.require(down.empirical == Verdict::DivergesDown && down.exit_time > 0 && down.exit_time < 20, "-0.1 exit");
    o.require(z.agrees() && up.agrees() && down.agrees() && k.agrees(), "classification");
}

// 8: representation of u1 from the node 0.
void criterion_8(Outcome& o) {
    const TorusGrid g(1, 256);
    const auto c = with_dt(0.05);
    Mask mask(g);
    mask.set(0);
    const auto u1 = example_u1(g);
    const auto w = represent(u1, mask, example_model(), c, 20.0);
    double excess = -INFINITY;
    for (std::size_t i = 0; i < g.size(); ++i) excess = std::max(excess, w[i] - u1[i]);
    const double err = sup_diff(w, u1);
    o.detail << "N=256 dt=0.05 t_rep=20: sup error " << f(err) << " (<= 7e-2), max excess " << f(excess)
             << " (<= 5e-2). ";
    o.require(err <= 7e-2, "sup error");
    o.require(excess <= 5e-2, "excess");
}

// 9: flow identities.
void criterion_9(Outcome& o) {
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> box(-1, 1), unit(0, 1);
    const std::vector<ContactModel> models{example_model(),
                                           {1, 1.0, Monotonicity::increasing, {{0, 1, 0.3}}},
                                           {2, 0.5, Monotonicity::increasing, {{0, 1, 0.3}, {1, 2, 0.2}}}};
    double transport = 0.0, level = 0.0;
    for (const auto& m : models) {
        for (int k = 0; k < 5; ++k) {
            const PhasePoint s0{{unit(rng), m.dimension == 2 ? unit(rng) : 0.0},
                                box(rng),
                                {box(rng), m.dimension == 2 ? box(rng) : 0.0}};
            const auto rec = integrate(m, s0, 10.0, 1e-3);
            const double h0 = rec.H_values.front();
            for (std::size_t i = 0; i < rec.times.size(); ++i)
                transport = std::max(transport, std::abs(rec.H_values[i] - h0 * std::exp(-m.lambda * rec.times[i])));
            PhasePoint z = s0;
            z.u = -(0.5 * dot(z.p, z.p) + potential(m, z.x)) / m.lambda;
            level = std::max(level, integrate(m, z, 10.0, 1e-3).summary.sup_abs_H);
        }
    }
    const TorusGrid g(1, 256);
    Mask omega(g);
    omega.set(0);
    const auto orbit = forward_orbit_to_omega(example_u1(g), 64, example_model(), 20.0, omega);
    const double end = torus_distance(orbit.states.back().x, {0, 0}, 1);
    o.detail << "H transport " << f(transport) << " (<= 1e-6), zero level " << f(level)
             << " (<= 1e-8), u1 orbit from x=0.25 ends at distance " << f(end) << " (<= 5e-2). ";
    o.require(transport <= 1e-6, "transport");
    o.require(level <= 1e-8, "zero level");
    o.require(end <= 5e-2, "orbit end");
}

// 10: ordering of the two solutions and inclusion of coincidence sets.
void criterion_10(Outcome& o) {
    std::mt19937_64 rng(1010);
    struct Case {
        const char* name;
        ContactModel model;
        int dim, nodes;
        double dt;
    };
    const std::vector<Case> cases{
        {"flat", example_model(), 1, 256, 0.005},
        {"cosine", {1, 1.0, Monotonicity::increasing, {{0, 1, 0.3}}}, 1, 128, 0.01},
        {"two-harmonic", {1, 0.5, Monotonicity::increasing, {{0, 1, 0.2}, {0, 2, -0.15}}}, 1, 128, 0.01},
        {"shifted", {1, 2.0, Monotonicity::increasing, {{0, 0, 0.5}}}, 1, 64, 0.005},
        {"torus", {2, 1.0, Monotonicity::increasing, {{0, 1, 0.2}, {1, 1, 0.1}}}, 2, 32, 0.01},
    };
    double worst = -INFINITY;
    for (const auto& k : cases) {
        const TorusGrid g(k.dim, k.nodes);
        const auto r = solve_weak_kam(k.model, random_function(g, rng), with_dt(k.dt));
        double gap = -INFINITY;
        for (std::size_t i = 0; i < g.size(); ++i) gap = std::max(gap, r.u_plus[i] - r.u_minus[i]);
        worst = std::max(worst, gap);
        o.detail << k.name << " max(u+ - u-)=" << f(gap) << "; ";
    }
    const TorusGrid g(1, 256);
    const double eps = default_mask_eps(g, with_dt(0.005));
    const GridFunction zero(g);
    const Mask full = coincidence_set(zero, zero, eps);
    const Mask inner = coincidence_set(zero, example_u1(g), eps);
    const bool included = inner.subset_of(full.dilated(1));
    o.detail << "coincidence(u1) " << inner.count() << " nodes inside coincidence(0) " << full.count() << " nodes. ";
    o.require(worst <= 5e-2, "ordering");
    o.require(full.count() == g.size() && included, "inclusion");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"backward solution of the flat model", criterion_1},
        {"forward solutions and separation", criterion_2},
        {"duality of the decreasing step", criterion_3},
        {"dynamic programming vs path enumeration", criterion_4},
        {"semigroup order and Lipschitz properties", criterion_5},
        {"action round trip", criterion_6},
        {"long-time dichotomy", criterion_7},
        {"representation from a coincidence node", criterion_8},
        {"characteristic flow identities", criterion_9},
        {"ordering and coincidence inclusion", criterion_10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "] ";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("criterion %2zu %s  %s: %s(%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
