#pragma once

/**
 * @file cli.hpp
 * @brief Config-driven command-line front end.
 *
 * Subcommands: check, solve, evolve, action, classify, represent, flow, oracle.
 * Exit codes: 0 ok, 1 I/O or configuration error, 2 condition failure, 3 non-convergence.
 */

#include <wkam/errors.hpp>
#include <wkam/flow.hpp>
#include <wkam/grid.hpp>
#include <wkam/io.hpp>
#include <wkam/model.hpp>
#include <wkam/oracle.hpp>
#include <wkam/reference.hpp>
#include <wkam/semigroup.hpp>
#include <wkam/weakkam.hpp>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace wkam::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kIoError = 1, kConditionFailure = 2, kNoConvergence = 3 };

/// Initial data: zero | constant | random | u1 | u_minus | file, plus an optional bump at one node.
struct InitialSpec {
    std::string source = "zero";
    double value = 0.0;
    std::string file;
    double bump = 0.0;
    double bump_at = 0.0;  // coordinate of the bumped node (first axis; second axis 0)
};

struct RunConfig {
    std::string model = "builtin";
    int dimension = 1;
    int nodes = 256;
    SemiConfig semi;
    SolverConfig solver;
    InitialSpec initial;
    struct {
        double t = 1.0;
        std::string direction = "backward";
        long stride = 0;
    } evolve;
    struct {
        double x0 = 0.0;
        double y0 = 0.0;
        double u0 = 0.0;
        double t = 0.05;
        std::string kind = "forward";  // forward: h_{x0,u0}; backward: h^{x0,u0}
    } action;
    LongtimeOptions classify;
    struct {
        double t_rep = 20.0;
        std::string v_plus = "u1";  // u1 | u_plus | file
        std::string file;
        std::string mask = "nodes";  // nodes | coincidence
        std::vector<double> mask_nodes{0.0};
        double mask_eps = 0.0;
    } represent;
    struct {
        std::vector<double> x0{0.25};
        double t = 20.0;
        double h_ode = 1e-3;
        std::string function = "u1";  // zero | u1 | u_minus | u_plus | file
        std::string file;
        std::string direction = "forward";
        double kappa = 0.1;
        double mask_eps = 1e-3;
    } flow;
    struct {
        int nodes = 8;
        int steps = 2;
        int cases = 50;
        double dt = 0.1;
        double potential = 0.3;  // amplitude bound of a random cos(2 pi x) term
    } oracle;
    int check_samples = 200;
    std::string out = "out";
    std::uint64_t seed = 1;
    fs::path base_dir = ".";
};

inline const char* kDefaultConfig = R"(# wkam run configuration. Every key is optional; the values below are the defaults.

[model]
# builtin = H(x,u,p) = u + |p|^2/2 on the circle; otherwise a model file path relative to this file
file = builtin

[grid]
dimension = 1
nodes = 256

[semigroup]
dt = 0.005
tol_fp = 1e-12
max_fp = 200
# search radius in cells, 0 = global
radius = 0

[solver]
# convergence when the one-step residual is below tol_conv * dt
tol_conv = 1e-6
t_max = 200
polish = true

[initial]
# zero | constant | random | u1 | u_minus | file
source = zero
value = 0
file =
bump = 0
bump_at = 0

[evolve]
t = 1
# backward | forward | mirror
direction = backward
stride = 0

[action]
x0 = 0
y0 = 0
u0 = 0
t = 0.05
# forward = h_{x0,u0} (backward evolution), backward = h^{x0,u0} (mirror evolution)
kind = forward

[classify]
t_max = 50
k_div = 1e6
delta = 1
# negative = 5 (dx + dt)
touch_eps = -1
# forward | mirror
scheme = mirror

[represent]
t_rep = 20
# u1 | u_plus | file
v_plus = u1
file =
# nodes | coincidence
mask = nodes
mask_nodes = 0
# 0 = 10 (dx + dt)
mask_eps = 0

[flow]
x0 = 0.25
t = 20
h_ode = 1e-3
# zero | u1 | u_minus | u_plus | file
function = u1
file =
# forward | backward
direction = forward
kappa = 0.1
# orbits are scored against {|u - u_minus| < mask_eps}
mask_eps = 1e-3

[oracle]
nodes = 8
steps = 2
cases = 50
dt = 0.1
potential = 0.3

[check]
samples = 200

[output]
dir = out
seed = 1
)";

namespace detail {

using boost::property_tree::ptree;

inline double num(const ptree& pt, const std::string& key, double def) {
    const auto s = pt.get_optional<std::string>(key);
    if (!s || s->empty()) return def;
    return io::parse_double(*s, key);
}

inline long integer(const ptree& pt, const std::string& key, long def) {
    const double v = num(pt, key, double(def));
    if (v != std::floor(v)) throw ConfigError(key + " must be an integer");
    return long(v);
}

inline std::string str(const ptree& pt, const std::string& key, const std::string& def) {
    return pt.get<std::string>(key, def);
}

inline bool boolean(const ptree& pt, const std::string& key, bool def) {
    const std::string s = str(pt, key, def ? "true" : "false");
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + " must be true or false");
}

inline std::vector<double> list(const ptree& pt, const std::string& key, const std::vector<double>& def) {
    const auto s = pt.get_optional<std::string>(key);
    if (!s) return def;
    std::vector<double> out;
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(io::parse_double(item, key));
    }
    return out;
}

inline void one_of(const std::string& v, std::initializer_list<const char*> allowed, const std::string& key) {
    for (const char* a : allowed)
        if (v == a) return;
    throw ConfigError("unsupported value '" + v + "' for " + key);
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    using namespace detail;
    RunConfig c;
    c.base_dir = base_dir;
    c.model = str(pt, "model.file", c.model);
    c.dimension = int(integer(pt, "grid.dimension", c.dimension));
    c.nodes = int(integer(pt, "grid.nodes", c.nodes));
    c.semi.dt = num(pt, "semigroup.dt", c.semi.dt);
    c.semi.tol_fp = num(pt, "semigroup.tol_fp", c.semi.tol_fp);
    c.semi.max_fp = int(integer(pt, "semigroup.max_fp", c.semi.max_fp));
    c.semi.radius = int(integer(pt, "semigroup.radius", c.semi.radius));
    c.solver.tol_conv = num(pt, "solver.tol_conv", c.solver.tol_conv);
    c.solver.t_max = num(pt, "solver.t_max", c.solver.t_max);
    c.solver.polish = boolean(pt, "solver.polish", c.solver.polish);
    c.initial.source = str(pt, "initial.source", c.initial.source);
    one_of(c.initial.source, {"zero", "constant", "random", "u1", "u_minus", "file"}, "initial.source");
    c.initial.value = num(pt, "initial.value", c.initial.value);
    c.initial.file = str(pt, "initial.file", c.initial.file);
    c.initial.bump = num(pt, "initial.bump", c.initial.bump);
    c.initial.bump_at = num(pt, "initial.bump_at", c.initial.bump_at);
    c.evolve.t = num(pt, "evolve.t", c.evolve.t);
    c.evolve.direction = str(pt, "evolve.direction", c.evolve.direction);
    one_of(c.evolve.direction, {"backward", "forward", "mirror"}, "evolve.direction");
    c.evolve.stride = integer(pt, "evolve.stride", c.evolve.stride);
    c.action.x0 = num(pt, "action.x0", c.action.x0);
    c.action.y0 = num(pt, "action.y0", c.action.y0);
    c.action.u0 = num(pt, "action.u0", c.action.u0);
    c.action.t = num(pt, "action.t", c.action.t);
    c.action.kind = str(pt, "action.kind", c.action.kind);
    one_of(c.action.kind, {"forward", "backward"}, "action.kind");
    c.classify.t_max = num(pt, "classify.t_max", c.classify.t_max);
    c.classify.k_div = num(pt, "classify.k_div", c.classify.k_div);
    c.classify.delta = num(pt, "classify.delta", c.classify.delta);
    c.classify.touch_eps = num(pt, "classify.touch_eps", c.classify.touch_eps);
    const std::string scheme = str(pt, "classify.scheme", "mirror");
    one_of(scheme, {"forward", "mirror"}, "classify.scheme");
    c.classify.scheme = scheme == "forward" ? Direction::forward : Direction::mirror;
    c.represent.t_rep = num(pt, "represent.t_rep", c.represent.t_rep);
    c.represent.v_plus = str(pt, "represent.v_plus", c.represent.v_plus);
    one_of(c.represent.v_plus, {"u1", "u_plus", "file"}, "represent.v_plus");
    c.represent.file = str(pt, "represent.file", c.represent.file);
    c.represent.mask = str(pt, "represent.mask", c.represent.mask);
    one_of(c.represent.mask, {"nodes", "coincidence"}, "represent.mask");
    c.represent.mask_nodes = list(pt, "represent.mask_nodes", c.represent.mask_nodes);
    c.represent.mask_eps = num(pt, "represent.mask_eps", c.represent.mask_eps);
    c.flow.x0 = list(pt, "flow.x0", c.flow.x0);
    c.flow.t = num(pt, "flow.t", c.flow.t);
    c.flow.h_ode = num(pt, "flow.h_ode", c.flow.h_ode);
    c.flow.function = str(pt, "flow.function", c.flow.function);
    one_of(c.flow.function, {"zero", "u1", "u_minus", "u_plus", "file"}, "flow.function");
    c.flow.file = str(pt, "flow.file", c.flow.file);
    c.flow.direction = str(pt, "flow.direction", c.flow.direction);
    one_of(c.flow.direction, {"forward", "backward"}, "flow.direction");
    c.flow.kappa = num(pt, "flow.kappa", c.flow.kappa);
    c.flow.mask_eps = num(pt, "flow.mask_eps", c.flow.mask_eps);
    c.oracle.nodes = int(integer(pt, "oracle.nodes", c.oracle.nodes));
    c.oracle.steps = int(integer(pt, "oracle.steps", c.oracle.steps));
    c.oracle.cases = int(integer(pt, "oracle.cases", c.oracle.cases));
    c.oracle.dt = num(pt, "oracle.dt", c.oracle.dt);
    c.oracle.potential = num(pt, "oracle.potential", c.oracle.potential);
    c.check_samples = int(integer(pt, "check.samples", c.check_samples));
    c.out = str(pt, "output.dir", c.out);
    c.seed = std::uint64_t(integer(pt, "output.seed", long(c.seed)));
    return c;
}

inline fs::path resolve(const RunConfig& c, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : c.base_dir / path;
}

inline ContactModel load_model(const RunConfig& c) {
    if (c.model == "builtin") return example_model();
    const fs::path p = resolve(c, c.model);
    if (!fs::exists(p)) throw Error("model file not found: " + p.string());
    return io::read_model(p);
}

/// Run context: config, model and grid, with the semigroup guards enforced at load.
struct Context {
    RunConfig cfg;
    ContactModel model;
    TorusGrid grid;
    fs::path out;
    bool quiet = false;

    std::ostream& log() const {
        static std::ostream discard(nullptr);
        return quiet ? discard : std::cout;
    }
};

inline Context make_context(const RunConfig& c, bool quiet) {
    ContactModel m = load_model(c);
    if (m.dimension != c.dimension) throw ConfigError("grid dimension differs from model dimension");
    TorusGrid g(c.dimension, c.nodes);
    validate(c.semi, m);
    if (!(c.solver.tol_conv > 0) || !(c.solver.t_max > 0)) throw ConfigError("solver tolerances must be positive");
    return {c, m, g, fs::path(c.out), quiet};
}

inline GridFunction load_function_file(const Context& ctx, const std::string& file) {
    if (file.empty()) throw ConfigError("a file source needs a file name");
    const fs::path p = resolve(ctx.cfg, file);
    if (!fs::exists(p)) throw Error("grid function file not found: " + p.string());
    GridFunction f = io::read_grid_function(p);
    require_same_grid(f.grid(), ctx.grid);
    return f;
}

inline SolveOutcome solve_minus_from_random(const Context& ctx) {
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const GridFunction phi0 = GridFunction::sample(ctx.grid, [&](const Coords&) { return unit(rng); });
    return solve_u_minus(ctx.model, phi0, ctx.cfg.semi, ctx.cfg.solver);
}

/// `u_minus`, when given, is used for the u_minus source instead of solving again.
inline GridFunction initial_data(const Context& ctx, const GridFunction* u_minus = nullptr) {
    const auto& s = ctx.cfg.initial;
    GridFunction f(ctx.grid);
    if (s.source == "constant") {
        f = GridFunction(ctx.grid, s.value);
    } else if (s.source == "random") {
        std::mt19937_64 rng(ctx.cfg.seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        f = GridFunction::sample(ctx.grid, [&](const Coords&) { return unit(rng); });
    } else if (s.source == "u1") {
        if (ctx.grid.dimension() != 1) throw ConfigError("u1 is defined on the circle only");
        f = example_u1(ctx.grid);
    } else if (s.source == "u_minus") {
        f = u_minus ? *u_minus : solve_minus_from_random(ctx).u;
    } else if (s.source == "file") {
        f = load_function_file(ctx, s.file);
    }
    if (s.bump != 0.0) f[ctx.grid.nearest({s.bump_at, 0.0})] += s.bump;
    return f;
}

inline int cmd_check(const Context& ctx) {
    const auto r = check_conditions(ctx.model, ctx.cfg.check_samples, ctx.cfg.seed);
    std::ostringstream out;
    for (const auto* c : {&r.convexity, &r.superlinearity, &r.increasing, &r.decreasing})
        out << (c->passed ? "pass  " : "FAIL  ") << c->name << ": " << c->detail << "\n";
    out << "model sign: " << to_string(r.sign) << "\n";
    out << (r.passed() ? "conditions hold\n" : "conditions violated\n");
    io::write_atomic(ctx.out / "conditions.txt", out.str());
    ctx.log() << out.str();
    return r.passed() ? kOk : kConditionFailure;
}

inline int cmd_solve(const Context& ctx) {
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const GridFunction phi0 = GridFunction::sample(ctx.grid, [&](const Coords&) { return unit(rng); });
    const auto r = solve_weak_kam(ctx.model, phi0, ctx.cfg.semi, ctx.cfg.solver);
    io::write_grid_function(ctx.out / "u_minus.csv", r.u_minus);
    io::write_grid_function(ctx.out / "u_plus.csv", r.u_plus);
    io::write_mask(ctx.out / "aubry_mask.csv", r.aubry_mask);
    double order = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.u_plus.size(); ++i) order = std::max(order, r.u_plus[i] - r.u_minus[i]);
    const io::Summary s{{"residual_minus", io::fmt(r.residual_minus)},
                        {"residual_plus", io::fmt(r.residual_plus)},
                        {"time_minus", io::fmt(r.time_minus)},
                        {"time_plus", io::fmt(r.time_plus)},
                        {"sup_u_minus", io::fmt(sup_norm(r.u_minus))},
                        {"sup_u_plus", io::fmt(sup_norm(r.u_plus))},
                        {"max_u_plus_minus_u_minus", io::fmt(order)},
                        {"sup_bound", io::fmt(r.sup_bound)},
                        {"lip_bound", io::fmt(r.lip_bound)},
                        {"mask_eps", io::fmt(r.mask_eps)},
                        {"aubry_count", std::to_string(r.aubry_mask.count())}};
    io::write_summary(ctx.out / "summary.txt", s);
    ctx.log() << io::format_summary(s);
    const double tol = 10.0 * ctx.cfg.solver.tol_conv * ctx.cfg.semi.dt;
    return r.residual_minus <= tol && r.residual_plus <= tol ? kOk : kNoConvergence;
}

inline int cmd_evolve(const Context& ctx) {
    const auto& e = ctx.cfg.evolve;
    const Direction d = e.direction == "backward" ? Direction::backward
                        : e.direction == "forward" ? Direction::forward
                                                   : Direction::mirror;
    const auto rec = evolve(initial_data(ctx), ctx.model, ctx.cfg.semi, e.t, d, e.stride);
    io::write_evolve_record(ctx.out, rec);
    ctx.log() << "snapshots " << rec.snapshots.size() << ", final sup-norm " << io::fmt(rec.sup_norms.back())
              << "\n";
    return kOk;
}

inline int cmd_action(const Context& ctx) {
    const auto& a = ctx.cfg.action;
    const std::size_t x0 = ctx.grid.nearest({a.x0, a.y0});
    const GridFunction h = a.kind == "forward" ? action_forward(ctx.grid, x0, a.u0, ctx.model, ctx.cfg.semi, a.t)
                                               : action_backward(ctx.grid, x0, a.u0, ctx.model, ctx.cfg.semi, a.t);
    io::write_grid_function(ctx.out / "action.csv", h);
    const io::Summary s{{"kind", a.kind},
                        {"x0_node", std::to_string(x0)},
                        {"u0", io::fmt(a.u0)},
                        {"t", io::fmt(a.t)},
                        {"value_at_x0", io::fmt(h[x0])},
                        {"min", io::fmt(*std::min_element(h.values().begin(), h.values().end()))},
                        {"max", io::fmt(*std::max_element(h.values().begin(), h.values().end()))}};
    io::write_summary(ctx.out / "summary.txt", s);
    ctx.log() << io::format_summary(s);
    return kOk;
}

inline int cmd_classify(const Context& ctx) {
    const GridFunction u_minus = solve_minus_from_random(ctx).u;
    const GridFunction phi = initial_data(ctx, &u_minus);
    const auto v = verify_longtime(phi, u_minus, ctx.model, ctx.cfg.semi, ctx.cfg.classify);
    const io::Summary s{{"prediction", std::string(to_string(v.prediction))},
                        {"empirical", std::string(to_string(v.empirical))},
                        {"max_abs_seen", io::fmt(v.max_abs_seen)},
                        {"time_horizon", io::fmt(v.time_horizon)},
                        {"exit_time", io::fmt(v.exit_time)},
                        {"k_delta", io::fmt(v.k_delta)},
                        {"kappa_delta", io::fmt(v.kappa_delta)},
                        {"scheme", std::string(to_string(ctx.cfg.classify.scheme))}};
    io::write_summary(ctx.out / "verdict.txt", s);
    ctx.log() << io::format_summary(s);
    return v.agrees() || v.prediction == Verdict::Indeterminate ? kOk : kConditionFailure;
}

inline int cmd_represent(const Context& ctx) {
    const auto& r = ctx.cfg.represent;
    std::optional<GridFunction> u_minus;
    auto minus = [&]() -> const GridFunction& {
        if (!u_minus) u_minus = solve_minus_from_random(ctx).u;
        return *u_minus;
    };
    GridFunction v_plus(ctx.grid);
    if (r.v_plus == "u1") {
        if (ctx.grid.dimension() != 1) throw ConfigError("u1 is defined on the circle only");
        v_plus = example_u1(ctx.grid);
    } else if (r.v_plus == "u_plus") {
        v_plus = solve_u_plus(ctx.model, minus(), ctx.cfg.semi, ctx.cfg.solver).u;
    } else {
        v_plus = load_function_file(ctx, r.file);
    }
    Mask mask(ctx.grid);
    if (r.mask == "nodes") {
        for (double x : r.mask_nodes) mask.set(ctx.grid.nearest({x, 0.0}));
    } else {
        const double eps = r.mask_eps > 0 ? r.mask_eps : default_mask_eps(ctx.grid, ctx.cfg.semi);
        mask = coincidence_set(minus(), v_plus, eps);
    }
    const GridFunction rec = represent(v_plus, mask, ctx.model, ctx.cfg.semi, r.t_rep);
    io::write_grid_function(ctx.out / "reconstruction.csv", rec);
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.size(); ++i) excess = std::max(excess, rec[i] - v_plus[i]);
    const io::Summary s{{"mask_count", std::to_string(mask.count())},
                        {"t_rep", io::fmt(r.t_rep)},
                        {"max_error", io::fmt(sup_diff(rec, v_plus))},
                        {"max_excess", io::fmt(excess)}};
    io::write_summary(ctx.out / "summary.txt", s);
    ctx.log() << io::format_summary(s);
    return kOk;
}

inline int cmd_flow(const Context& ctx) {
    const auto& f = ctx.cfg.flow;
    std::optional<SolveOutcome> minus;
    auto get_minus = [&]() -> const GridFunction& {
        if (!minus) minus = solve_minus_from_random(ctx);
        return minus->u;
    };
    GridFunction u(ctx.grid);
    if (f.function == "u1") {
        if (ctx.grid.dimension() != 1) throw ConfigError("u1 is defined on the circle only");
        u = example_u1(ctx.grid);
    } else if (f.function == "u_minus") {
        u = get_minus();
    } else if (f.function == "u_plus") {
        u = solve_u_plus(ctx.model, get_minus(), ctx.cfg.semi, ctx.cfg.solver).u;
    } else if (f.function == "file") {
        u = load_function_file(ctx, f.file);
    }
    // Orbits are scored against the coincidence set of u with u_minus.
    const Mask mask = coincidence_set(f.function == "u_minus" ? u : get_minus(), u, f.mask_eps);
    io::Summary s;
    for (std::size_t k = 0; k < f.x0.size(); ++k) {
        const std::size_t node = ctx.grid.nearest({f.x0[k], 0.0});
        const OrbitRecord rec = f.direction == "forward"
                                    ? forward_orbit_to_omega(u, node, ctx.model, f.t, mask, f.h_ode, f.kappa)
                                    : calibrated_backward_orbit(u, node, ctx.model, f.t, mask, f.h_ode, f.kappa);
        io::write_orbit(ctx.out / ("orbit_" + std::to_string(k) + ".csv"), rec, ctx.grid.dimension());
        const std::string tag = "orbit_" + std::to_string(k) + ".";
        s.emplace_back(tag + "x0", io::fmt(ctx.grid.coords(node)[0]));
        s.emplace_back(tag + "sup_abs_H", io::fmt(rec.summary.sup_abs_H));
        s.emplace_back(tag + "window_mean_x", io::fmt(rec.summary.window_mean[0]));
        s.emplace_back(tag + "window_distance", io::fmt(rec.summary.window_distance));
        s.emplace_back(tag + "max_graph_gap", io::fmt(rec.summary.max_graph_gap));
    }
    io::write_summary(ctx.out / "summary.txt", s);
    ctx.log() << io::format_summary(s);
    return kOk;
}

inline int cmd_oracle(const RunConfig& c, bool quiet) {
    const auto& o = c.oracle;
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const TorusGrid g(1, o.nodes);
    double worst_fwd = 0.0, worst_bwd = 0.0;
    for (int k = 0; k < o.cases; ++k) {
        ContactModel m{1, 1.0, Monotonicity::increasing, {{0, 1, o.potential * unit(rng)}}};
        SemiConfig semi;
        semi.dt = o.dt;
        const std::size_t x0 = std::size_t(rng() % std::uint64_t(o.nodes));
        const double u0 = unit(rng);
        const oracle::PathEnumSpec spec{g, o.steps, o.dt, m, x0, u0};
        const double t = o.steps * o.dt;
        worst_fwd = std::max(worst_fwd, sup_diff(oracle::enumerate_action_forward(spec),
                                                 action_forward(g, x0, u0, m, semi, t)));
        worst_bwd = std::max(worst_bwd, sup_diff(oracle::enumerate_action_backward(spec),
                                                 action_backward(g, x0, u0, m, semi, t)));
    }
    const bool ok = worst_fwd <= 1e-9 && worst_bwd <= 1e-9;
    const io::Summary s{{"nodes", std::to_string(o.nodes)},
                        {"steps", std::to_string(o.steps)},
                        {"cases", std::to_string(o.cases)},
                        {"max_diff_forward_action", io::fmt(worst_fwd)},
                        {"max_diff_backward_action", io::fmt(worst_bwd)},
                        {"agreement", ok ? "yes" : "no"}};
    io::write_summary(fs::path(c.out) / "oracle_report.txt", s);
    if (!quiet) std::cout << io::format_summary(s);
    return ok ? kOk : kConditionFailure;
}

/// Parses argv and dispatches. Errors are reported on stderr and mapped to exit codes.
inline int run(int argc, char** argv) {
    CLI::App app{"Weak KAM toolkit for contact Hamilton-Jacobi equations on the flat torus"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false, print_defaults = false;
    app.add_option("--config", config_path, "run configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed");
    app.add_flag("--quiet", quiet, "suppress the report on stdout");
    const std::vector<std::string> names{"check", "solve", "evolve", "action", "classify", "represent", "flow", "oracle"};
    for (const auto& n : names) {
        auto* sub = app.add_subcommand(n);
        sub->fallthrough();
        if (n == "check") sub->add_flag("--print-defaults", print_defaults, "print the default configuration");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kIoError;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (print_defaults) {
        std::cout << kDefaultConfig;
        return kOk;
    }
    try {
        RunConfig c = config_path.empty()
                          ? RunConfig{}
                          : parse_run_config(io::read_file(config_path), fs::path(config_path).parent_path());
        if (!out_dir.empty()) c.out = out_dir;
        if (seed) c.seed = *seed;
        if (cmd == "oracle") return cmd_oracle(c, quiet);
        const Context ctx = make_context(c, quiet);
        if (cmd == "check") return cmd_check(ctx);
        if (cmd == "solve") return cmd_solve(ctx);
        if (cmd == "evolve") return cmd_evolve(ctx);
        if (cmd == "action") return cmd_action(ctx);
        if (cmd == "classify") return cmd_classify(ctx);
        if (cmd == "represent") return cmd_represent(ctx);
        if (cmd == "flow") return cmd_flow(ctx);
    } catch (const NoConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNoConvergence;
    } catch (const NonContraction& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
    return kIoError;
}

}  // namespace wkam::cli
