#pragma once

#include <wkam/errors.hpp>
#include <wkam/model.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <span>
#include <vector>

namespace wkam {

/// Unreachable-value sentinel. |v| >= kInf / 2 is treated as "no value" in min/max reductions.
inline constexpr double kInf = 1e18;

inline bool is_sentinel(double v) { return !(std::abs(v) < kInf / 2); }

/// Componentwise b - a wrapped into [-1/2, 1/2)^d: the shortest displacement on the flat torus.
inline Coords min_displacement(const Coords& a, const Coords& b, int dimension = 2) {
    Coords d{};
    for (int i = 0; i < dimension; ++i) {
        const double w = b[i] - a[i];
        d[i] = w - std::floor(w + 0.5);
    }
    return d;
}

inline double torus_distance(const Coords& a, const Coords& b, int dimension = 2) {
    const Coords d = min_displacement(a, b, dimension);
    return std::sqrt(dot(d, d));
}

/// Uniform periodic grid with N nodes per axis on [0,1)^d. The spacing is derived, never stored.
class TorusGrid {
public:
    TorusGrid(int dimension, int nodes_per_axis) : dim_(dimension), n_(nodes_per_axis) {
        if (dim_ != 1 && dim_ != 2) throw ConfigError("grid dimension must be 1 or 2");
        if (n_ < 4) throw ConfigError("grid needs at least 4 nodes per axis");
    }

    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] int nodes_per_axis() const { return n_; }
    [[nodiscard]] double spacing() const { return 1.0 / n_; }
    [[nodiscard]] std::size_t size() const {
        return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * std::size_t(n_);
    }

    /// Row-major flattening: the last axis varies fastest.
    [[nodiscard]] std::size_t index(int i0, int i1 = 0) const {
        return dim_ == 1 ? std::size_t(i0) : std::size_t(i0) * n_ + std::size_t(i1);
    }
    [[nodiscard]] std::array<int, 2> multi_index(std::size_t idx) const {
        if (dim_ == 1) return {int(idx), 0};
        return {int(idx / n_), int(idx % n_)};
    }
    [[nodiscard]] Coords coords(std::size_t idx) const {
        const auto mi = multi_index(idx);
        Coords c{};
        for (int a = 0; a < dim_; ++a) c[a] = double(mi[a]) / n_;
        return c;
    }
    /// Node closest to x (ties resolved upwards).
    [[nodiscard]] std::size_t nearest(const Coords& x) const {
        const Coords w = wrap(x);
        std::array<int, 2> mi{};
        for (int a = 0; a < dim_; ++a) mi[a] = int(std::floor(w[a] * n_ + 0.5)) % n_;
        return index(mi[0], mi[1]);
    }
    /// Neighbour of idx shifted by `offset` cells along `axis`, periodically.
    [[nodiscard]] std::size_t shifted(std::size_t idx, int axis, int offset) const {
        auto mi = multi_index(idx);
        mi[axis] = ((mi[axis] + offset) % n_ + n_) % n_;
        return index(mi[0], mi[1]);
    }

    bool operator==(const TorusGrid&) const = default;

private:
    int dim_;
    int n_;
};

/// Nodal values on a TorusGrid. Value type; operations return fresh instances.
class GridFunction {
public:
    GridFunction(TorusGrid grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}
    GridFunction(TorusGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) throw GridMismatch("value count does not match grid size");
    }

    template <class F>
    static GridFunction sample(TorusGrid grid, F&& f) {
        GridFunction g(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) g.values_[i] = f(grid.coords(i));
        return g;
    }

    [[nodiscard]] const TorusGrid& grid() const { return grid_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> values() { return values_; }

    [[nodiscard]] bool all_finite() const {
        return std::none_of(values_.begin(), values_.end(), [](double v) { return is_sentinel(v); });
    }

    bool operator==(const GridFunction&) const = default;

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

/// Boolean grid function.
class Mask {
public:
    explicit Mask(TorusGrid grid, bool fill = false) : grid_(grid), flags_(grid.size(), fill ? 1 : 0) {}

    [[nodiscard]] const TorusGrid& grid() const { return grid_; }
    [[nodiscard]] std::size_t size() const { return flags_.size(); }
    [[nodiscard]] bool operator[](std::size_t i) const { return flags_[i] != 0; }
    void set(std::size_t i, bool v = true) { flags_[i] = v ? 1 : 0; }

    [[nodiscard]] std::size_t count() const {
        return std::size_t(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
    }
    [[nodiscard]] bool any() const { return count() > 0; }

    /// Adds every node within `cells` grid steps (per axis) of a flagged node.
    [[nodiscard]] Mask dilated(int cells) const {
        Mask out(grid_);
        const int d = grid_.dimension();
        for (std::size_t i = 0; i < size(); ++i) {
            if (!flags_[i]) continue;
            for (int a = -cells; a <= cells; ++a) {
                const std::size_t ia = grid_.shifted(i, 0, a);
                if (d == 1) {
                    out.set(ia);
                    continue;
                }
                for (int b = -cells; b <= cells; ++b) out.set(grid_.shifted(ia, 1, b));
            }
        }
        return out;
    }

    [[nodiscard]] bool subset_of(const Mask& other) const {
        if (!(grid_ == other.grid_)) throw GridMismatch("masks on different grids");
        for (std::size_t i = 0; i < size(); ++i)
            if (flags_[i] && !other.flags_[i]) return false;
        return true;
    }

    bool operator==(const Mask&) const = default;

private:
    TorusGrid grid_;
    std::vector<std::uint8_t> flags_;
};

/// Vector-valued grid function (used for gradients).
struct VectorField {
    TorusGrid grid;
    std::vector<Coords> values;
};

inline void require_finite(const GridFunction& f, const char* what) {
    if (!f.all_finite()) throw SentinelValue(std::string(what) + ": sentinel value present");
}

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
    if (!(a == b)) throw GridMismatch("grid functions live on different grids");
}

/// Periodic central differences.
inline VectorField gradient_central(const GridFunction& f) {
    require_finite(f, "gradient_central");
    const auto& g = f.grid();
    const double inv = 1.0 / (2.0 * g.spacing());
    VectorField out{g, std::vector<Coords>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int a = 0; a < g.dimension(); ++a)
            out.values[i][a] = (f[g.shifted(i, a, 1)] - f[g.shifted(i, a, -1)]) * inv;
    return out;
}

/// Flags nodes where forward and backward difference quotients differ by more than kappa on some
/// axis. A slope jump s is flagged once s > kappa; a C^2 function is flagged only if
/// max|f''| * dx > kappa.
inline Mask kink_mask(const GridFunction& f, double kappa) {
    require_finite(f, "kink_mask");
    const auto& g = f.grid();
    const double inv = 1.0 / g.spacing();
    Mask out(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int a = 0; a < g.dimension(); ++a) {
            const double fwd = (f[g.shifted(i, a, 1)] - f[i]) * inv;
            const double bwd = (f[i] - f[g.shifted(i, a, -1)]) * inv;
            if (std::abs(fwd - bwd) > kappa) out.set(i);
        }
    }
    return out;
}

inline double sup_diff(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f.grid(), g.grid());
    require_finite(f, "sup_diff");
    require_finite(g, "sup_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
    return m;
}

inline double sup_norm(const GridFunction& f) {
    require_finite(f, "sup_norm");
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

/// Largest difference quotient between axis neighbours.
inline double lipschitz_constant(const GridFunction& f) {
    require_finite(f, "lipschitz_constant");
    const auto& g = f.grid();
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int a = 0; a < g.dimension(); ++a)
            m = std::max(m, std::abs(f[g.shifted(i, a, 1)] - f[i]));
    return m / g.spacing();
}

/// Periodic (bi)linear interpolation at an arbitrary point.
inline double interpolate(const GridFunction& f, const Coords& x) {
    require_finite(f, "interpolate");
    const auto& g = f.grid();
    const int n = g.nodes_per_axis();
    const Coords w = wrap(x);
    std::array<int, 2> lo{};
    std::array<double, 2> frac{};
    for (int a = 0; a < g.dimension(); ++a) {
        const double s = w[a] * n;
        lo[a] = int(std::floor(s)) % n;
        frac[a] = s - std::floor(s);
    }
    if (g.dimension() == 1) {
        const double v0 = f[g.index(lo[0])];
        const double v1 = f[g.index((lo[0] + 1) % n)];
        return (1 - frac[0]) * v0 + frac[0] * v1;
    }
    const int i1 = (lo[0] + 1) % n, j1 = (lo[1] + 1) % n;
    const double v00 = f[g.index(lo[0], lo[1])], v01 = f[g.index(lo[0], j1)];
    const double v10 = f[g.index(i1, lo[1])], v11 = f[g.index(i1, j1)];
    return (1 - frac[0]) * ((1 - frac[1]) * v00 + frac[1] * v01) +
           frac[0] * ((1 - frac[1]) * v10 + frac[1] * v11);
}

/// Torus distance from x to the nearest flagged node; +inf for an empty mask.
inline double distance_to_mask(const Mask& mask, const Coords& x) {
    const auto& g = mask.grid();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mask[i]) best = std::min(best, torus_distance(g.coords(i), x, g.dimension()));
    return best;
}

}  // namespace wkam
