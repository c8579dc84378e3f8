#pragma once

/**
 * @file io.hpp
 * @brief Model files, grid-function CSV, orbit CSV and key/value summaries.
 *
 * Model file (INI-style key/value):
 *
 *   dimension = 2
 *   lambda = 1.0
 *   sign = increasing
 *   potential_coeffs = (0, 0.5) (1, 1.0) | (1, 0.3)
 *
 * Each axis contributes a list of (k, c) pairs meaning c cos(2 pi k x_axis); `|` separates axes.
 * Every file is written to a temporary sibling and renamed into place.
 */

#include <wkam/errors.hpp>
#include <wkam/flow.hpp>
#include <wkam/grid.hpp>
#include <wkam/model.hpp>
#include <wkam/semigroup.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace wkam::io {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form.
inline std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Writes `content` to `path` via a temporary file and rename.
inline void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline double parse_double(const std::string& s, const std::string& what) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    if (b < e && *b == '+') ++b;
    double v = 0.0;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) throw ConfigError("bad number for " + what + ": '" + s + "'");
    return v;
}

inline std::vector<CosineTerm> parse_potential(const std::string& text, int dimension) {
    std::vector<CosineTerm> terms;
    std::vector<std::string> groups;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '|')) groups.push_back(part);
    if (groups.empty()) return terms;
    if (int(groups.size()) > dimension) throw ConfigError("potential_coeffs lists more axes than the dimension");
    static const std::regex pair_re(R"(\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\))");
    static const std::regex leftover_re(R"([^\s])");
    for (int axis = 0; axis < int(groups.size()); ++axis) {
        const std::string& g = groups[std::size_t(axis)];
        for (auto it = std::sregex_iterator(g.begin(), g.end(), pair_re); it != std::sregex_iterator(); ++it) {
            const double k = parse_double((*it)[1].str(), "frequency");
            if (k < 0 || k != std::floor(k)) throw ConfigError("potential frequency must be a non-negative integer");
            terms.push_back({axis, int(k), parse_double((*it)[2].str(), "coefficient")});
        }
        if (std::regex_search(std::regex_replace(g, pair_re, ""), leftover_re))
            throw ConfigError("unparsed text in potential_coeffs: '" + g + "'");
    }
    return terms;
}

inline ContactModel parse_model(const std::string& text) {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
    ContactModel m;
    m.dimension = int(parse_double(pt.get<std::string>("dimension", "1"), "dimension"));
    m.lambda = parse_double(pt.get<std::string>("lambda", "1"), "lambda");
    const std::string sign = pt.get<std::string>("sign", "increasing");
    if (sign == "increasing") m.sign = Monotonicity::increasing;
    else if (sign == "decreasing") m.sign = Monotonicity::decreasing;
    else throw ConfigError("sign must be increasing or decreasing");
    if (m.dimension != 1 && m.dimension != 2) throw ConfigError("model dimension must be 1 or 2");
    m.potential = parse_potential(pt.get<std::string>("potential_coeffs", ""), m.dimension);
    validate(m);
    return m;
}

inline ContactModel read_model(const fs::path& path) { return parse_model(read_file(path)); }

inline std::string format_model(const ContactModel& m) {
    std::string out = "dimension = " + std::to_string(m.dimension) + "\n";
    out += "lambda = " + fmt(m.lambda) + "\n";
    out += "sign = " + std::string(to_string(m.sign)) + "\n";
    out += "potential_coeffs =";
    for (int axis = 0; axis < m.dimension; ++axis) {
        if (axis > 0) out += " |";
        for (const auto& t : m.potential)
            if (t.axis == axis) out += " (" + std::to_string(t.k) + ", " + fmt(t.c) + ")";
    }
    return out + "\n";
}

inline std::string format_grid_function(const GridFunction& f) {
    const auto& g = f.grid();
    std::string out = g.dimension() == 1 ? "x,value\n" : "x,y,value\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Coords c = g.coords(i);
        out += fmt(c[0]);
        if (g.dimension() == 2) out += "," + fmt(c[1]);
        out += "," + fmt(f[i]) + "\n";
    }
    return out;
}

inline void write_grid_function(const fs::path& path, const GridFunction& f) {
    write_atomic(path, format_grid_function(f));
}

inline void write_mask(const fs::path& path, const Mask& mask) {
    GridFunction f(mask.grid());
    for (std::size_t i = 0; i < mask.size(); ++i) f[i] = mask[i] ? 1.0 : 0.0;
    write_atomic(path, format_grid_function(f));
}

/// Reads a CSV written by write_grid_function. N is inferred from the row count and the node
/// coordinates are checked against it.
inline GridFunction parse_grid_function(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("grid CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int dim = 0;
    if (line == "x,value") dim = 1;
    else if (line == "x,y,value") dim = 2;
    else throw ConfigError("grid CSV header must be 'x,value' or 'x,y,value'");
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 3> r{};
        std::stringstream ls(line);
        std::string cell;
        int col = 0;
        while (std::getline(ls, cell, ',')) {
            if (col > dim) throw ConfigError("too many columns in grid CSV");
            r[std::size_t(col++)] = parse_double(cell, "grid CSV cell");
        }
        if (col != dim + 1) throw ConfigError("too few columns in grid CSV");
        rows.push_back(r);
    }
    long n = long(rows.size());
    if (dim == 2) {
        n = std::lround(std::sqrt(double(rows.size())));
        if (std::size_t(n * n) != rows.size()) throw ConfigError("2-D grid CSV row count is not a square");
    }
    const TorusGrid g(dim, int(n));
    GridFunction f(g);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Coords c = g.coords(i);
        for (int a = 0; a < dim; ++a)
            if (std::abs(rows[i][std::size_t(a)] - c[a]) > 1e-9) throw GridMismatch("grid CSV coordinates out of order");
        f[i] = rows[i][std::size_t(dim)];
    }
    return f;
}

inline GridFunction read_grid_function(const fs::path& path) { return parse_grid_function(read_file(path)); }

using Summary = std::vector<std::pair<std::string, std::string>>;

inline std::string format_summary(const Summary& s) {
    std::string out;
    for (const auto& [k, v] : s) out += k + " = " + v + "\n";
    return out;
}

inline void write_summary(const fs::path& path, const Summary& s) { write_atomic(path, format_summary(s)); }

inline std::string format_orbit(const OrbitRecord& rec, int dim) {
    std::string out = dim == 1 ? "t,x,u,p,H\n" : "t,x,y,u,px,py,H\n";
    for (std::size_t i = 0; i < rec.states.size(); ++i) {
        const auto& s = rec.states[i];
        out += fmt(rec.times[i]) + "," + fmt(s.x[0]);
        if (dim == 2) out += "," + fmt(s.x[1]);
        out += "," + fmt(s.u) + "," + fmt(s.p[0]);
        if (dim == 2) out += "," + fmt(s.p[1]);
        out += "," + fmt(rec.H_values[i]) + "\n";
    }
    return out;
}

inline void write_orbit(const fs::path& path, const OrbitRecord& rec, int dim) {
    write_atomic(path, format_orbit(rec, dim));
}

/// One CSV per snapshot plus manifest.txt listing index, time, sup-norm and file name.
inline void write_evolve_record(const fs::path& dir, const EvolveRecord& rec) {
    std::string manifest = "index,time,sup_norm,file\n";
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%05zu.csv", i);
        write_grid_function(dir / name, rec.snapshots[i]);
        manifest += std::to_string(i) + "," + fmt(rec.times[i]) + "," + fmt(rec.sup_norms[i]) + "," + name + "\n";
    }
    write_atomic(dir / "manifest.txt", manifest);
}

}  // namespace wkam::io
