#pragma once
/// JSON and CSV serialization.  Payloads carry no timestamps, so identical
/// runs give identical files.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "profiles.hpp"
#include "solver.hpp"

namespace hlfp {

using json = nlohmann::ordered_json;

inline json to_json(const MeshParams& p) {
    return {{"x_max", p.x_max},
            {"x_min", p.x_min},
            {"order", p.order},
            {"panels_per_decade", p.panels_per_decade},
            {"core_panels_per_decade", p.core_panels_per_decade},
            {"core_lo", p.core_lo},
            {"core_hi", p.core_hi},
            {"refine", p.refine},
            {"min_points_per_decade", p.min_points_per_decade}};
}

inline MeshParams mesh_params_from_json(const json& j) {
    MeshParams p;
    p.x_max = j.value("x_max", p.x_max);
    p.x_min = j.value("x_min", p.x_min);
    p.order = j.value("order", p.order);
    p.panels_per_decade = j.value("panels_per_decade", p.panels_per_decade);
    p.core_panels_per_decade = j.value("core_panels_per_decade", p.core_panels_per_decade);
    p.core_lo = j.value("core_lo", p.core_lo);
    p.core_hi = j.value("core_hi", p.core_hi);
    p.refine = j.value("refine", p.refine);
    p.min_points_per_decade = j.value("min_points_per_decade", p.min_points_per_decade);
    return p;
}

inline json to_json(const GridFunction& g) {
    json t = {{"active", g.tail.active}, {"limit", g.tail.limit}, {"amp", g.tail.amp}, {"exponent", g.tail.exponent}};
    return {{"mesh", to_json(g.mesh->params())},
            {"scale", g.mesh->scale()},
            {"parity", g.parity == Parity::even ? "even" : "odd"},
            {"tail", t},
            {"x", g.mesh->x()},
            {"values", g.v}};
}

/// Rebuilds the mesh from its parameters and checks the abscissas match.
inline GridFunction grid_function_from_json(const json& j) {
    MeshPtr mesh = make_mesh(mesh_params_from_json(j.at("mesh")));
    const double scale = j.value("scale", 1.0);
    if (scale != 1.0) mesh = mesh->scaled(scale);
    GridFunction g;
    g.mesh = mesh;
    g.v = j.at("values").get<std::vector<double>>();
    if (static_cast<int>(g.v.size()) != mesh->size())
        throw std::runtime_error("stored values do not match the mesh size");
    if (j.contains("x")) {
        const auto xs = j.at("x").get<std::vector<double>>();
        for (int i = 0; i < mesh->size(); ++i)
            if (std::abs(xs[i] - mesh->x(i)) > 1e-13 * std::max(1.0, xs[i]))
                throw std::runtime_error("stored abscissas do not match the rebuilt mesh");
    }
    const json& t = j.at("tail");
    g.tail = {t.at("active").get<bool>(), t.at("limit").get<double>(), t.at("amp").get<double>(),
              t.at("exponent").get<double>()};
    g.parity = j.value("parity", std::string("even")) == "odd" ? Parity::odd : Parity::even;
    return g;
}

inline json to_json(const Functionals& f) {
    return {{"b", f.b}, {"c", f.c}, {"d", f.d}, {"Q", f.Q},
            {"b_err", f.b_err}, {"c_err", f.c_err}, {"d_err", f.d_err}, {"Q_err", f.Q_err}};
}

inline json to_json(const SolveReport& r) {
    json in = json::array();
    for (char c : r.in_set) in.push_back(static_cast<bool>(c));
    int entered = -1;
    for (std::size_t i = 0; i < r.in_set.size(); ++i)
        if (r.in_set[i]) {
            entered = static_cast<int>(i);
            break;
        }
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"final_residual", r.residual_history.empty() ? 0.0 : r.residual_history.back()},
            {"final_weighted_residual", r.weighted_history.empty() ? 0.0 : r.weighted_history.back()},
            {"functionals", to_json(r.final)},
            {"monotone_after_20", r.monotone_after_20},
            {"first_iterate_in_set", entered},
            {"residual_history", r.residual_history},
            {"weighted_history", r.weighted_history},
            {"in_set", in}};
}

inline json to_json(const MembershipReport& r) {
    json cl = json::array();
    for (const auto& c : r.clauses) cl.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}, {"at", c.where}});
    return {{"member", r.member}, {"clauses", cl}};
}

inline json to_json(const OracleReport& r) {
    json items = json::array();
    for (const auto& it : r.items)
        items.push_back({{"name", it.name}, {"error", it.error}, {"tolerance", it.tolerance}, {"pass", it.pass()}});
    return {{"all_pass", r.all_pass()}, {"items", items}};
}

inline json to_json(const PlateauFit& p) {
    return {{"limit", p.limit}, {"slope", p.slope}, {"flatness", p.flatness}, {"fit_residual", p.residual},
            {"window", {p.lo, p.hi}}, {"nodes", p.n}};
}

inline json to_json(const AsymptoticReport& a) {
    return {{"delta_d", a.delta_d},
            {"C_r", a.C_r()},
            {"C_m", a.C_m()},
            {"C0", a.C0()},
            {"C_m_vs_C0sq_over_2d", a.cm_consistency},
            {"delta_identity", a.delta_identity},
            {"fit_r", to_json(a.r)},
            {"fit_m", to_json(a.m)},
            {"fit_psi", to_json(a.psi)}};
}

inline json to_json(const ProfileSet& p) {
    return {{"c_l", p.c_l}, {"c_omega", p.c_omega}, {"c_theta", p.c_theta}, {"alpha", p.alpha}, {"beta", p.beta}};
}

/// Constants as decimal strings with 17 significant digits.
inline json constants_json(const UniversalConstants& k) {
    json j;
    auto s = [](double v) { return fmt17(v); };
    j["eta"] = s(k.eta);
    j["delta0"] = s(k.delta0);
    j["t0"] = s(k.t0);
    j["L0"] = s(k.L0);
    j["K"] = s(k.K);
    j["x_star"] = s(k.x_star);
    j["b_m1"] = s(k.b_m1);
    j["b_m1_minus_sqrt2_over_2"] = s(k.b_m1_excess);
    j["c_m1"] = s(k.c_m1);
    j["d_m1"] = s(k.d_m1);
    j["d_m1_minus_1"] = s(k.d_m1_minus_1);
    j["delta1"] = s(k.delta1);
    j["delta_rho"] = s(k.delta_rho);
    j["ln_L1"] = s(k.ln_L1);
    j["int_phi"] = s(k.int_phi);
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw std::runtime_error("cannot write " + path);
    o << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream i(path, std::ios::binary);
    if (!i) throw std::runtime_error("cannot read " + path);
    std::ostringstream s;
    s << i.rdbuf();
    return s.str();
}

/// CSV with a shared x column; all columns live on the same mesh.
inline std::string to_csv(const std::vector<std::pair<std::string, const GridFunction*>>& cols) {
    std::string s = "x";
    for (const auto& c : cols) s += "," + c.first;
    s += "\n";
    const GridFunction& g0 = *cols.front().second;
    for (int i = 0; i < g0.size(); ++i) {
        s += fmt17(g0.x(i));
        for (const auto& c : cols) s += "," + fmt17(c.second->v[i]);
        s += "\n";
    }
    return s;
}

}  // namespace hlfp
