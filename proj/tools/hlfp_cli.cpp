// hlfp: command-line driver for the fixed-point solver.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include <hlfp/io.hpp>
#include <hlfp/profiles.hpp>
#include <hlfp/solver.hpp>
#include <hlfp/verify.hpp>

namespace fs = std::filesystem;
using namespace hlfp;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    MeshParams mesh;
    SolveConfig solve;
    std::string input;
    std::string out_dir;
    std::string format = "both";  // csv, json or both
    int threads = 1;
    bool dump_iterates = false;
    double max_residual = 1e-8;   // fixed-point acceptance for verify / profile recovery
    double max_flatness = 0.01;
    double fit_lo = 1e-3, fit_hi = 1e-1;
    double identity_tol = 1e-7;
    std::vector<std::string> argv;
};

std::string out_path(const RunConfig& rc, const std::string& name) {
    fs::create_directories(rc.out_dir);
    return (fs::path(rc.out_dir) / name).string();
}

void write_json(const RunConfig& rc, const std::string& name, const json& j) {
    write_text(out_path(rc, name), j.dump(2) + "\n");
}

// timestamps live here and nowhere else
void write_metadata(const RunConfig& rc, const std::string& cmd) {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    write_json(rc, cmd + "_metadata.json", {{"command", cmd}, {"argv", rc.argv}, {"utc", buf}, {"threads", rc.threads}});
}

GridFunction load_function(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const std::exception& e) {
        throw UsageError(std::string("cannot load ") + path + ": " + e.what());
    }
    try {
        return grid_function_from_json(j.contains("function") ? j.at("function") : j);
    } catch (const std::exception& e) {
        throw UsageError(path + " is not a stored grid function: " + e.what());
    }
}

struct Solved {
    std::unique_ptr<KernelOperator> op;
    GridFunction f;
    MapBundle bd;
};

// fixed point from --input when given, else a fresh solve
Solved obtain_fixed_point(const RunConfig& rc) {
    Solved s;
    if (!rc.input.empty()) {
        s.f = load_function(rc.input);
        s.op = std::make_unique<KernelOperator>(s.f.mesh, rc.threads);
        s.bd = apply_maps(*s.op, s.f);
        return s;
    }
    SolveConfig cfg = rc.solve;
    cfg.mesh = rc.mesh;
    s.op = std::make_unique<KernelOperator>(make_mesh(cfg.mesh), rc.threads);
    SolveResult r = solve(*s.op, cfg);
    s.f = std::move(r.f);
    s.bd = std::move(r.bundle);
    return s;
}

json fixed_point_json(const GridFunction& f, const MapBundle& bd) {
    return {{"kind", "fixed_point"}, {"functionals", to_json(bd.fx)}, {"function", to_json(f)}};
}

int cmd_solve(const RunConfig& rc) {
    SolveConfig cfg = rc.solve;
    cfg.mesh = rc.mesh;
    if (!rc.input.empty()) {
        cfg.initial = InitialFunction::file;
        cfg.initial_data = load_function(rc.input);
    }
    if (rc.dump_iterates) {
        const std::string dir = out_path(rc, "iterates");
        fs::create_directories(dir);
        cfg.on_iterate = [dir](int it, const MapBundle& bd) {
            char name[32];
            std::snprintf(name, sizeof name, "iter_%05d.json", it);
            json j = {{"iteration", it},   {"functionals", to_json(bd.fx)}, {"f", to_json(bd.f)},
                      {"g", to_json(bd.g)}, {"psi", to_json(bd.psi)},       {"m", to_json(bd.m)},
                      {"r", to_json(bd.r)}};
            write_text((fs::path(dir) / name).string(), j.dump() + "\n");
        };
    }
    write_metadata(rc, "solve");
    KernelOperator op(make_mesh(cfg.mesh), rc.threads);
    SolveResult res;
    try {
        res = solve(op, cfg);
    } catch (const NonConvergence& e) {
        write_json(rc, "solve_report.json", to_json(e.report));
        throw;
    } catch (const InvariantViolation& e) {
        write_json(rc, "solve_report.json", to_json(e.report));
        throw;
    }
    json rep = to_json(res.report);
    rep["initial"] = to_string(cfg.initial);
    rep["tol_residual"] = cfg.tol_residual;
    rep["mesh"] = to_json(cfg.mesh);
    rep["nodes"] = op.size();
    write_json(rc, "solve_report.json", rep);
    write_json(rc, "fixedpoint.json", fixed_point_json(res.f, res.bundle));

    const ProfileSet raw = recover(res.f, res.bundle, rc.max_residual);
    const ProfileSet ren = renormalize(raw);
    const SteadyResiduals sr = steady_state_residuals(raw, res.bundle.delta_d(), res.bundle.b());
    const BcIdentity bc = identity_check_bc(res.bundle);
    if (rc.format != "csv") {
        json pj = {{"raw", to_json(raw)},
                   {"renormalized", to_json(ren)},
                   {"delta_d", res.bundle.delta_d()},
                   {"steady_residuals",
                    {{"omega_eq", sr.omega_eq},
                     {"v_eq", sr.v_eq},
                     {"outpush_min", sr.outpush_min},
                     {"nondeg_cl", sr.nondeg_cl},
                     {"nondeg_cw", sr.nondeg_cw},
                     {"u_slope_plus_b", sr.u_slope_plus_b}}},
                   {"bc_identity",
                    {{"residual", bc.residual},
                     {"b_m", bc.b_m},
                     {"k", bc.k},
                     {"k_lhs", bc.k_lhs},
                     {"k_rhs", bc.k_rhs},
                     {"k_bound_lhs", bc.k_bound_lhs}}},
                   {"omega", to_json(ren.Omega)},
                   {"v", to_json(ren.V)},
                   {"u", to_json(ren.U)}};
        write_json(rc, "profiles.json", pj);
    }
    if (rc.format != "json") {
        write_text(out_path(rc, "profiles.csv"), to_csv({{"omega", &ren.Omega}, {"v", &ren.V}, {"u", &ren.U}}));
        write_text(out_path(rc, "profiles_raw.csv"), to_csv({{"omega", &raw.Omega}, {"v", &raw.V}, {"u", &raw.U}}));
    }
    std::cout << "converged in " << res.report.iterations << " iterations, residual "
              << fmt17(res.report.residual_history.back()) << "\n"
              << "b = " << fmt17(res.bundle.b()) << "  c = " << fmt17(res.bundle.c()) << "  d = " << fmt17(res.bundle.d())
              << "\nc_l (renormalized) = " << fmt17(ren.c_l) << "\n";
    return 0;
}

int cmd_verify(const RunConfig& rc) {
    if (rc.input.empty()) throw UsageError("verify needs --input");
    write_metadata(rc, "verify");
    const GridFunction f = load_function(rc.input);
    KernelOperator op(f.mesh, rc.threads);
    const MembershipReport mr = check_membership(f, rc.solve.membership_tol);
    const OracleReport orc = run_oracles(f.mesh, &op);
    const MapBundle bd = apply_maps(op, f);
    const double res = residual(f, bd.r);
    const BcIdentity bc = identity_check_bc(bd);
    const bool ok = mr.member && orc.all_pass() && res <= rc.max_residual && bc.residual <= rc.identity_tol;
    json j = {{"pass", ok},
              {"fixed_point_residual", res},
              {"max_residual", rc.max_residual},
              {"bc_identity_residual", bc.residual},
              {"identity_tol", rc.identity_tol},
              {"functionals", to_json(bd.fx)},
              {"membership", to_json(mr)},
              {"oracles", to_json(orc)}};
    write_json(rc, "verify_report.json", j);
    std::cout << j.dump(2) << "\n";
    return ok ? 0 : 1;
}

int cmd_constants(const RunConfig& rc) {
    const json j = constants_json(constants());
    if (!rc.out_dir.empty()) write_json(rc, "constants.json", j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_asymptotics(const RunConfig& rc) {
    write_metadata(rc, "asymptotics");
    const Solved s = obtain_fixed_point(rc);
    const AsymptoticReport a = asymptotics(s.f, s.bd, rc.max_flatness, rc.fit_lo, rc.fit_hi);
    const json j = to_json(a);
    write_json(rc, "asymptotics.json", j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_export_plots(const RunConfig& rc) {
    write_metadata(rc, "export-plots");
    const Solved s = obtain_fixed_point(rc);
    const MapBundle& bd = s.bd;
    const double dd = bd.delta_d();
    std::string f1 = "x,s,f,m,lower_bound\n", f2 = "x,s,g,upper_bound\n", f3 = "x,x^(1+dd)f,x^(1+2dd)m,x^(1/2+dd)psi\n";
    for (int i = 0; i < s.f.size(); ++i) {
        const double x = s.f.x(i), sx = x * x;
        f1 += fmt17(x) + "," + fmt17(sx) + "," + fmt17(s.f.v[i]) + "," + fmt17(bd.m.v[i]) + "," + fmt17(m0(x)) + "\n";
        f2 += fmt17(x) + "," + fmt17(sx) + "," + fmt17(bd.g.v[i]) + "," + fmt17(1.0 + 0.5 * sx) + "\n";
        if (x > 0)
            f3 += fmt17(x) + "," + fmt17(std::pow(x, 1.0 + dd) * s.f.v[i]) + "," +
                  fmt17(std::pow(x, 1.0 + 2.0 * dd) * bd.m.v[i]) + "," + fmt17(std::pow(x, 0.5 + dd) * bd.psi.v[i]) + "\n";
    }
    write_text(out_path(rc, "fig1_f_m.csv"), f1);
    write_text(out_path(rc, "fig2_g.csv"), f2);
    write_text(out_path(rc, "fig3_asymptotics.csv"), f3);
    std::cout << "wrote fig1_f_m.csv fig2_g.csv fig3_asymptotics.csv to " << rc.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig rc;
    rc.argv.assign(argv, argv + argc);
    if (const char* env = std::getenv("HLFP_OUT_DIR")) rc.out_dir = env;

    CLI::App app{"Fixed-point construction of self-similar profiles for the 1D Hou-Luo model"};
    app.set_config("--config", "", "flat key = value file; command-line flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir_flag;
    app.add_option("--out-dir", out_dir_flag, "output directory (default $HLFP_OUT_DIR, else .)");
    app.add_option("--input", rc.input, "stored grid function (fixedpoint.json)");
    app.add_option("--format", rc.format, "profile output format")->check(CLI::IsMember({"csv", "json", "both"}));
    app.add_option("--threads", rc.threads, "worker threads for kernel assembly and application")
        ->check(CLI::Range(1, 256));

    MeshParams& mp = rc.mesh;
    app.add_option("--x-max", mp.x_max, "right end of the mesh")->capture_default_str();
    app.add_option("--x-min", mp.x_min, "first logarithmic node")->capture_default_str();
    app.add_option("--order", mp.order, "Lobatto intervals per panel")->capture_default_str();
    app.add_option("--panels-per-decade", mp.panels_per_decade)->capture_default_str();
    app.add_option("--core-panels-per-decade", mp.core_panels_per_decade)->capture_default_str();
    app.add_option("--core-lo", mp.core_lo)->capture_default_str();
    app.add_option("--core-hi", mp.core_hi)->capture_default_str();
    app.add_option("--refine", mp.refine, "multiplies panel densities")->capture_default_str();
    app.add_option("--min-points-per-decade", mp.min_points_per_decade)->capture_default_str();

    SolveConfig& sc = rc.solve;
    const std::map<std::string, InitialFunction> initials{
        {"rational-one", InitialFunction::rational_one}, {"m0", InitialFunction::m0}, {"m1", InitialFunction::m1}};
    const std::map<std::string, Enforcement> enforcements{{"off", Enforcement::off},
                                                          {"log-only", Enforcement::log_only},
                                                          {"enforce-after-entry", Enforcement::enforce_after_entry},
                                                          {"enforce", Enforcement::enforce}};
    app.add_option("--initial", sc.initial, "initial function")->transform(CLI::CheckedTransformer(initials));
    app.add_option("--tol", sc.tol_residual, "residual tolerance (sup and weighted norm)")->capture_default_str();
    app.add_option("--max-iters", sc.max_iters)->capture_default_str();
    app.add_option("--enforcement", sc.enforcement, "invariant-set policy")
        ->transform(CLI::CheckedTransformer(enforcements));
    app.add_option("--damping", sc.damping)->capture_default_str();
    app.add_option("--min-tail-excess", sc.min_tail_excess, "tails with exponent below 1 + this are cut")
        ->capture_default_str();
    app.add_option("--progress-every", sc.progress_every)->capture_default_str();
    app.add_flag("--dump-iterates", rc.dump_iterates, "write every iterate to iterates/");
    app.add_option("--tol-value", sc.membership_tol.value)->capture_default_str();
    app.add_option("--tol-relative", sc.membership_tol.relative)->capture_default_str();
    app.add_option("--tol-convex", sc.membership_tol.convex)->capture_default_str();
    app.add_option("--tol-deriv", sc.membership_tol.deriv)->capture_default_str();
    app.add_option("--max-residual", rc.max_residual, "fixed-point acceptance threshold")->capture_default_str();
    app.add_option("--identity-tol", rc.identity_tol)->capture_default_str();
    app.add_option("--max-flatness", rc.max_flatness, "plateau drift allowed in the fit window")->capture_default_str();
    app.add_option("--fit-lo", rc.fit_lo, "fit window start as a fraction of x_max")->capture_default_str();
    app.add_option("--fit-hi", rc.fit_hi, "fit window end as a fraction of x_max")->capture_default_str();

    auto* s_solve = app.add_subcommand("solve", "run the fixed-point iteration");
    auto* s_verify = app.add_subcommand("verify", "membership, oracles and residual of a stored function");
    auto* s_const = app.add_subcommand("constants", "print the universal constants");
    auto* s_asym = app.add_subcommand("asymptotics", "tail plateaus of f, m and psi");
    auto* s_plots = app.add_subcommand("export-plots", "figure data as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (!out_dir_flag.empty()) rc.out_dir = out_dir_flag;
    const bool explicit_out = !rc.out_dir.empty();
    if (!explicit_out) rc.out_dir = ".";

    try {
        if (*s_solve) return cmd_solve(rc);
        if (*s_verify) return cmd_verify(rc);
        if (*s_const) {
            if (!explicit_out) rc.out_dir.clear();
            return cmd_constants(rc);
        }
        if (*s_asym) return cmd_asymptotics(rc);
        if (*s_plots) return cmd_export_plots(rc);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
