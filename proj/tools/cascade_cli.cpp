// Command-line driver: geometry -> mesh -> solve -> verification runs, driven
// by an INI config. See README.md for the config reference.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "cascade/cascade.hpp"

namespace fs = std::filesystem;
using namespace cascade;

namespace {

struct RunContext {
    RunConfig cfg;
    CascadeGeometry geom;
    fs::path outdir;
    bool have_case = false;
    ManufacturedCase mcase;
};

CascadeGeometry geometry_from_config(const RunConfig& cfg) {
    GeometryParams p;
    p.tau = cfg.get_double("geometry.tau", 1.0);
    p.d = cfg.get_double("geometry.d", 2.0);
    p.lower_points = cfg.get_points("geometry.lower_curve");
    p.profile_points = cfg.get_points("geometry.profile");
    p.delta_margin = cfg.get_double("geometry.delta_margin", -1.0);
    return build_geometry(p);
}

Mesh mesh_from_config(const RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.has("mesh.file")) return read_mesh(cfg.require_string("mesh.file"));
    if (cfg.has("mesh.n1") || cfg.has("mesh.n2")) {
        const int n1 = cfg.get_int("mesh.n1", 16);
        const int n2 = cfg.get_int("mesh.n2", 8);
        return generate_structured_mesh(ctx.geom, n1, n2);
    }
    return generate_mesh(ctx.geom, cfg.get_double("mesh.h", 0.1));
}

VectorFn data_from_spec(const std::string& key, const std::string& spec, double tau) {
    if (spec == "zero" || spec.empty()) return {};
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "uniform") {
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw ConfigError("config key '" + key + "': expected uniform:ux,uy");
        const double ux = std::stod(args.substr(0, comma));
        const double uy = std::stod(args.substr(comma + 1));
        return [ux, uy](Vec2) { return Vec2{ux, uy}; };
    }
    if (kind == "sine") {
        const double amp = args.empty() ? 1.0 : std::stod(args);
        const double om = 2 * M_PI / tau;
        return [amp, om](Vec2 x) { return Vec2{amp * std::sin(om * x.y), 0.0}; };
    }
    throw ConfigError("config key '" + key + "': unknown data spec '" + spec + "'");
}

StokesProblem problem_from_config(const RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    StokesProblem pb;
    pb.nu = cfg.get_double("problem.nu", 1.0);
    if (ctx.have_case) {
        pb.f = ctx.mcase.f;
        pb.inflow_g = ctx.mcase.g;
        pb.outflow_h = ctx.mcase.h;
    } else {
        pb.f = data_from_spec("problem.forcing", cfg.get_string("problem.forcing", "zero"),
                              ctx.geom.tau);
        pb.inflow_g = data_from_spec("problem.inflow", cfg.get_string("problem.inflow", "zero"),
                                     ctx.geom.tau);
        pb.outflow_h = data_from_spec("problem.outflow_h",
                                      cfg.get_string("problem.outflow_h", "zero"), ctx.geom.tau);
    }
    return pb;
}

SolverConfig solver_from_config(const RunConfig& cfg) {
    SolverConfig sc;
    const std::string mode = cfg.get_string("solver.mode", "direct");
    if (mode == "direct") sc.mode = SolverConfig::Mode::Direct;
    else if (mode == "lifted") sc.mode = SolverConfig::Mode::Lifted;
    else throw ConfigError("config key 'solver.mode': expected direct or lifted");
    const std::string lin = cfg.get_string("solver.linear", "direct");
    if (lin == "direct") sc.linear = SolverConfig::Linear::DirectLU;
    else if (lin == "minres") sc.linear = SolverConfig::Linear::Minres;
    else throw ConfigError("config key 'solver.linear': expected direct or minres");
    sc.tol = cfg.get_double("solver.tol", 1e-10);
    sc.max_iterations = cfg.get_int("solver.max_iterations", 50000);
    sc.r_norms = cfg.get_double_list("solver.r_norms", {2.0});
    return sc;
}

/// Validate everything the run needs before any artifact is written.
RunContext validate(const std::string& config_path, const std::vector<std::string>& overrides,
                    const std::string& outdir_flag) {
    RunContext ctx;
    ctx.cfg = config_path.empty() ? RunConfig{} : RunConfig::parse_file(config_path);
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + ov + "': expected section.key=value");
        ctx.cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    ctx.geom = geometry_from_config(ctx.cfg);

    if (ctx.cfg.has("problem.case")) {
        ctx.have_case = true;
        ctx.mcase = make_case(ctx.cfg.require_string("problem.case"), ctx.geom,
                              ctx.cfg.get_double("problem.nu", 1.0));
    }

    std::string dir = !outdir_flag.empty() ? outdir_flag : ctx.cfg.get_string("output.dir", "out");
    if (const char* root = std::getenv("CASCADE_OUT_ROOT"); root && *root)
        ctx.outdir = fs::path(root) / dir;
    else
        ctx.outdir = dir;
    return ctx;
}

void write_effective_config(const RunContext& ctx) {
    write_text((ctx.outdir / "effective.cfg").string(), ctx.cfg.dump());
}

int cmd_mesh(RunContext& ctx) {
    const Mesh mesh = mesh_from_config(ctx);
    fs::create_directories(ctx.outdir);
    write_effective_config(ctx);
    write_mesh(mesh, (ctx.outdir / "mesh.txt").string());
    std::cout << "mesh: " << mesh.n_vertices() << " vertices, " << mesh.n_triangles()
              << " triangles, " << mesh.periodic_pairs.size() << " periodic pairs, h = "
              << mesh.h << "\n";
    return 0;
}

int cmd_solve(RunContext& ctx) {
    const Mesh mesh = mesh_from_config(ctx);
    const StokesProblem pb = problem_from_config(ctx);
    const SolverConfig sc = solver_from_config(ctx.cfg);
    const SolveReport rep = solve(mesh, pb, sc);

    fs::create_directories(ctx.outdir);
    write_effective_config(ctx);
    write_vtk(mesh, rep.solution, (ctx.outdir / "solution.vtk").string());
    write_coefficients_csv(rep.solution, (ctx.outdir / "coefficients.csv").string());
    write_text((ctx.outdir / "report.txt").string(), report_block(rep));
    write_text((ctx.outdir / "report.csv").string(), report_csv(rep));
    std::cout << "solve: flux_in = " << rep.flux_in << ", flux_out = " << rep.flux_out
              << ", traction residual = " << rep.traction_residual
              << ", c04 = " << rep.pressure_constant << "\n";
    return 0;
}

int cmd_mms(RunContext& ctx) {
    if (!ctx.have_case) throw ConfigError("missing config key 'problem.case'");
    const int levels = ctx.cfg.get_int("study.levels", 4);
    const double h0 = ctx.cfg.get_double("study.h0", 0.25);
    const std::vector<double> rl = ctx.cfg.get_double_list("study.r_list", {2.0});
    if (levels < 3) throw ConfigError("config key 'study.levels': need at least 3");
    std::vector<double> hs;
    for (int k = 0; k < levels; ++k) hs.push_back(h0 / (1 << k));

    const StudyResult res =
        convergence_study(ctx.mcase, ctx.geom, hs, rl, solver_from_config(ctx.cfg));

    fs::create_directories(ctx.outdir);
    write_effective_config(ctx);
    write_text((ctx.outdir / "rates.csv").string(), res.to_csv());
    std::vector<double> h, e;
    for (const auto& L : res.levels) {
        h.push_back(L.h);
        e.push_back(L.err_u_w1r.at(rl.front()));
    }
    write_gnuplot_columns((ctx.outdir / "err_w1r_vs_h.dat").string(), h, e);
    for (size_t k = 0; k < res.levels.size(); ++k) e[k] = res.levels[k].err_p_lr.at(rl.front());
    write_gnuplot_columns((ctx.outdir / "err_p_vs_h.dat").string(), h, e);

    const auto ru = res.rates([&rl](const StudyLevel& L) { return L.err_u_w1r.at(rl.front()); });
    const auto rp = res.rates([&rl](const StudyLevel& L) { return L.err_p_lr.at(rl.front()); });
    std::cout << "mms " << ctx.mcase.id << ": final W1r velocity rate = " << ru.back()
              << ", final Lr pressure rate = " << rp.back() << "\n";
    return 0;
}

int cmd_lift_check(RunContext& ctx) {
    const Mesh mesh = mesh_from_config(ctx);
    const StokesProblem pb = problem_from_config(ctx);
    const double r = ctx.cfg.get_double_list("solver.r_norms", {2.0}).front();

    const LiftField lf = build_lift(mesh, pb.inflow_g);
    const auto res = lift_residuals(mesh, lf, pb.inflow_g);
    const double h1 = lift_h1_norm(mesh, lf);
    double gnorm = 0;
    if (pb.inflow_g)
        gnorm = lr_boundary_norm(mesh, BoundaryTag::Inflow, r, pb.inflow_g) +
                boundary_gagliardo_seminorm(mesh, ctx.geom, BoundaryTag::Inflow, r, pb.inflow_g);
    const double stability_c = gnorm > 0 ? h1 / gnorm : 0.0;

    std::ostringstream os;
    os << "flux,inflow_trace,profile_trace,periodic_mismatch,outflow_trace,weak_divergence,"
          "h1_norm,stability_constant\n";
    os << fmt17(lf.flux) << ',' << fmt17(res.inflow_trace) << ',' << fmt17(res.profile_trace)
       << ',' << fmt17(res.periodic_mismatch) << ',' << fmt17(res.outflow_trace) << ','
       << fmt17(res.weak_divergence) << ',' << fmt17(h1) << ',' << fmt17(stability_c) << '\n';

    fs::create_directories(ctx.outdir);
    write_effective_config(ctx);
    write_text((ctx.outdir / "lift_check.csv").string(), os.str());
    std::cout << "lift-check: flux = " << lf.flux << ", weak divergence = "
              << res.weak_divergence << ", stability constant = " << stability_c << "\n";
    return 0;
}

int cmd_divsolve_check(RunContext& ctx) {
    const Mesh mesh = mesh_from_config(ctx);
    const StokesProblem pb = problem_from_config(ctx);
    const int n1 = ctx.cfg.get_int(
        "mesh.n1",
        std::max(4, static_cast<int>(std::lround(ctx.geom.d / ctx.cfg.get_double("mesh.h", 0.1)))));
    const int n2 = ctx.cfg.get_int(
        "mesh.n2", std::max(4, static_cast<int>(
                                   std::lround(ctx.geom.tau / ctx.cfg.get_double("mesh.h", 0.1)))));
    const double delta =
        ctx.cfg.get_double("divsolve.delta", default_cutoff_delta(ctx.geom, mesh.h));

    const TensorPotential t3 = build_tensor_potential_L3(ctx.geom, n1, n2, pb.f, delta);
    const TensorPotential t4 = build_tensor_potential_L4(ctx.geom, n1, n2, pb.f);

    std::ostringstream os;
    os << "mode,row,weak_divergence,mean_residual,outflow_trace,outflow_pointwise,alpha,k\n";
    for (int row : {0, 1}) {
        os << "L3," << row << ',' << fmt17(weak_divergence_residual(t3, row)) << ','
           << fmt17(mean_compatibility_residual(t3, row)) << ','
           << fmt17(outflow_trace_max(t3, row)) << ',' << fmt17(outflow_pointwise_trace(t3, row))
           << ',' << fmt17(t3.alpha[row]) << ',' << fmt17(row == 0 ? t3.k.x : t3.k.y) << '\n';
        os << "L4," << row << ',' << fmt17(weak_divergence_residual(t4, row)) << ','
           << fmt17(mean_compatibility_residual(t4, row)) << ",,"
           << fmt17(outflow_pointwise_trace(t4, row)) << ',' << fmt17(t4.alpha[row]) << ','
           << fmt17(row == 0 ? t4.k.x : t4.k.y) << '\n';
    }

    fs::create_directories(ctx.outdir);
    write_effective_config(ctx);
    write_text((ctx.outdir / "divsolve_check.csv").string(), os.str());
    std::cout << "divsolve-check: L3 weak divergence = " << weak_divergence_residual(t3, 0)
              << ", Gamma_o trace = " << outflow_trace_max(t3, 0) << "\n";
    return 0;
}

int cmd_norms(RunContext& ctx) {
    if (!ctx.have_case) throw ConfigError("missing config key 'problem.case'");
    const Mesh mesh = mesh_from_config(ctx);
    const std::vector<double> rl = ctx.cfg.get_double_list("solver.r_norms", {1.5, 2, 3, 4});
    const ManufacturedCase& mc = ctx.mcase;

    std::ostringstream os;
    os << "r,velocity_w1r,pressure_lr,g_boundary_lr,g_gagliardo,r3_ratio\n";
    for (double r : rl) {
        const double un = w1r_volume_norm(
            mesh, r, [&mc](int, double, double, double, const Vec2& x) { return mc.u(x); },
            [&mc](int, double, double, double, const Vec2& x) { return mc.grad_u(x); });
        const double pn = lr_volume_norm(
            mesh, r,
            [&mc](int, double, double, double, const Vec2& x) { return Vec2{mc.p(x), 0.0}; });
        const double gb = lr_boundary_norm(mesh, BoundaryTag::Inflow, r, mc.g);
        const double gg = boundary_gagliardo_seminorm(mesh, ctx.geom, BoundaryTag::Inflow, r, mc.g);
        const auto r3 = remark_r3_inequality_check(
            [&mc](double t) { return mc.g(Vec2{0.0, t + mc.y0}).x; }, mc.tau, r);
        os << fmt17(r) << ',' << fmt17(un) << ',' << fmt17(pn) << ',' << fmt17(gb) << ','
           << fmt17(gg) << ',' << fmt17(r3.ratio) << '\n';
    }

    fs::create_directories(ctx.outdir);
    write_effective_config(ctx);
    write_text((ctx.outdir / "norms.csv").string(), os.str());
    std::cout << "norms: wrote " << (ctx.outdir / "norms.csv").string() << "\n";
    return 0;
}

int cmd_stability_probe(RunContext& ctx) {
    const int levels = ctx.cfg.get_int("probe.levels", 3);
    const double h0 = ctx.cfg.get_double("probe.h0", 0.25);
    const int triples = ctx.cfg.get_int("probe.triples", 10);
    const unsigned seed = static_cast<unsigned>(ctx.cfg.get_int("probe.seed", 42));
    const std::vector<double> rl = ctx.cfg.get_double_list("probe.r_list", {1.5, 2, 4});
    std::vector<double> hs;
    for (int k = 0; k < levels; ++k) hs.push_back(h0 / (1 << k));

    const ProbeResult res =
        stability_probe(ctx.geom, hs, rl, triples, seed, ctx.cfg.get_double("problem.nu", 1.0));

    fs::create_directories(ctx.outdir);
    write_effective_config(ctx);
    write_text((ctx.outdir / "probe.csv").string(), res.to_csv());
    for (double r : rl)
        std::cout << "stability-probe r=" << r
                  << ": coarse max ratio = " << res.max_ratio.at(r).front()
                  << ", fine max ratio = " << res.max_ratio.at(r).back() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady Stokes solver for one spatial period of a 2D profile cascade"};
    app.require_subcommand(1);

    std::string config_path, outdir;
    std::vector<std::string> overrides;
    app.add_option("--config,-c", config_path, "INI config file");
    app.add_option("--set,-s", overrides, "override section.key=value");
    app.add_option("--out,-o", outdir, "output directory (overrides output.dir)");

    const std::vector<std::pair<std::string, int (*)(RunContext&)>> cmds = {
        {"mesh", cmd_mesh},
        {"solve", cmd_solve},
        {"mms", cmd_mms},
        {"lift-check", cmd_lift_check},
        {"divsolve-check", cmd_divsolve_check},
        {"norms", cmd_norms},
        {"stability-probe", cmd_stability_probe}};
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, fn] : cmds)
        subs[name] = app.add_subcommand(name, "");

    CLI11_PARSE(app, argc, argv);

    try {
        RunContext ctx = validate(config_path, overrides, outdir);
        for (const auto& [name, fn] : cmds)
            if (subs.at(name)->parsed()) return fn(ctx);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidGeometry& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return 1;
    } catch (const UnknownCase& e) {
        std::cerr << "config error (problem.case): " << e.what() << "\n";
        return 1;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
