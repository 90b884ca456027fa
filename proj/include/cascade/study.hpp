#pragma once

#include <cstdio>
#include <sstream>

#include "cascade/manufactured.hpp"
#include "cascade/norms.hpp"
#include "cascade/solver.hpp"

namespace cascade {

struct StudyLevel {
    double h_target = 0, h = 0;
    int n_triangles = 0;
    std::map<double, double> err_u_lr;   // r -> ||u_h - u||_{L^r}
    std::map<double, double> err_u_w1r;  // r -> ||u_h - u||_{W^{1,r}}
    std::map<double, double> err_p_lr;   // r -> ||p_h - p||_{L^r}
    double traction_residual = 0;
    double pressure_constant = 0;
    double flux_gap = 0;  // |flux_out - flux_in|
};

struct StudyResult {
    std::string case_id;
    std::vector<double> r_list;
    std::vector<StudyLevel> levels;

    /// log2 rate between consecutive levels for a column accessor.
    template <typename Get>
    std::vector<double> rates(Get get) const {
        std::vector<double> out;
        for (size_t k = 1; k < levels.size(); ++k) {
            const double e0 = get(levels[k - 1]), e1 = get(levels[k]);
            out.push_back((e0 > 0 && e1 > 0) ? std::log2(e0 / e1) : 0.0);
        }
        return out;
    }

    std::string to_csv() const {
        std::ostringstream os;
        char buf[64];
        auto num = [&buf](double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        os << "level,h,triangles";
        for (double r : r_list)
            os << ",err_u_l" << r << ",err_u_w1" << r << ",err_p_l" << r;
        os << ",traction_residual,pressure_constant,flux_gap\n";
        for (size_t k = 0; k < levels.size(); ++k) {
            const auto& L = levels[k];
            os << k << ',' << num(L.h) << ',' << L.n_triangles;
            for (double r : r_list)
                os << ',' << num(L.err_u_lr.at(r)) << ',' << num(L.err_u_w1r.at(r)) << ','
                   << num(L.err_p_lr.at(r));
            os << ',' << num(L.traction_residual) << ',' << num(L.pressure_constant) << ','
               << num(L.flux_gap) << '\n';
        }
        return os.str();
    }
};

/// Uniform-refinement study of a manufactured case: solve on each level,
/// measure errors by degree-6 quadrature, report per-level columns. The
/// case derivations are oracle-checked before the first solve.
inline StudyResult convergence_study(const ManufacturedCase& mc, const CascadeGeometry& geom,
                                     const std::vector<double>& h_list,
                                     const std::vector<double>& r_list,
                                     const SolverConfig& base_cfg = {}) {
    if (h_list.size() < 3) throw Error("convergence study needs at least 3 levels");
    verify_case_derivations(mc, geom.d);

    StudyResult res;
    res.case_id = mc.id;
    res.r_list = r_list;

    for (double ht : h_list) {
        const Mesh mesh = generate_mesh(geom, ht);
        StokesProblem pb;
        pb.nu = mc.nu;
        pb.f = mc.f;
        pb.inflow_g = mc.g;
        pb.outflow_h = mc.h;
        SolverConfig cfg = base_cfg;
        cfg.r_norms = r_list;
        const SolveReport rep = solve(mesh, pb, cfg);
        const MixedField& u = rep.solution;

        StudyLevel L;
        L.h_target = ht;
        L.h = mesh.h;
        L.n_triangles = mesh.n_triangles();
        for (double r : r_list) {
            auto dv = [&](int t, double l0, double l1, double l2, const Vec2& x) {
                return u.velocity_at(t, l0, l1, l2) - mc.u(x);
            };
            auto dg = [&](int t, double l0, double l1, double l2, const Vec2& x) {
                Mat2 a = u.velocity_gradient(t, l0, l1, l2);
                const Mat2 b = mc.grad_u(x);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) a[i][j] -= b[i][j];
                return a;
            };
            auto dp = [&](int t, double l0, double l1, double l2, const Vec2& x) {
                return Vec2{u.pressure_at(t, l0, l1, l2) - mc.p(x), 0.0};
            };
            L.err_u_lr[r] = lr_volume_norm(mesh, r, dv);
            L.err_u_w1r[r] = w1r_volume_norm(mesh, r, dv, dg);
            L.err_p_lr[r] = lr_volume_norm(mesh, r, dp);
        }
        L.traction_residual = rep.traction_residual;
        L.pressure_constant = rep.pressure_constant;
        L.flux_gap = std::abs(rep.flux_out - rep.flux_in);
        res.levels.push_back(L);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Randomized stability probe (empirical boundedness of the solution map)
// ---------------------------------------------------------------------------

/// Seeded smooth tau-periodic data triple built from low-order trigonometric
/// polynomials in x2 with mild polynomial modulation in x1.
struct RandomDataTriple {
    struct Trig {
        double a0 = 0;
        std::array<double, 3> ac{}, as{};
        double slope = 0;
        double eval(double x1, double x2, double om, double d) const {
            double v = a0;
            for (int m = 0; m < 3; ++m)
                v += ac[m] * std::cos(om * (m + 1) * x2) + as[m] * std::sin(om * (m + 1) * x2);
            return v * (1.0 + slope * x1 / d);
        }
    };
    Trig f1, f2, g1, g2, h1, h2;
    double tau = 1, d = 1;

    static RandomDataTriple draw(std::mt19937& rng, double tau, double d) {
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        auto draw_trig = [&U, &rng](bool with_slope) {
            Trig t;
            t.a0 = U(rng);
            for (int m = 0; m < 3; ++m) {
                t.ac[m] = U(rng);
                t.as[m] = U(rng);
            }
            t.slope = with_slope ? 0.5 * U(rng) : 0.0;
            return t;
        };
        RandomDataTriple r;
        r.tau = tau;
        r.d = d;
        r.f1 = draw_trig(true);
        r.f2 = draw_trig(true);
        r.g1 = draw_trig(false);
        r.g2 = draw_trig(false);
        r.h1 = draw_trig(false);
        r.h2 = draw_trig(false);
        return r;
    }

    StokesProblem problem(double nu) const {
        const double om = 2 * M_PI / tau, dd = d;
        StokesProblem pb;
        pb.nu = nu;
        auto f1c = f1, f2c = f2, g1c = g1, g2c = g2, h1c = h1, h2c = h2;
        pb.f = [f1c, f2c, om, dd](Vec2 x) {
            return Vec2{f1c.eval(x.x, x.y, om, dd), f2c.eval(x.x, x.y, om, dd)};
        };
        pb.inflow_g = [g1c, g2c, om, dd](Vec2 x) {
            return Vec2{g1c.eval(x.x, x.y, om, dd), g2c.eval(x.x, x.y, om, dd)};
        };
        pb.outflow_h = [h1c, h2c, om, dd](Vec2 x) {
            return Vec2{h1c.eval(x.x, x.y, om, dd), h2c.eval(x.x, x.y, om, dd)};
        };
        return pb;
    }
};

struct ProbeResult {
    std::vector<double> h;                         // per level
    std::vector<double> r_list;
    std::map<double, std::vector<double>> max_ratio;  // r -> per-level max over triples

    std::string to_csv() const {
        std::ostringstream os;
        char buf[64];
        auto num = [&buf](double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        os << "level,h";
        for (double r : r_list) os << ",max_ratio_r" << r;
        os << '\n';
        for (size_t k = 0; k < h.size(); ++k) {
            os << k << ',' << num(h[k]);
            for (double r : r_list) os << ',' << num(max_ratio.at(r)[k]);
            os << '\n';
        }
        return os.str();
    }
};

/// Ratio (||u||_{1,r} + ||p||_r) / (||f||_r + ||g||_{L^r + Gagliardo} + ||h||_r)
/// over seeded random data and mesh levels; one factorization per level.
inline ProbeResult stability_probe(const CascadeGeometry& geom, const std::vector<double>& h_list,
                                   const std::vector<double>& r_list, int n_triples,
                                   unsigned seed, double nu = 1.0) {
    std::mt19937 rng(seed);
    std::vector<RandomDataTriple> triples;
    for (int k = 0; k < n_triples; ++k)
        triples.push_back(RandomDataTriple::draw(rng, geom.tau, geom.d));

    ProbeResult res;
    res.r_list = r_list;
    for (double r : r_list) res.max_ratio[r] = {};

    for (double ht : h_list) {
        const Mesh mesh = generate_mesh(geom, ht);
        const DofMap dm = DofMap::build(mesh, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);

        StokesProblem pb0 = triples.front().problem(nu);
        AssembledStokes base = assemble(mesh, pb0, dm);
        DirectFactorization fact(base.sys.A);

        std::map<double, double> worst;
        for (double r : r_list) worst[r] = 0;
        for (const auto& tri : triples) {
            StokesProblem pb = tri.problem(nu);
            AssembledStokes as = assemble(mesh, pb, dm, {}, &base.sys.A);
            const Eigen::VectorXd x = fact.solve(as.sys.rhs);
            const MixedField u = as.expand(x);

            SolverConfig cfg;
            cfg.r_norms = r_list;
            SolveReport rep;
            rep.solution = u;
            diagnostics(mesh, pb, u, cfg, rep);

            for (double r : r_list) {
                const double fn = lr_volume_norm(
                    mesh, r, [&pb](int, double, double, double, const Vec2& x2) { return pb.f(x2); });
                const double gn = lr_boundary_norm(mesh, BoundaryTag::Inflow, r, pb.inflow_g) +
                                  boundary_gagliardo_seminorm(mesh, geom, BoundaryTag::Inflow, r,
                                                              pb.inflow_g, 8, 4);
                const double hn = lr_boundary_norm(mesh, BoundaryTag::Outflow, r, pb.outflow_h);
                const double data = fn + gn + hn;
                const double sol = rep.velocity_w1r.at(r) + rep.pressure_lr.at(r);
                if (data > 0) worst[r] = std::max(worst[r], sol / data);
            }
        }
        res.h.push_back(mesh.h);
        for (double r : r_list) res.max_ratio[r].push_back(worst[r]);
    }
    return res;
}

}  // namespace cascade
