#pragma once

#include <map>

#include "cascade/divsolve.hpp"
#include "cascade/lift.hpp"

namespace cascade {

struct SolverConfig {
    enum class Mode { Direct, Lifted };
    enum class Linear { DirectLU, Minres };

    double nu = 0.0;  // > 0 overrides the problem viscosity
    Mode mode = Mode::Direct;
    Linear linear = Linear::DirectLU;
    double tol = 1e-10;
    int max_iterations = 50000;
    std::vector<double> r_norms = {2.0};
};

struct SolveReport {
    MixedField solution;
    double flux_in = 0;   // Phi from the inflow data
    double flux_out = 0;  // int_{Gamma_o} u_h . n dl
    double pressure_constant = 0;          // c04
    double traction_residual = 0;          // ||T(u,p) - h||_{L2(Gamma_o)}, T = -nu du/dn + p n
    double traction_residual_minus_p = 0;  // same with the -p I convention, reported for comparison
    double periodicity_residual_p = 0;     // max |p difference| over periodic pairs
    double normal_derivative_periodicity = 0;
    std::map<double, double> velocity_w1r;  // r -> ||u||_{W^{1,r}}
    std::map<double, double> pressure_lr;   // r -> ||p||_{L^r}
    LinearSolveStats stats;
};

namespace detail {

/// Adjacent triangle and oriented local edge for every tagged boundary edge.
struct BoundaryAdjacency {
    struct Entry {
        int tri = -1;
        int a = -1, b = -1, mid = -1;  // nodes along the directed edge
        Vec2 normal;                    // outward unit normal
        double length = 0;
    };
    std::vector<Entry> entries;  // parallel to mesh.boundary_edges

    BoundaryAdjacency(const Mesh& mesh, const DofMap& dm) {
        std::map<std::pair<int, int>, std::pair<int, int>> owner;  // directed edge -> (tri, k)
        for (int t = 0; t < mesh.n_triangles(); ++t)
            for (int k = 0; k < 3; ++k)
                owner[{mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]}] = {t, k};
        entries.resize(mesh.boundary_edges.size());
        for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
            const auto& be = mesh.boundary_edges[i];
            auto it = owner.find({be.a, be.b});
            if (it == owner.end()) throw InvariantViolation("boundary edge without triangle");
            Entry e;
            e.tri = it->second.first;
            e.a = be.a;
            e.b = be.b;
            e.mid = dm.node_of_edge(dm.tri_edges[e.tri][it->second.second]);
            const Vec2 ev = mesh.vertices[be.b] - mesh.vertices[be.a];
            e.length = ev.norm();
            e.normal = Vec2{ev.y, -ev.x} * (1.0 / e.length);
            entries[i] = e;
        }
    }
};

inline std::array<double, 3> barycentric(const Mesh& mesh, int tri, const Vec2& x) {
    const ElementMap em(mesh, tri);
    const Vec2 e1 = em.b - em.a, e2 = em.c - em.a, r = x - em.a;
    const double det = e1.cross(e2);
    const double l1 = r.cross(e2) / det;
    const double l2 = e1.cross(r) / det;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace detail

/// int_{Gamma_o} u_h . n dl, exact for the quadratic trace.
inline double outflow_flux(const Mesh& mesh, const DofMap& dm, const MixedField& u) {
    detail::BoundaryAdjacency adj(mesh, dm);
    const auto& rule = segment_rule(5);
    double flux = 0;
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        if (mesh.boundary_edges[i].tag != BoundaryTag::Outflow) continue;
        const auto& e = adj.entries[i];
        for (const auto& q : rule) {
            const double sa = (1 - q.t) * (1 - 2 * q.t);
            const double sb = q.t * (2 * q.t - 1);
            const double sm = 4 * q.t * (1 - q.t);
            const Vec2 uv = u.velocity[e.a] * sa + u.velocity[e.b] * sb + u.velocity[e.mid] * sm;
            flux += q.w * e.length * uv.x;  // n = e1
        }
    }
    return flux;
}

/// c04 = (1/tau) int_{Gamma_o} [T(u,p) - h] . n dl with T = -nu du/dn + p n
/// (minus F.n in tensor mode); edge-midpoint quadrature and one-sided
/// gradients, as everywhere on the outflow.
inline double recover_pressure_constant(const Mesh& mesh, const MixedField& u,
                                        const StokesProblem& pb) {
    detail::BoundaryAdjacency adj(mesh, *u.dofs);
    double acc = 0;
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        if (mesh.boundary_edges[i].tag != BoundaryTag::Outflow) continue;
        const auto& e = adj.entries[i];
        const Vec2 mid = (mesh.vertices[e.a] + mesh.vertices[e.b]) * 0.5;
        const auto l = detail::barycentric(mesh, e.tri, mid);
        const Mat2 g = u.velocity_gradient(e.tri, l[0], l[1], l[2]);
        const double p = u.pressure_at(e.tri, l[0], l[1], l[2]);
        double tn = -pb.nu * g[0][0] + p;  // (T . n) with n = e1
        if (pb.forcing_mode == StokesProblem::Forcing::Tensor && pb.F) tn -= pb.F(mid)[0][0];
        const double hn = pb.outflow_h ? pb.outflow_h(mid).x : 0.0;
        acc += e.length * (tn - hn);
    }
    return acc / mesh.tau;
}

/// Fill the a posteriori diagnostics of a solved (or loaded) field.
inline void diagnostics(const Mesh& mesh, const StokesProblem& pb, const MixedField& u,
                        const SolverConfig& cfg, SolveReport& rep) {
    const DofMap& dm = *u.dofs;
    detail::BoundaryAdjacency adj(mesh, dm);

    rep.flux_in = compute_flux(mesh, pb.inflow_g);
    rep.flux_out = outflow_flux(mesh, dm, u);
    rep.pressure_constant = recover_pressure_constant(mesh, u, pb);

    // traction residual on Gamma_o, both pressure-sign conventions
    double acc_plus = 0, acc_minus = 0;
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        if (mesh.boundary_edges[i].tag != BoundaryTag::Outflow) continue;
        const auto& e = adj.entries[i];
        const Vec2 mid = (mesh.vertices[e.a] + mesh.vertices[e.b]) * 0.5;
        const auto l = detail::barycentric(mesh, e.tri, mid);
        const Mat2 g = u.velocity_gradient(e.tri, l[0], l[1], l[2]);
        const double p = u.pressure_at(e.tri, l[0], l[1], l[2]);
        Vec2 T{-pb.nu * g[0][0], -pb.nu * g[1][0]};  // -nu du/dn, n = e1
        if (pb.forcing_mode == StokesProblem::Forcing::Tensor && pb.F) {
            const Mat2 Fv = pb.F(mid);
            T.x -= Fv[0][0];
            T.y -= Fv[1][0];
        }
        const Vec2 hv = pb.outflow_h ? pb.outflow_h(mid) : Vec2{0, 0};
        const Vec2 rp = Vec2{T.x + p, T.y} - hv;
        const Vec2 rm = Vec2{T.x - p, T.y} - hv;
        acc_plus += e.length * rp.dot(rp);
        acc_minus += e.length * rm.dot(rm);
    }
    rep.traction_residual = std::sqrt(acc_plus);
    rep.traction_residual_minus_p = std::sqrt(acc_minus);

    // pressure periodicity (zero by construction for solved fields)
    for (const auto& [lo, up] : mesh.periodic_pairs)
        rep.periodicity_residual_p =
            std::max(rep.periodicity_residual_p, std::abs(u.pressure[lo] - u.pressure[up]));

    // normal-derivative periodicity across Gamma-+: du/dn(x + tau e2) + du/dn(x)
    std::map<int, int> up_of(mesh.periodic_pairs.begin(), mesh.periodic_pairs.end());
    std::map<std::pair<int, int>, size_t> upper_entry;
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i)
        if (mesh.boundary_edges[i].tag == BoundaryTag::Upper) {
            auto key = std::minmax(mesh.boundary_edges[i].a, mesh.boundary_edges[i].b);
            upper_entry[{key.first, key.second}] = i;
        }
    double acc_dn = 0;
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        if (mesh.boundary_edges[i].tag != BoundaryTag::Lower) continue;
        const auto& lo = adj.entries[i];
        auto key = std::minmax(up_of.at(mesh.boundary_edges[i].a),
                               up_of.at(mesh.boundary_edges[i].b));
        const auto& up = adj.entries[upper_entry.at({key.first, key.second})];

        const Vec2 mid_lo = (mesh.vertices[lo.a] + mesh.vertices[lo.b]) * 0.5;
        const Vec2 mid_up = mid_lo + Vec2{0.0, mesh.tau};
        const auto llo = detail::barycentric(mesh, lo.tri, mid_lo);
        const auto lup = detail::barycentric(mesh, up.tri, mid_up);
        const Mat2 glo = u.velocity_gradient(lo.tri, llo[0], llo[1], llo[2]);
        const Mat2 gup = u.velocity_gradient(up.tri, lup[0], lup[1], lup[2]);
        const Vec2 dn_lo{glo[0][0] * lo.normal.x + glo[0][1] * lo.normal.y,
                         glo[1][0] * lo.normal.x + glo[1][1] * lo.normal.y};
        const Vec2 dn_up{gup[0][0] * up.normal.x + gup[0][1] * up.normal.y,
                         gup[1][0] * up.normal.x + gup[1][1] * up.normal.y};
        const Vec2 sum = dn_lo + dn_up;  // opposite normals: periodicity means the sum vanishes
        acc_dn += lo.length * sum.dot(sum);
    }
    rep.normal_derivative_periodicity = std::sqrt(acc_dn);

    // volume norms
    const auto& rule = triangle_rule(6);
    for (double r : cfg.r_norms) {
        double su = 0, sp = 0;
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const ElementMap em(mesh, t);
            for (const auto& q : rule) {
                const Vec2 uv = u.velocity_at(t, q.l0, q.l1, q.l2);
                const Mat2 g = u.velocity_gradient(t, q.l0, q.l1, q.l2);
                const double p = u.pressure_at(t, q.l0, q.l1, q.l2);
                const double gn = std::sqrt(g[0][0] * g[0][0] + g[0][1] * g[0][1] +
                                            g[1][0] * g[1][0] + g[1][1] * g[1][1]);
                const double w = q.w * em.area;
                su += w * (std::pow(uv.norm(), r) + std::pow(gn, r));
                sp += w * std::pow(std::abs(p), r);
            }
        }
        rep.velocity_w1r[r] = std::pow(su, 1.0 / r);
        rep.pressure_lr[r] = std::pow(sp, 1.0 / r);
    }
}

/// Solve the discrete weak problem. Direct mode imposes g on Gamma_i in one
/// solve; Lifted mode solves for v = u - g~ with homogeneous Dirichlet data and
/// the lift moved to the right side. Both agree to factorization accuracy.
inline SolveReport solve(const Mesh& mesh, const StokesProblem& problem,
                         const SolverConfig& cfg = {}) {
    StokesProblem pb = problem;
    if (cfg.nu > 0) pb.nu = cfg.nu;
    if (pb.nu <= 0) throw SolveFailure("viscosity must be positive");

    auto dm_owner = std::make_shared<DofMap>(
        DofMap::build(mesh, {BoundaryTag::Inflow, BoundaryTag::Profile}, false));
    const DofMap& dm = *dm_owner;

    SolveReport rep;
    AssemblyOptions opt;
    LiftField lift;
    if (cfg.mode == SolverConfig::Mode::Lifted) {
        lift = build_lift(mesh, pb.inflow_g);
        opt.background_velocity = &lift.velocity;
        opt.extra_dirichlet = [](BoundaryTag, const Vec2&) { return Vec2{0, 0}; };
    }

    AssembledStokes as = assemble(mesh, pb, dm, opt);
    Eigen::VectorXd x;
    if (cfg.linear == SolverConfig::Linear::DirectLU)
        x = solve_direct(as.sys, &rep.stats);
    else
        x = solve_minres(as.sys, as.precond_diag, cfg.tol, cfg.max_iterations, &rep.stats);

    rep.solution = as.expand(x);
    rep.solution.dofs_keepalive = dm_owner;
    if (cfg.mode == SolverConfig::Mode::Lifted)
        for (int n = 0; n < dm.n_nodes; ++n) rep.solution.velocity[n] += lift.velocity[n];

    diagnostics(mesh, pb, rep.solution, cfg, rep);
    return rep;
}

}  // namespace cascade
