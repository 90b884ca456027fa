#pragma once

#include <memory>

#include "cascade/assembly.hpp"

namespace cascade {

/// Net volumetric inflow Phi = -int_{Gamma_i} g . n dl; the outer normal on
/// Gamma_i is (-1, 0), so Phi = int_{Gamma_i} g_1 dl. Composite 5-point Gauss
/// per inflow edge (degree 9).
inline double compute_flux(const Mesh& mesh, const VectorFn& g) {
    if (!g) return 0.0;
    const auto& rule = segment_rule(9);
    double phi = 0;
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag != BoundaryTag::Inflow) continue;
        const Vec2 a = mesh.vertices[be.a], b = mesh.vertices[be.b];
        const double len = (b - a).norm();
        for (const auto& q : rule) phi += q.w * len * g(a + (b - a) * q.t).x;
    }
    return phi;
}

/// Divergence-free extension of the inflow data: g on Gamma_i, zero on
/// Gamma_w, (Phi/tau) e_1 on Gamma_o, periodic across Gamma-+, with a weakly
/// vanishing divergence.
struct LiftField {
    std::shared_ptr<DofMap> dofs;       // aux dof map (full velocity Dirichlet, pinned pressure)
    std::vector<Vec2> velocity;         // per node
    double flux = 0.0;                  // Phi
    std::string construction = "auxiliary-stokes";

    struct Residuals {
        double inflow_trace = 0;        // max |g~ - g| over Gamma_i nodes
        double profile_trace = 0;       // max |g~| over Gamma_w nodes
        double periodic_mismatch = 0;   // max stored-coefficient gap over pairs
        double outflow_trace = 0;       // max |g~ - (Phi/tau) e1| over Gamma_o nodes
        double weak_divergence = 0;     // max_k |(P_k, div g~)|
    };
};

/// Build the lift as the velocity of an auxiliary Stokes solve with full
/// Dirichlet data and zero forcing. The construction is linear in g and
/// reproduces constants exactly.
inline LiftField build_lift(const Mesh& mesh, const VectorFn& g) {
    // Lemma hypothesis g(A-) = g(A+): locate the inflow corners through the
    // periodic pairing and compare data values.
    if (g) {
        std::set<int> inflow_vertices;
        for (const auto& be : mesh.boundary_edges)
            if (be.tag == BoundaryTag::Inflow) {
                inflow_vertices.insert(be.a);
                inflow_vertices.insert(be.b);
            }
        for (const auto& [lo, up] : mesh.periodic_pairs)
            if (inflow_vertices.count(lo) && inflow_vertices.count(up)) {
                const Vec2 glo = g(mesh.vertices[lo]), gup = g(mesh.vertices[up]);
                const double scale = std::max({1.0, glo.norm(), gup.norm()});
                if ((glo - gup).norm() > 1e-10 * scale)
                    throw IncompatibleCorners("g(A-) != g(A+)");
            }
    }

    const double phi = compute_flux(mesh, g);
    const double uo = phi / mesh.tau;

    auto dm = std::make_shared<DofMap>(DofMap::build(
        mesh, {BoundaryTag::Inflow, BoundaryTag::Profile, BoundaryTag::Outflow},
        /*pin_pressure=*/true));

    StokesProblem pb;
    pb.nu = 1.0;
    pb.inflow_g = g;
    AssemblyOptions opt;
    opt.extra_dirichlet = [&g, uo](BoundaryTag tag, const Vec2& x) -> Vec2 {
        switch (tag) {
            case BoundaryTag::Inflow: return g ? g(x) : Vec2{0, 0};
            case BoundaryTag::Outflow: return {uo, 0.0};
            default: return {0, 0};
        }
    };

    auto as = assemble(mesh, pb, *dm, opt);
    Eigen::VectorXd x;
    if (as.sys.dim() > 0) x = solve_direct(as.sys);
    else x = Eigen::VectorXd();
    MixedField mf = as.expand(x);

    LiftField lf;
    lf.dofs = dm;
    lf.velocity = std::move(mf.velocity);
    lf.flux = phi;
    return lf;
}

/// The five stated trace/periodicity/divergence residuals of a lift.
inline LiftField::Residuals lift_residuals(const Mesh& mesh, const LiftField& lf,
                                           const VectorFn& g) {
    const DofMap& dm = *lf.dofs;
    LiftField::Residuals r;
    const double uo = lf.flux / mesh.tau;

    for (int n = 0; n < dm.n_nodes; ++n) {
        if (dm.vnode_kind[n] != DofKind::Fixed) continue;
        const auto tag = static_cast<BoundaryTag>(dm.vnode_tag[n]);
        const Vec2 v = lf.velocity[n];
        if (tag == BoundaryTag::Inflow)
            r.inflow_trace = std::max(r.inflow_trace,
                                      (v - (g ? g(dm.node_coords[n]) : Vec2{0, 0})).norm());
        else if (tag == BoundaryTag::Profile)
            r.profile_trace = std::max(r.profile_trace, v.norm());
        else if (tag == BoundaryTag::Outflow)
            r.outflow_trace = std::max(r.outflow_trace, (v - Vec2{uo, 0.0}).norm());
    }
    for (const auto& [lo, up] : mesh.periodic_pairs)
        r.periodic_mismatch = std::max(r.periodic_mismatch,
                                       (lf.velocity[lo] - lf.velocity[up]).norm());

    const SparseMat D = assemble_divergence_rows(mesh, dm);
    r.weak_divergence = max_weak_divergence_residual(D, dm, lf.velocity);
    return r;
}

/// Outflow flux of the lift itself (should equal Phi).
inline double lift_outflow_flux(const Mesh& mesh, const LiftField& lf) {
    const DofMap& dm = *lf.dofs;
    std::map<std::pair<int, int>, int> edge_id;
    for (int e = 0; e < dm.n_edges; ++e) edge_id[dm.edges[e]] = e;
    const auto& rule = segment_rule(5);
    double flux = 0;
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag != BoundaryTag::Outflow) continue;
        const Vec2 a = mesh.vertices[be.a], b = mesh.vertices[be.b];
        const double len = (b - a).norm();
        auto key = std::minmax(be.a, be.b);
        const int mid = dm.node_of_edge(edge_id.at({key.first, key.second}));
        for (const auto& q : rule) {
            const double sa = (1 - q.t) * (1 - 2 * q.t);
            const double sb = q.t * (2 * q.t - 1);
            const double sm = 4 * q.t * (1 - q.t);
            const double u1 = lf.velocity[be.a].x * sa + lf.velocity[be.b].x * sb +
                              lf.velocity[mid].x * sm;
            flux += q.w * len * u1;  // n = e1 on Gamma_o
        }
    }
    return flux;
}

/// W^{1,2} norm of the lift, used to scale the weak-divergence tolerance and
/// to report the empirical stability constant of the construction.
inline double lift_h1_norm(const Mesh& mesh, const LiftField& lf) {
    MixedField mf;
    mf.dofs = lf.dofs.get();
    mf.velocity = lf.velocity;
    const auto& rule = triangle_rule(6);
    double acc = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementMap em(mesh, t);
        for (const auto& q : rule) {
            const Vec2 u = mf.velocity_at(t, q.l0, q.l1, q.l2);
            const Mat2 gu = mf.velocity_gradient(t, q.l0, q.l1, q.l2);
            const double g2 = gu[0][0] * gu[0][0] + gu[0][1] * gu[0][1] +
                              gu[1][0] * gu[1][0] + gu[1][1] * gu[1][1];
            acc += q.w * em.area * (u.dot(u) + g2);
        }
    }
    return std::sqrt(acc);
}

}  // namespace cascade
