#pragma once

#include <map>
#include <vector>

#include "cascade/fe.hpp"
#include "cascade/sparse.hpp"

namespace cascade {

/// Data of the boundary-value problem. Null callbacks mean identically zero.
struct StokesProblem {
    enum class Forcing { Vector, Tensor };

    double nu = 1.0;
    Forcing forcing_mode = Forcing::Vector;
    VectorFn f;         // body force (Vector mode)
    TensorFn F;         // divergence potential (Tensor mode): rhs(w) = -(F, grad w)
    VectorFn inflow_g;  // Dirichlet data on Gamma_i
    VectorFn outflow_h; // natural data on Gamma_o
};

struct AssemblyOptions {
    /// Dirichlet resolver override for auxiliary solves (lift prescribes Gamma_o).
    std::function<Vec2(BoundaryTag, const Vec2&)> extra_dirichlet;
    /// Known full velocity field subtracted through the operator (lifted mode).
    const std::vector<Vec2>* background_velocity = nullptr;
};

/// Assembled saddle-point system together with the bookkeeping needed to
/// expand reduced solutions back to full Taylor-Hood coefficients.
struct AssembledStokes {
    SparseSystem sys;
    const DofMap* dofs = nullptr;
    std::vector<Vec2> fixed_velocity;  // per node; valid where vnode_kind == Fixed
    Eigen::VectorXd precond_diag;      // stiffness diag + lumped pressure mass

    MixedField expand(const Eigen::VectorXd& reduced) const {
        const DofMap& dm = *dofs;
        MixedField f;
        f.dofs = dofs;
        f.velocity.resize(dm.n_nodes);
        f.pressure.assign(dm.n_vertices, 0.0);
        for (int n = 0; n < dm.n_nodes; ++n) {
            int m = n;
            if (dm.vnode_kind[n] == DofKind::Slave) m = dm.vnode_master[n];
            if (dm.vnode_kind[m] == DofKind::Fixed) f.velocity[n] = fixed_velocity[m];
            else f.velocity[n] = {reduced[2 * dm.vnode_reduced[m]], reduced[2 * dm.vnode_reduced[m] + 1]};
        }
        for (int v = 0; v < dm.n_vertices; ++v) {
            int m = v;
            if (dm.pnode_kind[v] == DofKind::Slave) m = dm.pnode_master[v];
            f.pressure[v] = dm.pnode_kind[m] == DofKind::Fixed ? 0.0
                                                               : reduced[dm.pdof(m)];
        }
        return f;
    }
};

namespace detail {

inline Vec2 dirichlet_value(const StokesProblem& pb, const AssemblyOptions& opt,
                            BoundaryTag tag, const Vec2& x) {
    if (opt.extra_dirichlet) return opt.extra_dirichlet(tag, x);
    if (tag == BoundaryTag::Inflow) return pb.inflow_g ? pb.inflow_g(x) : Vec2{0, 0};
    return {0, 0};  // no-slip on the profile
}

}  // namespace detail

/// Assemble the reduced Taylor-Hood system for
///   nu (grad u, grad w) - (p, div w) = (f, w) [or -(F, grad w)] - (h, w)_Gamma_o
///   -(q, div u) = 0
/// with symmetric Dirichlet elimination and periodic slave folding. The sign
/// of the outflow functional realizes the do-nothing convention
/// -nu du/dn + p n = h (integration by parts of the momentum equation).
/// The stored matrix is symmetric; stiffness and divergence terms use the
/// degree-4 rule, data terms the degree-6 rule.
inline AssembledStokes assemble(const Mesh& mesh, const StokesProblem& pb, const DofMap& dm,
                                const AssemblyOptions& opt = {},
                                const SparseMat* reuse_matrix = nullptr) {
    AssembledStokes out;
    out.dofs = &dm;
    const int N = dm.n_reduced();
    out.sys.rhs = Eigen::VectorXd::Zero(N);

    // Dirichlet values at fixed nodes
    out.fixed_velocity.assign(dm.n_nodes, Vec2{0, 0});
    for (int n = 0; n < dm.n_nodes; ++n)
        if (dm.vnode_kind[n] == DofKind::Fixed)
            out.fixed_velocity[n] = detail::dirichlet_value(
                pb, opt, static_cast<BoundaryTag>(dm.vnode_tag[n]), dm.node_coords[n]);

    // Consistency at the periodic corners: both endpoints fixed means the pair
    // must carry the same value (g(A-) = g(A+)); the upper value is then
    // forced equal so stored coefficients match exactly.
    for (const auto& [lo, up] : mesh.periodic_pairs)
        if (dm.vnode_kind[lo] == DofKind::Fixed && dm.vnode_kind[up] == DofKind::Fixed) {
            const Vec2 d = out.fixed_velocity[lo] - out.fixed_velocity[up];
            const double scale = std::max({1.0, out.fixed_velocity[lo].norm(),
                                           out.fixed_velocity[up].norm()});
            if (d.norm() > 1e-10 * scale)
                throw ConstraintConflict("inconsistent Dirichlet values at a periodic corner pair");
            out.fixed_velocity[up] = out.fixed_velocity[lo];
        }

    const bool lifted = opt.background_velocity != nullptr;
    const auto& quad_a = triangle_rule(4);
    const auto& quad_f = triangle_rule(6);
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd lumped_pmass = Eigen::VectorXd::Zero(dm.n_vertices);

    // reduced index of local velocity dof (node, comp), or -1 when constrained
    auto vred = [&dm](int node, int comp) { return dm.vdof(node, comp); };

    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementMap em(mesh, t);
        int nodes[6];
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) nodes[k] = tri[k];
        for (int k = 0; k < 3; ++k) nodes[3 + k] = dm.node_of_edge(dm.tri_edges[t][k]);

        double la[6][6] = {};    // (grad Ni, grad Nj)
        double lb[6][2][3] = {}; // -(Pk, d_c Ni)
        for (const auto& q : quad_a) {
            const auto g = p2_gradients(q.l0, q.l1, q.l2, em);
            const auto pv = p1_values(q.l0, q.l1, q.l2);
            const double w = q.w * em.area;
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) la[i][j] += w * g[i].dot(g[j]);
            for (int i = 0; i < 6; ++i)
                for (int k = 0; k < 3; ++k) {
                    lb[i][0][k] -= w * pv[k] * g[i].x;
                    lb[i][1][k] -= w * pv[k] * g[i].y;
                }
        }
        for (int k = 0; k < 3; ++k) lumped_pmass[tri[k]] += em.area / 3.0;

        // "known" part of the velocity seen by this element: Dirichlet values
        // plus, in lifted mode, the background field at every node.
        Vec2 known[6];
        bool any_known = false;
        for (int i = 0; i < 6; ++i) {
            known[i] = {0, 0};
            if (dm.vnode_kind[nodes[i]] == DofKind::Fixed) {
                known[i] = out.fixed_velocity[nodes[i]];
                any_known = true;
            }
            if (lifted) {
                known[i] += (*opt.background_velocity)[nodes[i]];
                any_known = true;
            }
        }

        for (int i = 0; i < 6; ++i)
            for (int c = 0; c < 2; ++c) {
                const int ri = vred(nodes[i], c);
                if (ri < 0) continue;
                if (!reuse_matrix) {
                    for (int j = 0; j < 6; ++j) {
                        const int rj = vred(nodes[j], c);
                        if (rj >= 0) trips.emplace_back(ri, rj, pb.nu * la[i][j]);
                    }
                    for (int k = 0; k < 3; ++k) {
                        const int rk = dm.pdof(tri[k]);
                        if (rk >= 0) {
                            trips.emplace_back(ri, rk, lb[i][c][k]);
                            trips.emplace_back(rk, ri, lb[i][c][k]);
                        }
                    }
                }
                if (any_known)
                    for (int j = 0; j < 6; ++j)
                        out.sys.rhs[ri] -= pb.nu * la[i][j] *
                                           (c == 0 ? known[j].x : known[j].y);
            }
        if (any_known)
            for (int k = 0; k < 3; ++k) {
                const int rk = dm.pdof(tri[k]);
                if (rk < 0) continue;
                for (int j = 0; j < 6; ++j)
                    for (int c = 0; c < 2; ++c)
                        out.sys.rhs[rk] -= lb[j][c][k] * (c == 0 ? known[j].x : known[j].y);
            }

        // volume forcing
        if (pb.forcing_mode == StokesProblem::Forcing::Vector && pb.f) {
            for (const auto& q : quad_f) {
                const Vec2 x = em.point(q.l0, q.l1, q.l2);
                const Vec2 fv = pb.f(x);
                const auto nv = p2_values(q.l0, q.l1, q.l2);
                const double w = q.w * em.area;
                for (int i = 0; i < 6; ++i) {
                    const int rx = vred(nodes[i], 0), ry = vred(nodes[i], 1);
                    if (rx >= 0) out.sys.rhs[rx] += w * fv.x * nv[i];
                    if (ry >= 0) out.sys.rhs[ry] += w * fv.y * nv[i];
                }
            }
        } else if (pb.forcing_mode == StokesProblem::Forcing::Tensor && pb.F) {
            for (const auto& q : quad_f) {
                const Vec2 x = em.point(q.l0, q.l1, q.l2);
                const Mat2 Fv = pb.F(x);
                const auto g = p2_gradients(q.l0, q.l1, q.l2, em);
                const double w = q.w * em.area;
                for (int i = 0; i < 6; ++i) {
                    const int rx = vred(nodes[i], 0), ry = vred(nodes[i], 1);
                    if (rx >= 0) out.sys.rhs[rx] -= w * (Fv[0][0] * g[i].x + Fv[0][1] * g[i].y);
                    if (ry >= 0) out.sys.rhs[ry] -= w * (Fv[1][0] * g[i].x + Fv[1][1] * g[i].y);
                }
            }
        }
    }

    // natural outflow term <h, w> on Gamma_o
    if (pb.outflow_h) {
        std::map<std::pair<int, int>, int> edge_id;
        for (int e = 0; e < dm.n_edges; ++e) edge_id[dm.edges[e]] = e;
        const auto& srule = segment_rule(9);
        for (const auto& be : mesh.boundary_edges) {
            if (be.tag != BoundaryTag::Outflow) continue;
            const Vec2 pa = mesh.vertices[be.a], pbv = mesh.vertices[be.b];
            const double len = (pbv - pa).norm();
            auto key = std::minmax(be.a, be.b);
            const int mid = dm.node_of_edge(edge_id.at({key.first, key.second}));
            for (const auto& q : srule) {
                const Vec2 x = pa + (pbv - pa) * q.t;
                const Vec2 hv = pb.outflow_h(x);
                const double sa = (1 - q.t) * (1 - 2 * q.t);
                const double sb = q.t * (2 * q.t - 1);
                const double sm = 4 * q.t * (1 - q.t);
                const int idx[3] = {be.a, be.b, mid};
                const double sh[3] = {sa, sb, sm};
                for (int k = 0; k < 3; ++k)
                    for (int c = 0; c < 2; ++c) {
                        const int r = vred(idx[k], c);
                        if (r >= 0)
                            out.sys.rhs[r] -= q.w * len * (c == 0 ? hv.x : hv.y) * sh[k];
                    }
            }
        }
    }

    if (reuse_matrix) {
        out.sys.A = *reuse_matrix;
    } else {
        out.sys.A.resize(N, N);
        out.sys.A.setFromTriplets(trips.begin(), trips.end());
    }

    // fold slave lumped mass onto masters before building the preconditioner
    for (int v = 0; v < dm.n_vertices; ++v)
        if (dm.pnode_kind[v] == DofKind::Slave) {
            lumped_pmass[dm.pnode_master[v]] += lumped_pmass[v];
            lumped_pmass[v] = 0;
        }
    out.precond_diag = Eigen::VectorXd::Ones(N);
    const Eigen::VectorXd diag = out.sys.A.diagonal();
    for (int i = 0; i < 2 * dm.n_free_vnodes; ++i) out.precond_diag[i] = diag[i];
    for (int v = 0; v < dm.n_vertices; ++v) {
        if (dm.pnode_kind[v] == DofKind::Slave) continue;
        const int r = dm.pdof(v);
        if (r >= 0) out.precond_diag[r] = lumped_pmass[v];
    }
    return out;
}

/// Divergence pairing rows over all master pressure vertices (pinned row
/// included) against full velocity coefficients: D(row, 2*node+c) = (P_row, d_c N_node).
/// Slave velocity columns are folded onto their masters so the rows act on
/// expanded fields.
inline SparseMat assemble_divergence_rows(const Mesh& mesh, const DofMap& dm) {
    std::vector<Eigen::Triplet<double>> trips;
    const auto& quad = triangle_rule(4);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementMap em(mesh, t);
        const auto& tri = mesh.triangles[t];
        int nodes[6];
        for (int k = 0; k < 3; ++k) nodes[k] = tri[k];
        for (int k = 0; k < 3; ++k) nodes[3 + k] = dm.node_of_edge(dm.tri_edges[t][k]);
        for (const auto& q : quad) {
            const auto g = p2_gradients(q.l0, q.l1, q.l2, em);
            const auto pv = p1_values(q.l0, q.l1, q.l2);
            const double w = q.w * em.area;
            for (int k = 0; k < 3; ++k) {
                const int row = dm.pressure_master_row(tri[k]);
                for (int i = 0; i < 6; ++i) {
                    int n = nodes[i];
                    if (dm.vnode_kind[n] == DofKind::Slave) n = dm.vnode_master[n];
                    trips.emplace_back(row, 2 * n + 0, w * pv[k] * g[i].x);
                    trips.emplace_back(row, 2 * n + 1, w * pv[k] * g[i].y);
                }
            }
        }
    }
    SparseMat D(dm.n_pressure_masters, 2 * dm.n_nodes);
    D.setFromTriplets(trips.begin(), trips.end());
    return D;
}

/// max_k |(P_k, div u)| over all master pressure tests, for an expanded field.
inline double max_weak_divergence_residual(const SparseMat& D, const DofMap& dm,
                                           const std::vector<Vec2>& velocity) {
    Eigen::VectorXd u(2 * dm.n_nodes);
    for (int n = 0; n < dm.n_nodes; ++n) {
        u[2 * n] = velocity[n].x;
        u[2 * n + 1] = velocity[n].y;
    }
    const Eigen::VectorXd r = D * u;
    return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

/// Integrate a scalar function over the mesh with the rule of the given
/// exactness degree (2, 4 or 6).
inline double quadrature_integrate(const Mesh& mesh, const ScalarFn& fn, int order) {
    const auto& rule = triangle_rule(order);
    double s = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementMap em(mesh, t);
        for (const auto& q : rule) s += q.w * em.area * fn(em.point(q.l0, q.l1, q.l2));
    }
    return s;
}

}  // namespace cascade
