#pragma once

#include <memory>
#include <tuple>

#include "cascade/assembly.hpp"

namespace cascade {

/// Smooth cutoff zeta(x1) with zeta(0) = 1, zeta == 0 on [delta, d]. Quintic
/// smoothstep, C2 at delta.
struct CutoffProfile {
    double delta = 0.0;

    double value(double x1) const {
        if (x1 <= 0) return 1.0;
        if (x1 >= delta) return 0.0;
        const double u = x1 / delta;
        const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        return 1.0 - s;
    }

    double derivative(double x1) const {
        if (x1 <= 0 || x1 >= delta) return 0.0;
        const double u = x1 / delta;
        return -30.0 * u * u * (1.0 - u) * (1.0 - u) / delta;
    }
};

/// Largest admissible cutoff support: strictly below the blade, shrunk by one
/// mesh cell; for blade-free domains the geometry margin.
inline double default_cutoff_delta(const CascadeGeometry& geom, double mesh_h) {
    if (geom.has_profile()) {
        const double dmin = geom.profile_min_x1() - mesh_h;
        if (dmin <= 0) throw CompatibilityFailure("mesh too coarse for the cutoff support");
        return dmin;
    }
    return geom.delta_margin;
}

namespace detail {

/// Scalar P2 space on a structured filled strip with periodic constraints and
/// one pinned node. Keeps both the unpinned master stiffness (for residual
/// checks) and the pinned factorization.
struct ScalarNeumannSpace {
    std::shared_ptr<CascadeGeometry> geom;  // blade-free copy
    std::shared_ptr<Mesh> mesh;
    std::shared_ptr<DofMap> dm;  // node tables + periodic slaves; no Dirichlet
    int n1 = 0, n2 = 0;

    std::vector<int> master_nodes;          // free nodes (slaves excluded)
    std::vector<int> master_index;          // node -> row, -1 for slaves
    int pinned_row = 0;
    SparseMat K;                            // master stiffness, unpinned
    std::unique_ptr<DirectFactorization> fact;

    ScalarNeumannSpace(const CascadeGeometry& g, int n1_, int n2_) : n1(n1_), n2(n2_) {
        geom = std::make_shared<CascadeGeometry>(g);
        geom->profile.reset();
        mesh = std::make_shared<Mesh>(generate_structured_mesh(*geom, n1, n2));
        dm = std::make_shared<DofMap>(DofMap::build(*mesh, {}, false));

        master_index.assign(dm->n_nodes, -1);
        for (int n = 0; n < dm->n_nodes; ++n)
            if (dm->vnode_kind[n] != DofKind::Slave) {
                master_index[n] = static_cast<int>(master_nodes.size());
                master_nodes.push_back(n);
            }
        const int M = static_cast<int>(master_nodes.size());

        std::vector<Eigen::Triplet<double>> trips;
        const auto& quad = triangle_rule(4);
        for (int t = 0; t < mesh->n_triangles(); ++t) {
            const ElementMap em(*mesh, t);
            int nodes[6];
            for (int k = 0; k < 3; ++k) nodes[k] = mesh->triangles[t][k];
            for (int k = 0; k < 3; ++k) nodes[3 + k] = dm->node_of_edge(dm->tri_edges[t][k]);
            double ke[6][6] = {};
            for (const auto& q : quad) {
                const auto gr = p2_gradients(q.l0, q.l1, q.l2, em);
                for (int i = 0; i < 6; ++i)
                    for (int j = 0; j < 6; ++j) ke[i][j] += q.w * em.area * gr[i].dot(gr[j]);
            }
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    trips.emplace_back(row_of(nodes[i]), row_of(nodes[j]), ke[i][j]);
        }
        K.resize(M, M);
        K.setFromTriplets(trips.begin(), trips.end());

        // symmetric pin: zero row/col, unit diagonal
        SparseMat Kp = K;
        for (int k = 0; k < Kp.outerSize(); ++k)
            for (SparseMat::InnerIterator it(Kp, k); it; ++it)
                if (it.row() == pinned_row || it.col() == pinned_row)
                    it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
        Kp.prune(0.0);
        fact = std::make_unique<DirectFactorization>(Kp);
    }

    int row_of(int node) const {
        if (dm->vnode_kind[node] == DofKind::Slave) node = dm->vnode_master[node];
        return master_index[node];
    }

    /// load[j] = (fn, q_j), degree-6 rule, folded onto masters
    Eigen::VectorXd assemble_load(const ScalarFn& fn) const {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(master_nodes.size());
        const auto& quad = triangle_rule(6);
        for (int t = 0; t < mesh->n_triangles(); ++t) {
            const ElementMap em(*mesh, t);
            int nodes[6];
            for (int k = 0; k < 3; ++k) nodes[k] = mesh->triangles[t][k];
            for (int k = 0; k < 3; ++k) nodes[3 + k] = dm->node_of_edge(dm->tri_edges[t][k]);
            for (const auto& q : quad) {
                const double fv = fn(em.point(q.l0, q.l1, q.l2));
                const auto nv = p2_values(q.l0, q.l1, q.l2);
                for (int i = 0; i < 6; ++i) b[row_of(nodes[i])] += q.w * em.area * fv * nv[i];
            }
        }
        return b;
    }

    /// Solve K phi = rhs with the pinned dof fixed to zero; returns full node values.
    std::vector<double> solve(Eigen::VectorXd rhs) const {
        rhs[pinned_row] = 0.0;
        const Eigen::VectorXd xm = fact->solve(rhs);
        std::vector<double> full(dm->n_nodes, 0.0);
        for (int n = 0; n < dm->n_nodes; ++n) {
            int m = n;
            if (dm->vnode_kind[n] == DofKind::Slave) m = dm->vnode_master[n];
            full[n] = xm[master_index[m]];
        }
        return full;
    }

    /// Locate the physical point in the structured strip; returns (triangle,
    /// barycentric coords), clamped to the closest element.
    std::tuple<int, double, double, double> locate(const Vec2& x) const {
        const double s = std::clamp(x.x, 0.0, geom->d);
        const double t = std::clamp(x.y - geom->lower_height(s), 0.0, geom->tau);
        int i = std::clamp(static_cast<int>(s / geom->d * n1), 0, n1 - 1);
        int j = std::clamp(static_cast<int>(t / geom->tau * n2), 0, n2 - 1);

        int best_t = -1;
        double bl0 = 0, bl1 = 0, bl2 = 0, best = -1e300;
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
                const int ii = i + di, jj = j + dj;
                if (ii < 0 || ii >= n1 || jj < 0 || jj >= n2) continue;
                for (int half = 0; half < 2; ++half) {
                    const int tri = 2 * (ii * n2 + jj) + half;
                    const ElementMap em(*mesh, tri);
                    const Vec2 r = x - em.a;
                    const Vec2 e1 = em.b - em.a, e2 = em.c - em.a;
                    const double det = e1.cross(e2);
                    const double l1 = r.cross(e2) / det;
                    const double l2 = e1.cross(r) / det;
                    const double l0 = 1.0 - l1 - l2;
                    const double m = std::min({l0, l1, l2});
                    if (m > best) {
                        best = m;
                        best_t = tri;
                        bl0 = l0;
                        bl1 = l1;
                        bl2 = l2;
                    }
                }
            }
        return {best_t, bl0, bl1, bl2};
    }
};

}  // namespace detail

/// Tensor field with row-wise prescribed divergence. Rows are gradients of
/// periodic Neumann-Poisson potentials plus an x1-dependent correction that
/// absorbs the mean of f:
///   L3: F_i = grad phi_i - alpha_i * zeta(x1) e1   (vanishing normal trace on Gamma_o)
///   L4: F_i = grad phi_i + alpha_i * x1 e1         (no trace clause)
/// The multiplier alpha_i is computed from the assembled loads so the discrete
/// Neumann compatibility is exact.
class TensorPotential {
  public:
    enum class Mode { L3, L4 };

    Mode mode = Mode::L3;
    Vec2 k{0, 0};                    // mean of f over the filled strip
    std::array<double, 2> alpha{0, 0};
    CutoffProfile cutoff;

    std::shared_ptr<detail::ScalarNeumannSpace> space;
    std::array<std::vector<double>, 2> phi;       // potentials, full node values
    std::array<Eigen::VectorXd, 2> load;          // (rho_i, q_j) over masters
    std::array<double, 2> raw_mean{0, 0};         // pre-correction discrete mean of f_i

    Vec2 eval_row(int i, const Vec2& x) const {
        const auto [tri, l0, l1, l2] = space->locate(x);
        Vec2 g = scalar_p2_gradient(*space->dm, phi[i], tri, l0, l1, l2);
        g.x += alpha[i] * correction(x.x);
        return g;
    }

    Mat2 eval(const Vec2& x) const {
        const auto [tri, l0, l1, l2] = space->locate(x);
        Mat2 F = zero_mat2();
        for (int i = 0; i < 2; ++i) {
            Vec2 g = scalar_p2_gradient(*space->dm, phi[i], tri, l0, l1, l2);
            g.x += alpha[i] * correction(x.x);
            F[i][0] = g.x;
            F[i][1] = g.y;
        }
        return F;
    }

    TensorFn evaluator() const {
        return [this](Vec2 x) { return eval(x); };
    }

    double correction(double x1) const {
        return mode == Mode::L3 ? -cutoff.value(x1) : x1;
    }
    double correction_derivative(double x1) const {
        return mode == Mode::L3 ? -cutoff.derivative(x1) : 1.0;
    }
};

namespace detail {

inline TensorPotential build_tensor_potential(const CascadeGeometry& geom, int n1, int n2,
                                              const VectorFn& f_in, TensorPotential::Mode mode,
                                              double delta) {
    TensorPotential tp;
    tp.mode = mode;
    tp.cutoff.delta = delta;
    tp.space = std::make_shared<ScalarNeumannSpace>(geom, n1, n2);

    // f extended by zero into the blade region P
    VectorFn f = f_in;
    if (geom.has_profile() && f_in) {
        const int nbp = 256;
        auto poly = std::make_shared<std::vector<Vec2>>();
        for (int kk = 0; kk < nbp; ++kk)
            poly->push_back(geom.profile->eval(static_cast<double>(kk) / nbp));
        f = [f_in, poly](Vec2 x) -> Vec2 {
            return point_in_polygon(*poly, x) ? Vec2{0, 0} : f_in(x);
        };
    }

    const double strip_area = geom.tau * geom.d;
    const Eigen::VectorXd corr_load = tp.space->assemble_load(
        [&tp](Vec2 x) { return tp.correction_derivative(x.x); });
    const double corr_sum = corr_load.sum();

    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd fl;
        if (f) {
            fl = tp.space->assemble_load(
                [&f, i](Vec2 x) { const Vec2 v = f(x); return i == 0 ? v.x : v.y; });
        } else {
            fl = Eigen::VectorXd::Zero(corr_load.size());
        }
        const double fsum = fl.sum();
        tp.raw_mean[i] = fsum / strip_area;
        (i == 0 ? tp.k.x : tp.k.y) = fsum / strip_area;
        tp.alpha[i] = (std::abs(corr_sum) > 0) ? fsum / corr_sum : 0.0;

        // rho_i = f_i - alpha_i * corr'; system (grad phi, grad q) = -(rho, q)
        tp.load[i] = fl - tp.alpha[i] * corr_load;
        const double scale = std::max(1.0, tp.load[i].cwiseAbs().sum());
        if (std::abs(tp.load[i].sum()) > 1e-10 * scale)
            throw CompatibilityFailure("Neumann load mean not removed by the cutoff correction");
        tp.phi[i] = tp.space->solve(-tp.load[i]);
    }
    return tp;
}

}  // namespace detail

/// Lemma-L3-type potential: div F = f weakly and F.n = 0 on Gamma_o (the
/// correction vanishes at x1 = d and the potentials carry no natural flux).
inline TensorPotential build_tensor_potential_L3(const CascadeGeometry& geom, int n1, int n2,
                                                 const VectorFn& f, double delta) {
    if (delta <= 0 || delta >= geom.d)
        throw CompatibilityFailure("cutoff support must satisfy 0 < delta < d");
    if (geom.has_profile() && delta >= geom.profile_min_x1())
        throw CompatibilityFailure("cutoff support reaches the blade");
    return detail::build_tensor_potential(geom, n1, n2, f, TensorPotential::Mode::L3, delta);
}

/// Lemma-L4-type potential: div F = f weakly; the mean is absorbed by an
/// x1-linear section field, so no outflow trace guarantee.
inline TensorPotential build_tensor_potential_L4(const CascadeGeometry& geom, int n1, int n2,
                                                 const VectorFn& f) {
    return detail::build_tensor_potential(geom, n1, n2, f, TensorPotential::Mode::L4,
                                          geom.d /*unused*/);
}

/// Residual of the discrete weak-divergence identity of row i against every
/// scalar test function (the construction's own quadrature defines the
/// pairing): max_j |(grad phi_i, grad q_j) + (f_i - alpha_i corr', q_j)|.
inline double weak_divergence_residual(const TensorPotential& tp, int row) {
    Eigen::VectorXd phim(tp.space->master_nodes.size());
    for (size_t m = 0; m < tp.space->master_nodes.size(); ++m)
        phim[m] = tp.phi[row][tp.space->master_nodes[m]];
    const Eigen::VectorXd r = tp.space->K * phim + tp.load[row];
    return r.cwiseAbs().maxCoeff();
}

/// Relative mean of the corrected Neumann load (compatibility bookkeeping).
inline double mean_compatibility_residual(const TensorPotential& tp, int row) {
    const double scale = std::max(1.0, tp.load[row].cwiseAbs().sum());
    return std::abs(tp.load[row].sum()) / scale;
}

/// Discrete normal trace of row i on Gamma_o: the variationally consistent
/// boundary flux at the outflow trace dofs, scaled to a pointwise value by the
/// lumped boundary mass. Zero to solver precision by construction.
inline double outflow_trace_max(const TensorPotential& tp, int row) {
    const Mesh& mesh = *tp.space->mesh;
    const DofMap& dm = *tp.space->dm;

    Eigen::VectorXd phim(tp.space->master_nodes.size());
    for (size_t m = 0; m < tp.space->master_nodes.size(); ++m)
        phim[m] = tp.phi[row][tp.space->master_nodes[m]];
    const Eigen::VectorXd r = tp.space->K * phim + tp.load[row];

    std::map<std::pair<int, int>, int> edge_id;
    for (int e = 0; e < dm.n_edges; ++e) edge_id[dm.edges[e]] = e;
    std::map<int, double> bmass;  // node -> int_{Gamma_o} q_node dl
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag != BoundaryTag::Outflow) continue;
        const double len = (mesh.vertices[be.b] - mesh.vertices[be.a]).norm();
        auto key = std::minmax(be.a, be.b);
        const int mid = dm.node_of_edge(edge_id.at({key.first, key.second}));
        bmass[be.a] += len / 6.0;
        bmass[be.b] += len / 6.0;
        bmass[mid] += 2.0 * len / 3.0;
    }
    double worst = 0;
    for (const auto& [node, mass] : bmass)
        worst = std::max(worst, std::abs(r[tp.space->row_of(node)]) / mass);
    return worst;
}

/// One-sided pointwise |F_row . n| at the outflow edge midpoints (diagnostic;
/// O(h^2), not zero).
inline double outflow_pointwise_trace(const TensorPotential& tp, int row) {
    const Mesh& mesh = *tp.space->mesh;
    double worst = 0;
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag != BoundaryTag::Outflow) continue;
        const Vec2 midpt = (mesh.vertices[be.a] + mesh.vertices[be.b]) * 0.5;
        worst = std::max(worst, std::abs(tp.eval_row(row, midpt).x));
    }
    return worst;
}

}  // namespace cascade
