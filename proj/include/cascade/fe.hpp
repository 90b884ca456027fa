#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "cascade/mesh.hpp"
#include "cascade/quadrature.hpp"

namespace cascade {

/// Affine map of a straight triangle plus the constant barycentric gradients.
struct ElementMap {
    Vec2 a, b, c;
    double area = 0;
    Vec2 gl[3];  // physical gradients of l0, l1, l2

    ElementMap(const Mesh& m, int t) {
        a = m.vertices[m.triangles[t][0]];
        b = m.vertices[m.triangles[t][1]];
        c = m.vertices[m.triangles[t][2]];
        const double twoA = (b - a).cross(c - a);
        area = 0.5 * twoA;
        // grad l_i = rot90(opposite edge) / (2A), rot90(v) = (-v.y, v.x)
        auto perp = [](const Vec2& v) { return Vec2{-v.y, v.x}; };
        gl[0] = perp(c - b) * (1.0 / twoA);
        gl[1] = perp(a - c) * (1.0 / twoA);
        gl[2] = perp(b - a) * (1.0 / twoA);
    }

    Vec2 point(double l0, double l1, double l2) const { return a * l0 + b * l1 + c * l2; }
};

// P2 scalar basis, node order: v0 v1 v2, then midpoints of (0,1), (1,2), (2,0).
inline std::array<double, 6> p2_values(double l0, double l1, double l2) {
    return {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
            4 * l0 * l1,       4 * l1 * l2,       4 * l2 * l0};
}

inline std::array<Vec2, 6> p2_gradients(double l0, double l1, double l2, const ElementMap& em) {
    const Vec2 g0 = em.gl[0], g1 = em.gl[1], g2 = em.gl[2];
    return {g0 * (4 * l0 - 1),
            g1 * (4 * l1 - 1),
            g2 * (4 * l2 - 1),
            (g0 * l1 + g1 * l0) * 4.0,
            (g1 * l2 + g2 * l1) * 4.0,
            (g2 * l0 + g0 * l2) * 4.0};
}

inline std::array<double, 3> p1_values(double l0, double l1, double l2) {
    return {l0, l1, l2};
}

enum class DofKind : unsigned char { Free, Slave, Fixed };

/// Taylor-Hood degree-of-freedom bookkeeping on one mesh.
///
/// Velocity nodes are the vertices followed by the edge midpoints, two
/// components each (node k owns reduced dofs 2*r, 2*r+1). Pressure nodes are
/// the vertices. Constraints: nodes on the Dirichlet boundaries are Fixed,
/// nodes on Gamma^+ are Slaves of their Gamma^- translates (velocity and
/// pressure), Dirichlet taking precedence at the corners A-+. Reduced layout:
/// free velocity dofs first, then master pressure dofs.
struct DofMap {
    const Mesh* mesh = nullptr;

    std::vector<std::pair<int, int>> edges;       // sorted vertex pairs
    std::vector<std::array<int, 3>> tri_edges;    // per-triangle edge ids, local order 01,12,20
    int n_vertices = 0, n_edges = 0, n_nodes = 0;

    std::vector<Vec2> node_coords;

    std::vector<DofKind> vnode_kind;
    std::vector<int> vnode_master;       // for slaves: master node
    std::vector<int> vnode_reduced;      // for free nodes: node-level reduced index
    std::vector<int> vnode_tag;          // -1 or BoundaryTag of the governing Dirichlet part

    std::vector<DofKind> pnode_kind;
    std::vector<int> pnode_master;
    std::vector<int> pnode_reduced;
    int pinned_pressure_vertex = -1;     // only set when pin_pressure

    int n_free_vnodes = 0;
    int n_pressure_masters = 0;          // master pressure vertices (incl. a pinned one)
    int n_pressure_reduced = 0;          // masters minus pin

    int n_reduced() const { return 2 * n_free_vnodes + n_pressure_reduced; }
    int node_of_vertex(int v) const { return v; }
    int node_of_edge(int e) const { return n_vertices + e; }

    /// Reduced index of velocity component comp at node, or -1.
    int vdof(int node, int comp) const {
        int n = node;
        if (vnode_kind[n] == DofKind::Slave) n = vnode_master[n];
        if (vnode_kind[n] != DofKind::Free) return -1;
        return 2 * vnode_reduced[n] + comp;
    }

    /// Reduced index of the pressure dof at a vertex, or -1 (pinned).
    int pdof(int vertex) const {
        int v = vertex;
        if (pnode_kind[v] == DofKind::Slave) v = pnode_master[v];
        if (pnode_kind[v] != DofKind::Free) return -1;
        return 2 * n_free_vnodes + pnode_reduced[v];
    }

    /// Master pressure row index (0..n_pressure_masters), pinned row included.
    int pressure_master_row(int vertex) const {
        int v = vertex;
        if (pnode_kind[v] == DofKind::Slave) v = pnode_master[v];
        return pmaster_row_.at(v);
    }
    const std::vector<int>& pressure_master_vertices() const { return pmaster_vertices_; }

    static DofMap build(const Mesh& mesh, const std::set<BoundaryTag>& dirichlet_tags,
                        bool pin_pressure = false);

  private:
    std::map<int, int> pmaster_row_;
    std::vector<int> pmaster_vertices_;
};

inline DofMap DofMap::build(const Mesh& mesh, const std::set<BoundaryTag>& dirichlet_tags,
                            bool pin_pressure) {
    DofMap dm;
    dm.mesh = &mesh;
    dm.n_vertices = mesh.n_vertices();

    // edge table
    std::map<std::pair<int, int>, int> edge_id;
    dm.tri_edges.resize(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (int k = 0; k < 3; ++k) {
            int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto [it, inserted] = edge_id.try_emplace({key.first, key.second},
                                                      static_cast<int>(dm.edges.size()));
            if (inserted) dm.edges.push_back({key.first, key.second});
            dm.tri_edges[t][k] = it->second;
        }
    dm.n_edges = static_cast<int>(dm.edges.size());
    dm.n_nodes = dm.n_vertices + dm.n_edges;

    dm.node_coords.resize(dm.n_nodes);
    for (int v = 0; v < dm.n_vertices; ++v) dm.node_coords[v] = mesh.vertices[v];
    for (int e = 0; e < dm.n_edges; ++e)
        dm.node_coords[dm.n_vertices + e] =
            (mesh.vertices[dm.edges[e].first] + mesh.vertices[dm.edges[e].second]) * 0.5;

    dm.vnode_kind.assign(dm.n_nodes, DofKind::Free);
    dm.vnode_master.assign(dm.n_nodes, -1);
    dm.vnode_reduced.assign(dm.n_nodes, -1);
    dm.vnode_tag.assign(dm.n_nodes, -1);

    dm.pnode_kind.assign(dm.n_vertices, DofKind::Free);
    dm.pnode_master.assign(dm.n_vertices, -1);
    dm.pnode_reduced.assign(dm.n_vertices, -1);

    // Dirichlet: priority Inflow > Profile > Outflow when a node carries
    // several tags (only the corners do).
    auto tag_priority = [](BoundaryTag t) {
        switch (t) {
            case BoundaryTag::Inflow: return 3;
            case BoundaryTag::Profile: return 2;
            case BoundaryTag::Outflow: return 1;
            default: return 0;
        }
    };
    auto mark_dirichlet = [&](int node, BoundaryTag tag) {
        if (!dirichlet_tags.count(tag)) return;
        const int p = tag_priority(tag);
        if (dm.vnode_kind[node] == DofKind::Fixed &&
            tag_priority(static_cast<BoundaryTag>(dm.vnode_tag[node])) >= p)
            return;
        dm.vnode_kind[node] = DofKind::Fixed;
        dm.vnode_tag[node] = static_cast<int>(tag);
    };
    for (const auto& be : mesh.boundary_edges) {
        auto key = std::minmax(be.a, be.b);
        const int e = edge_id.at({key.first, key.second});
        mark_dirichlet(be.a, be.tag);
        mark_dirichlet(be.b, be.tag);
        mark_dirichlet(dm.node_of_edge(e), be.tag);
    }

    // Periodic slaves: vertex pairs from the mesh, edge pairs derived from the
    // translated boundary connectivity. Dirichlet wins at the corners A-+.
    std::map<int, int> up_of(mesh.periodic_pairs.begin(), mesh.periodic_pairs.end());
    auto enslave_vnode = [&dm](int slave, int master) {
        if (dm.vnode_kind[slave] == DofKind::Fixed) return;  // corner: Dirichlet precedence
        if (dm.vnode_kind[master] == DofKind::Slave)
            throw InvariantViolation("periodic chain detected");
        dm.vnode_kind[slave] = DofKind::Slave;
        dm.vnode_master[slave] = master;
    };
    for (const auto& [lo, up] : mesh.periodic_pairs) {
        enslave_vnode(up, lo);
        if (dm.pnode_kind[lo] == DofKind::Slave)
            throw InvariantViolation("periodic pressure chain detected");
        dm.pnode_kind[up] = DofKind::Slave;
        dm.pnode_master[up] = lo;
    }
    for (const auto& be : mesh.boundary_edges) {
        if (be.tag != BoundaryTag::Lower) continue;
        auto lo_key = std::minmax(be.a, be.b);
        auto up_key = std::minmax(up_of.at(be.a), up_of.at(be.b));
        const int elo = edge_id.at({lo_key.first, lo_key.second});
        auto it = edge_id.find({up_key.first, up_key.second});
        if (it == edge_id.end()) throw InvariantViolation("missing translated upper edge");
        enslave_vnode(dm.node_of_edge(it->second), dm.node_of_edge(elo));
    }

    // sanity: a velocity slave never points at a fixed or slave master
    for (int n = 0; n < dm.n_nodes; ++n)
        if (dm.vnode_kind[n] == DofKind::Slave &&
            dm.vnode_kind[dm.vnode_master[n]] != DofKind::Free)
            throw InvariantViolation("periodic slave has a non-free master");

    for (int n = 0; n < dm.n_nodes; ++n)
        if (dm.vnode_kind[n] == DofKind::Free) dm.vnode_reduced[n] = dm.n_free_vnodes++;

    for (int v = 0; v < dm.n_vertices; ++v)
        if (dm.pnode_kind[v] != DofKind::Slave) {
            dm.pmaster_row_[v] = static_cast<int>(dm.pmaster_vertices_.size());
            dm.pmaster_vertices_.push_back(v);
        }
    dm.n_pressure_masters = static_cast<int>(dm.pmaster_vertices_.size());

    if (pin_pressure) {
        dm.pinned_pressure_vertex = dm.pmaster_vertices_.front();
        dm.pnode_kind[dm.pinned_pressure_vertex] = DofKind::Fixed;
    }
    for (int v : dm.pmaster_vertices_)
        if (dm.pnode_kind[v] == DofKind::Free) dm.pnode_reduced[v] = dm.n_pressure_reduced++;

    return dm;
}

// ---------------------------------------------------------------------------
// Fields over a DofMap
// ---------------------------------------------------------------------------

/// Velocity-pressure coefficient pair over a DofMap. Periodic pairs hold by
/// construction (slaves are filled from masters on expansion) and Dirichlet
/// dofs carry the prescribed values.
struct MixedField {
    const DofMap* dofs = nullptr;
    std::shared_ptr<const DofMap> dofs_keepalive;  // set when the field outlives its creator
    std::vector<Vec2> velocity;    // per node
    std::vector<double> pressure;  // per vertex

    Vec2 velocity_at(int tri, double l0, double l1, double l2) const {
        const auto vals = p2_values(l0, l1, l2);
        Vec2 u{0, 0};
        for (int k = 0; k < 6; ++k) u += velocity[node_on(tri, k)] * vals[k];
        return u;
    }

    Mat2 velocity_gradient(int tri, double l0, double l1, double l2) const {
        const ElementMap em(*dofs->mesh, tri);
        const auto grads = p2_gradients(l0, l1, l2, em);
        Mat2 g = zero_mat2();
        for (int k = 0; k < 6; ++k) {
            const Vec2 u = velocity[node_on(tri, k)];
            g[0][0] += u.x * grads[k].x;
            g[0][1] += u.x * grads[k].y;
            g[1][0] += u.y * grads[k].x;
            g[1][1] += u.y * grads[k].y;
        }
        return g;
    }

    double pressure_at(int tri, double l0, double l1, double l2) const {
        const auto& t = dofs->mesh->triangles[tri];
        return pressure[t[0]] * l0 + pressure[t[1]] * l1 + pressure[t[2]] * l2;
    }

    int node_on(int tri, int local) const {
        const auto& t = dofs->mesh->triangles[tri];
        if (local < 3) return t[local];
        return dofs->node_of_edge(dofs->tri_edges[tri][local - 3]);
    }
};

/// Gradient of a scalar P2 coefficient vector on one element.
inline Vec2 scalar_p2_gradient(const DofMap& dm, const std::vector<double>& values, int tri,
                               double l0, double l1, double l2) {
    const ElementMap em(*dm.mesh, tri);
    const auto grads = p2_gradients(l0, l1, l2, em);
    const auto& t = dm.mesh->triangles[tri];
    Vec2 g{0, 0};
    for (int k = 0; k < 3; ++k) g += grads[k] * values[t[k]];
    for (int k = 0; k < 3; ++k)
        g += grads[3 + k] * values[dm.node_of_edge(dm.tri_edges[tri][k])];
    return g;
}

}  // namespace cascade
