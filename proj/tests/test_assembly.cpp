#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>

#include "cascade/assembly.hpp"
#include "cascade/solver.hpp"

using namespace cascade;

namespace {

CascadeGeometry flat_strip() { return build_geometry({1.0, 2.0, {{0, 0}, {2, 0}}, {}, -1.0}); }

// Independent combinatorial count of the reduced dimension of a structured
// n1 x n2 strip with Dirichlet on Gamma_i and periodic folding:
//   vertices (n1+1)(n2+1), edges 3 n1 n2 + n1 + n2, velocity nodes V + E.
//   Dirichlet nodes: the inflow column, n2+1 vertices + n2 edge midpoints.
//   Slaves: top-row vertices and edges except the Dirichlet corner A+.
int expected_reduced_dim(int n1, int n2) {
    const int V = (n1 + 1) * (n2 + 1);
    const int E = 3 * n1 * n2 + n1 + n2;
    const int vel_nodes = V + E;
    const int dirichlet_nodes = (n2 + 1) + n2;
    const int slave_nodes = n1 /*top vertices minus A+*/ + n1 /*top edges*/;
    const int free_vnodes = vel_nodes - dirichlet_nodes - slave_nodes;
    const int pressure_masters = V - (n1 + 1);  // top row folds down
    return 2 * free_vnodes + pressure_masters;
}

}  // namespace

TEST_CASE("reduced dimension matches the combinatorial count") {
    const CascadeGeometry g = flat_strip();
    SECTION("4x2 regression constant") {
        const Mesh m = generate_structured_mesh(g, 4, 2);
        const DofMap dm = DofMap::build(m, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);
        REQUIRE(expected_reduced_dim(4, 2) == 74);  // frozen
        REQUIRE(dm.n_reduced() == 74);
    }
    SECTION("other sizes") {
        for (auto [n1, n2] : {std::pair{6, 3}, {8, 8}, {5, 7}}) {
            const Mesh m = generate_structured_mesh(g, n1, n2);
            const DofMap dm =
                DofMap::build(m, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);
            REQUIRE(dm.n_reduced() == expected_reduced_dim(n1, n2));
        }
    }
}

TEST_CASE("assembled saddle matrix is symmetric") {
    const CascadeGeometry g = build_geometry({1.0, 2.0, {{0, 0}, {1, 0.2}, {2, 0}}, {}, -1.0});
    const Mesh m = generate_mesh(g, 0.17);
    const DofMap dm = DofMap::build(m, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);
    StokesProblem pb;
    pb.nu = 0.7;
    pb.inflow_g = [](Vec2 x) { return Vec2{std::sin(2 * M_PI * x.y), 0.0}; };
    const AssembledStokes as = assemble(m, pb, dm);
    REQUIRE(as.sys.symmetry_error() <= 1e-12);
    REQUIRE(as.sys.dim() == dm.n_reduced());
}

TEST_CASE("zero data produce an identically zero right side") {
    const Mesh m = generate_structured_mesh(flat_strip(), 6, 3);
    const DofMap dm = DofMap::build(m, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);
    const StokesProblem pb;  // all callbacks null
    const AssembledStokes as = assemble(m, pb, dm);
    REQUIRE(as.sys.rhs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant tensor forcing is orthogonal to interior test fields") {
    const Mesh m = generate_structured_mesh(flat_strip(), 8, 4);
    const DofMap dm = DofMap::build(m, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);
    StokesProblem pb;
    pb.forcing_mode = StokesProblem::Forcing::Tensor;
    pb.F = [](Vec2) {
        Mat2 F;
        F[0][0] = 1.3;
        F[0][1] = -0.4;
        F[1][0] = 0.25;
        F[1][1] = 2.0;
        return F;
    };
    const AssembledStokes as = assemble(m, pb, dm);

    // w vanishing on all of the boundary: keep only interior velocity nodes
    std::set<int> boundary_nodes;
    std::map<std::pair<int, int>, int> edge_id;
    for (int e = 0; e < dm.n_edges; ++e) edge_id[dm.edges[e]] = e;
    for (const auto& be : m.boundary_edges) {
        boundary_nodes.insert(be.a);
        boundary_nodes.insert(be.b);
        auto key = std::minmax(be.a, be.b);
        boundary_nodes.insert(dm.node_of_edge(edge_id.at({key.first, key.second})));
    }
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(as.sys.dim());
    for (int n = 0; n < dm.n_nodes; ++n) {
        if (boundary_nodes.count(n)) continue;
        const int rx = dm.vdof(n, 0), ry = dm.vdof(n, 1);
        if (rx >= 0) w[rx] = U(rng);
        if (ry >= 0) w[ry] = U(rng);
    }
    // divergence-theorem cancellation of a constant tensor against grad w
    REQUIRE(std::abs(as.sys.rhs.dot(w)) <= 1e-12 * w.cwiseAbs().sum());
}

TEST_CASE("matrix-market dump is parseable") {
    const Mesh m = generate_structured_mesh(flat_strip(), 3, 2);
    const DofMap dm = DofMap::build(m, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);
    const AssembledStokes as = assemble(m, StokesProblem{}, dm);
    const std::string path = "/tmp/cascade_mm_test.mtx";
    as.sys.write_matrix_market(path);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    REQUIRE(header == "%%MatrixMarket matrix coordinate real general");
    long long rows, cols, nnz;
    is >> rows >> cols >> nnz;
    REQUIRE(rows == dm.n_reduced());
    REQUIRE(nnz == as.sys.A.nonZeros());
    std::remove(path.c_str());
}

TEST_CASE("dirichlet corner conflict is detected") {
    const Mesh m = generate_structured_mesh(flat_strip(), 4, 2);
    const DofMap dm = DofMap::build(m, {BoundaryTag::Inflow, BoundaryTag::Profile}, false);
    StokesProblem pb;
    pb.inflow_g = [](Vec2 x) { return Vec2{x.y, 0.0}; };  // g(A-) != g(A+)
    REQUIRE_THROWS_AS(assemble(m, pb, dm), ConstraintConflict);
}
