#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cascade/mesh.hpp"
#include "cascade/mesh_io.hpp"

using namespace cascade;

namespace {

CascadeGeometry flat_strip() { return build_geometry({1.0, 2.0, {{0, 0}, {2, 0}}, {}, -1.0}); }

CascadeGeometry bladed_strip() {
    GeometryParams p;
    p.tau = 1.0;
    p.d = 2.0;
    p.lower_points = {{0, 0}, {2, 0}};
    for (int k = 0; k < 24; ++k) {
        const double th = 2 * M_PI * k / 24;
        p.profile_points.push_back({1.0 + 0.3 * std::cos(th), 0.5 + 0.1 * std::sin(th)});
    }
    return build_geometry(p);
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("structured 4x2 strip has the counted entities") {
    const Mesh m = generate_structured_mesh(flat_strip(), 4, 2);
    REQUIRE(m.n_vertices() == 15);
    REQUIRE(m.n_triangles() == 16);
    REQUIRE(m.periodic_pairs.size() == 5);
    REQUIRE(m.area() == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("triangle areas partition the domain") {
    const Mesh m = generate_structured_mesh(flat_strip(), 9, 5);
    double s = 0;
    for (int t = 0; t < m.n_triangles(); ++t) s += m.signed_area(t);
    REQUIRE(s == Catch::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("refinement by 2 roughly quadruples the vertex count") {
    const CascadeGeometry g = flat_strip();
    const Mesh coarse = generate_mesh(g, 0.2);
    const Mesh fine = generate_mesh(g, 0.1);
    const double ratio = static_cast<double>(fine.n_vertices()) / coarse.n_vertices();
    REQUIRE(ratio > 3.2);
    REQUIRE(ratio < 4.8);
    REQUIRE(fine.h <= 1.5 * 0.1);
}

TEST_CASE("periodic pairing is an exact translate and a bijection") {
    const CascadeGeometry g =
        build_geometry({0.75, 2.0, {{0, 0}, {1, 0.2}, {2, 0}}, {}, -1.0});
    const Mesh m = generate_mesh(g, 0.11);
    REQUIRE_NOTHROW(m.validate());
    for (const auto& [lo, up] : m.periodic_pairs) {
        const Vec2 dv = m.vertices[up] - m.vertices[lo];
        REQUIRE(std::abs(dv.x) <= 1e-12 * g.tau);
        REQUIRE(std::abs(dv.y - g.tau) <= 1e-12 * g.tau);
    }
}

TEST_CASE("bladed Delaunay mesh satisfies the invariants") {
    const CascadeGeometry g = bladed_strip();
    const Mesh m = generate_mesh(g, 0.08);
    REQUIRE_NOTHROW(m.validate());

    int n_profile = 0;
    for (const auto& be : m.boundary_edges)
        if (be.tag == BoundaryTag::Profile) ++n_profile;
    REQUIRE(n_profile >= 8);

    // tags agree with the geometric classifier at edge midpoints
    for (const auto& be : m.boundary_edges) {
        const Vec2 mid = (m.vertices[be.a] + m.vertices[be.b]) * 0.5;
        REQUIRE(classify_boundary(g, mid, 0.02) == be.tag);
    }
}

TEST_CASE("mesh write/read round-trips field for field") {
    const Mesh m = generate_structured_mesh(flat_strip(), 4, 2);
    const std::string path = temp_path("cascade_roundtrip.mesh");
    write_mesh(m, path);
    const Mesh r = read_mesh(path);
    REQUIRE(r.n_vertices() == m.n_vertices());
    REQUIRE(r.n_triangles() == m.n_triangles());
    REQUIRE(r.tau == m.tau);
    for (int v = 0; v < m.n_vertices(); ++v) {
        REQUIRE(r.vertices[v].x == m.vertices[v].x);
        REQUIRE(r.vertices[v].y == m.vertices[v].y);
    }
    REQUIRE(r.triangles == m.triangles);
    REQUIRE(r.periodic_pairs == m.periodic_pairs);
    for (size_t k = 0; k < m.boundary_edges.size(); ++k) {
        REQUIRE(r.boundary_edges[k].a == m.boundary_edges[k].a);
        REQUIRE(r.boundary_edges[k].b == m.boundary_edges[k].b);
        REQUIRE(r.boundary_edges[k].tag == m.boundary_edges[k].tag);
    }
    std::remove(path.c_str());
}

TEST_CASE("loader rejects broken meshes") {
    const Mesh m = generate_structured_mesh(flat_strip(), 4, 2);
    SECTION("negative-area triangle") {
        Mesh bad = m;
        std::swap(bad.triangles[0][1], bad.triangles[0][2]);
        const std::string path = temp_path("cascade_bad_orient.mesh");
        write_mesh(bad, path);
        REQUIRE_THROWS_AS(read_mesh(path), InvariantViolation);
        std::remove(path.c_str());
    }
    SECTION("pairing offset differs from (0, tau)") {
        Mesh bad = m;
        bad.periodic_pairs[2].second = bad.periodic_pairs[3].second;
        const std::string path = temp_path("cascade_bad_pair.mesh");
        write_mesh(bad, path);
        REQUIRE_THROWS_AS(read_mesh(path), InvariantViolation);
        std::remove(path.c_str());
    }
    SECTION("parse error carries the line number") {
        const std::string path = temp_path("cascade_bad_parse.mesh");
        std::ofstream os(path);
        os << "cascademesh 1 0 0 0 1.0\n";
        os << "v not-a-number 0\n";
        os.close();
        try {
            read_mesh(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find(":2:") != std::string::npos);
        }
        std::remove(path.c_str());
    }
    SECTION("unknown tag") {
        const std::string path = temp_path("cascade_bad_tag.mesh");
        std::ofstream os(path);
        os << "cascademesh 2 0 1 0 1.0\nv 0 0\nv 1 0\nb 0 1 SIDEWAYS\n";
        os.close();
        REQUIRE_THROWS_AS(read_mesh(path), ParseError);
        std::remove(path.c_str());
    }
}

TEST_CASE("generate_mesh enforces the resolution contract") {
    const Mesh m = generate_mesh(flat_strip(), 0.23);
    REQUIRE(m.h <= 1.5 * 0.23);
    REQUIRE_THROWS_AS(generate_mesh(flat_strip(), -0.1), MeshFailure);
}
