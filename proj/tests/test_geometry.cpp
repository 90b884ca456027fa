#include <catch2/catch_amalgamated.hpp>

#include "cascade/assembly.hpp"
#include "cascade/geometry.hpp"
#include "cascade/mesh.hpp"

using namespace cascade;

namespace {

std::vector<Vec2> ellipse_points(Vec2 c, double ax, double ay, int n = 24) {
    std::vector<Vec2> pts;
    for (int k = 0; k < n; ++k) {
        const double th = 2 * M_PI * k / n;
        pts.push_back({c.x + ax * std::cos(th), c.y + ay * std::sin(th)});
    }
    return pts;
}

}  // namespace

TEST_CASE("flat strip geometry") {
    const CascadeGeometry g = build_geometry({1.0, 2.0, {{0, 0}, {2, 0}}, {}, -1.0});
    REQUIRE(g.tau == 1.0);
    REQUIRE(g.d == 2.0);
    REQUIRE(g.delta_margin == Catch::Approx(0.2));
    REQUIRE_FALSE(g.has_profile());
    REQUIRE(g.lower_height(1.3) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(g.corner_a_minus().norm() < 1e-14);
    REQUIRE((g.corner_b_plus() - Vec2{2, 1}).norm() < 1e-14);
}

TEST_CASE("upper curve is the exact translate of the lower curve") {
    const CascadeGeometry g =
        build_geometry({1.0, 2.0, {{0, 0}, {0.7, 0.15}, {1.3, 0.2}, {2, 0}}, {}, -1.0});
    const CubicCurve up = g.upper();
    for (int k = 0; k <= 64; ++k) {
        const double t = k / 64.0;
        const Vec2 dv = up.eval(t) - g.lower.eval(t);
        REQUIRE(std::abs(dv.x) < 1e-15);
        REQUIRE(std::abs(dv.y - g.tau) < 1e-15);
    }
}

TEST_CASE("curved strip area equals tau * d by translation symmetry") {
    const CascadeGeometry g = build_geometry({1.0, 2.0, {{0, 0}, {1, 0.2}, {2, 0}}, {}, -1.0});
    const Mesh mesh = generate_structured_mesh(g, 24, 12);
    REQUIRE(mesh.area() == Catch::Approx(2.0).epsilon(1e-9));
    // mesh-independent: a different admissible mesh gives the same area
    const Mesh mesh2 = generate_structured_mesh(g, 37, 19);
    REQUIRE(mesh2.area() == Catch::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("bladed strip: area equals tau*d minus the ellipse area") {
    GeometryParams p;
    p.tau = 1.0;
    p.d = 2.0;
    p.lower_points = {{0, 0}, {2, 0}};
    p.profile_points = ellipse_points({1.0, 0.5}, 0.3, 0.1, 32);
    const CascadeGeometry g = build_geometry(p);
    REQUIRE(g.has_profile());
    const Mesh mesh = generate_mesh(g, 0.06);
    const double want = 2.0 - M_PI * 0.3 * 0.1;
    REQUIRE(mesh.area() == Catch::Approx(want).epsilon(1e-3));
}

TEST_CASE("classify_boundary with corner tie-breaking") {
    const CascadeGeometry g = build_geometry({1.0, 2.0, {{0, 0}, {2, 0}}, {}, -1.0});
    REQUIRE(classify_boundary(g, {0.0, 0.5}) == BoundaryTag::Inflow);
    REQUIRE(classify_boundary(g, {2.0, 0.5}) == BoundaryTag::Outflow);
    REQUIRE(classify_boundary(g, {1.0, 0.0}) == BoundaryTag::Lower);
    REQUIRE(classify_boundary(g, {1.0, 1.0}) == BoundaryTag::Upper);
    // corners: A to the inflow, B to the outflow
    REQUIRE(classify_boundary(g, {0.0, 0.0}) == BoundaryTag::Inflow);
    REQUIRE(classify_boundary(g, {0.0, 1.0}) == BoundaryTag::Inflow);
    REQUIRE(classify_boundary(g, {2.0, 0.0}) == BoundaryTag::Outflow);
    REQUIRE(classify_boundary(g, {2.0, 1.0}) == BoundaryTag::Outflow);
    REQUIRE_THROWS_AS(classify_boundary(g, {1.0, 0.5}), NotOnBoundary);
}

TEST_CASE("classify_boundary on a bladed domain") {
    GeometryParams p;
    p.tau = 1.0;
    p.d = 2.0;
    p.lower_points = {{0, 0}, {2, 0}};
    p.profile_points = ellipse_points({1.0, 0.5}, 0.3, 0.1);
    const CascadeGeometry g = build_geometry(p);
    REQUIRE(classify_boundary(g, {1.3, 0.5}) == BoundaryTag::Profile);
}

TEST_CASE("invalid geometries are rejected") {
    SECTION("non-positive dimensions") {
        REQUIRE_THROWS_AS(build_geometry({-1.0, 2.0, {}, {}, -1.0}), InvalidGeometry);
        REQUIRE_THROWS_AS(build_geometry({1.0, 0.0, {}, {}, -1.0}), InvalidGeometry);
    }
    SECTION("curve not reaching the outflow line") {
        REQUIRE_THROWS_AS(build_geometry({1.0, 2.0, {{0, 0}, {1.5, 0}}, {}, -1.0}),
                          InvalidGeometry);
    }
    SECTION("curve folding back in x1") {
        REQUIRE_THROWS_AS(
            build_geometry({1.0, 2.0, {{0, 0}, {1.8, 0.4}, {0.2, 0.6}, {2, 0}}, {}, -1.0}),
            InvalidGeometry);
    }
    SECTION("profile touching the margin") {
        GeometryParams p;
        p.tau = 1.0;
        p.d = 2.0;
        p.lower_points = {{0, 0}, {2, 0}};
        p.profile_points = ellipse_points({0.25, 0.5}, 0.2, 0.1);
        REQUIRE_THROWS_AS(build_geometry(p), InvalidGeometry);
    }
    SECTION("profile too close to the periodic curves") {
        GeometryParams p;
        p.tau = 1.0;
        p.d = 2.0;
        p.lower_points = {{0, 0}, {2, 0}};
        p.profile_points = ellipse_points({1.0, 0.12}, 0.3, 0.1);
        REQUIRE_THROWS_AS(build_geometry(p), InvalidGeometry);
    }
}
