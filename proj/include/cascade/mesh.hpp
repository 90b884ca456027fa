#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "cascade/geometry.hpp"

namespace cascade {

struct BoundaryEdge {
    int a = -1;
    int b = -1;
    BoundaryTag tag = BoundaryTag::Lower;
};

/// Conforming triangulation of one cascade period. The Gamma^- and Gamma^+
/// discretizations are exact translates of each other; periodic_pairs lists
/// (lower vertex, upper vertex) with vertices[upper] = vertices[lower] + (0, tau).
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // positively oriented
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::pair<int, int>> periodic_pairs;
    double tau = 1.0;
    double h = 0.0;  // maximal edge length

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }

    double signed_area(int t) const {
        const Vec2 a = vertices[triangles[t][0]];
        const Vec2 b = vertices[triangles[t][1]];
        const Vec2 c = vertices[triangles[t][2]];
        return 0.5 * (b - a).cross(c - a);
    }

    double area() const {
        double s = 0;
        for (int t = 0; t < n_triangles(); ++t) s += signed_area(t);
        return s;
    }

    double max_edge_length() const {
        double m = 0;
        for (const auto& t : triangles)
            for (int k = 0; k < 3; ++k)
                m = std::max(m, (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm());
        return m;
    }

    void validate() const;
};

namespace detail {

inline std::map<std::pair<int, int>, int> edge_use_count(const Mesh& m) {
    std::map<std::pair<int, int>, int> cnt;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++cnt[{a, b}];
        }
    return cnt;
}

}  // namespace detail

inline void Mesh::validate() const {
    for (int t = 0; t < n_triangles(); ++t) {
        if (signed_area(t) <= 0.0)
            throw InvariantViolation("triangle " + std::to_string(t) + " has non-positive area");
        for (int k = 0; k < 3; ++k)
            if (triangles[t][k] < 0 || triangles[t][k] >= n_vertices())
                throw InvariantViolation("triangle vertex index out of range");
    }

    // Periodic pairing: exact (0, tau) offset, bijective lower->upper.
    std::set<int> lowers, uppers;
    for (const auto& [lo, up] : periodic_pairs) {
        const Vec2 dv = vertices[up] - vertices[lo];
        if (std::abs(dv.x) > 1e-12 * tau || std::abs(dv.y - tau) > 1e-12 * tau)
            throw InvariantViolation("periodic pair offset differs from (0, tau)");
        if (!lowers.insert(lo).second) throw InvariantViolation("duplicate lower vertex in pairing");
        if (!uppers.insert(up).second) throw InvariantViolation("duplicate upper vertex in pairing");
    }

    // Every vertex of a Lower edge is paired; every vertex of an Upper edge is
    // the image of a pair.
    for (const auto& be : boundary_edges) {
        if (be.tag == BoundaryTag::Lower) {
            if (!lowers.count(be.a) || !lowers.count(be.b))
                throw InvariantViolation("Lower boundary vertex missing from periodic pairing");
        } else if (be.tag == BoundaryTag::Upper) {
            if (!uppers.count(be.a) || !uppers.count(be.b))
                throw InvariantViolation("Upper boundary vertex missing from periodic pairing");
        }
    }

    // Tag completeness: boundary edges of the triangulation are exactly the
    // tagged edges, each with exactly one tag, oriented with the domain on the
    // left (the adjacent triangle contains the directed edge).
    auto cnt = detail::edge_use_count(*this);
    std::set<std::pair<int, int>> directed;
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k) directed.insert({t[k], t[(k + 1) % 3]});
    std::set<std::pair<int, int>> tagged;
    for (const auto& be : boundary_edges) {
        if (!directed.count({be.a, be.b}))
            throw InvariantViolation("boundary edge not oriented with the domain on its left");
        int a = be.a, b = be.b;
        if (a > b) std::swap(a, b);
        if (!tagged.insert({a, b}).second)
            throw InvariantViolation("boundary edge tagged twice");
        auto it = cnt.find({a, b});
        if (it == cnt.end() || it->second != 1)
            throw InvariantViolation("tagged edge is not a boundary edge of the triangulation");
    }
    for (const auto& [e, c] : cnt)
        if (c == 1 && !tagged.count(e))
            throw InvariantViolation("untagged boundary edge");
        else if (c > 2)
            throw InvariantViolation("non-manifold edge");

    // Edge connectivity on Gamma^- maps to Gamma^+ under the pairing.
    std::map<int, int> up_of(periodic_pairs.begin(), periodic_pairs.end());
    std::set<std::pair<int, int>> upper_edges;
    for (const auto& be : boundary_edges)
        if (be.tag == BoundaryTag::Upper) {
            int a = be.a, b = be.b;
            if (a > b) std::swap(a, b);
            upper_edges.insert({a, b});
        }
    for (const auto& be : boundary_edges)
        if (be.tag == BoundaryTag::Lower) {
            int a = up_of.at(be.a), b = up_of.at(be.b);
            if (a > b) std::swap(a, b);
            if (!upper_edges.count({a, b}))
                throw InvariantViolation("lower boundary edge has no translated upper edge");
        }
}

// ---------------------------------------------------------------------------
// Structured strip meshes (blade-free path).
//
// Logical coordinates (s, t) in [0,d] x [0,tau]; physical x = (s, t + c(s)).
// The top row is written as bottom + (0, tau) so the pairing offset is exact.
// ---------------------------------------------------------------------------

inline Mesh generate_structured_mesh(const CascadeGeometry& geom, int n1, int n2) {
    if (geom.has_profile())
        throw MeshFailure("structured meshes are only for blade-free strips");
    if (n1 < 1 || n2 < 1) throw MeshFailure("structured mesh needs n1, n2 >= 1");

    Mesh m;
    m.tau = geom.tau;
    const int nv = (n1 + 1) * (n2 + 1);
    m.vertices.resize(nv);
    auto vid = [n2](int i, int j) { return i * (n2 + 1) + j; };

    for (int i = 0; i <= n1; ++i) {
        const double s = geom.d * i / n1;
        const double c = geom.lower_height(s);
        for (int j = 0; j <= n2; ++j) {
            double y;
            if (j == 0) y = c;
            else if (j == n2) y = c + geom.tau;  // exact translate of the bottom row
            else y = c + geom.tau * j / n2;
            m.vertices[vid(i, j)] = {s, y};
        }
    }

    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }

    for (int j = 0; j < n2; ++j) {
        m.boundary_edges.push_back({vid(0, j + 1), vid(0, j), BoundaryTag::Inflow});
        m.boundary_edges.push_back({vid(n1, j), vid(n1, j + 1), BoundaryTag::Outflow});
    }
    for (int i = 0; i < n1; ++i) {
        m.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), BoundaryTag::Lower});
        m.boundary_edges.push_back({vid(i + 1, n2), vid(i, n2), BoundaryTag::Upper});
    }
    for (int i = 0; i <= n1; ++i) m.periodic_pairs.push_back({vid(i, 0), vid(i, n2)});

    m.h = m.max_edge_length();
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay meshing for bladed domains, in logical coordinates.
// ---------------------------------------------------------------------------

namespace detail {

struct DelaunayTri {
    int v[3];
    bool alive = true;
};

inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    const long double acx = static_cast<long double>(a.x) - c.x;
    const long double acy = static_cast<long double>(a.y) - c.y;
    const long double bcx = static_cast<long double>(b.x) - c.x;
    const long double bcy = static_cast<long double>(b.y) - c.y;
    return static_cast<double>(acx * bcy - acy * bcx);
}

inline bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    const long double adx = static_cast<long double>(a.x) - p.x;
    const long double ady = static_cast<long double>(a.y) - p.y;
    const long double bdx = static_cast<long double>(b.x) - p.x;
    const long double bdy = static_cast<long double>(b.y) - p.y;
    const long double cdx = static_cast<long double>(c.x) - p.x;
    const long double cdy = static_cast<long double>(c.y) - p.y;
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                            ad * (bdx * cdy - bdy * cdx);
    // conservative: near-cocircular counts as outside
    const long double scale = (ad + bd + cd + 1.0L);
    return det > 1e-14L * scale * scale;
}

/// Plain O(n^2) Bowyer-Watson; adequate at desk scale. Points must be inside
/// the super-rectangle. Returns CCW triangles over the input point indices.
inline std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& pts,
                                                const Vec2& lo, const Vec2& hi) {
    std::vector<Vec2> v = pts;
    const double w = hi.x - lo.x, h = hi.y - lo.y;
    const double m = 10.0 * std::max(w, h);
    const int s0 = static_cast<int>(v.size());
    v.push_back({lo.x - m, lo.y - m});
    v.push_back({hi.x + 3 * m, lo.y - m});
    v.push_back({lo.x - m, hi.y + 3 * m});

    std::vector<DelaunayTri> tris;
    tris.push_back({{s0, s0 + 1, s0 + 2}, true});

    for (int p = 0; p < s0; ++p) {
        // cavity: all triangles whose circumcircle contains the point
        std::vector<int> cavity;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t)
            if (tris[t].alive &&
                in_circumcircle(v[tris[t].v[0]], v[tris[t].v[1]], v[tris[t].v[2]], v[p]))
                cavity.push_back(t);
        if (cavity.empty()) throw MeshFailure("delaunay: empty cavity (degenerate input)");

        // boundary of the cavity = edges used exactly once
        std::map<std::pair<int, int>, std::pair<int, int>> edges;  // sorted -> oriented
        for (int t : cavity) {
            tris[t].alive = false;
            for (int k = 0; k < 3; ++k) {
                int a = tris[t].v[k], b = tris[t].v[(k + 1) % 3];
                auto key = std::minmax(a, b);
                auto it = edges.find({key.first, key.second});
                if (it == edges.end()) edges[{key.first, key.second}] = {a, b};
                else edges.erase(it);
            }
        }
        for (const auto& [key, e] : edges) {
            if (orient2d(v[e.first], v[e.second], v[p]) <= 0.0)
                throw MeshFailure("delaunay: cavity retriangulation produced a degenerate triangle");
            tris.push_back({{e.first, e.second, p}, true});
        }
    }

    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v[0] >= s0 || t.v[1] >= s0 || t.v[2] >= s0) continue;
        out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    return out;
}

inline bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
    bool inside = false;
    const int n = static_cast<int>(poly.size());
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xc = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

inline double dist_to_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
    double dmin = std::numeric_limits<double>::max();
    const int n = static_cast<int>(poly.size());
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[j], b = poly[i];
        const Vec2 ab = b - a;
        const double L2 = ab.dot(ab);
        double s = L2 > 0 ? std::clamp((p - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
        dmin = std::min(dmin, (p - (a + ab * s)).norm());
    }
    return dmin;
}

// deterministic tiny jitter used to break cocircular grid degeneracies
inline double index_jitter(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return (static_cast<double>(k % 2000001) / 1000000.0) - 1.0;  // in [-1, 1]
}

}  // namespace detail

/// Unstructured Delaunay mesh of a bladed period. Rectangle boundary points
/// are kept exact (inflow/outflow spacing uniform, top row a translate of the
/// bottom row); interior grid points carry a deterministic sub-ulp-of-h jitter.
inline Mesh generate_delaunay_mesh(const CascadeGeometry& geom, double h_target) {
    if (!geom.has_profile()) throw MeshFailure("delaunay path expects a blade");
    const double d = geom.d, tau = geom.tau;

    const int n1 = std::max(4, static_cast<int>(std::lround(d / h_target)));
    const int n2 = std::max(4, static_cast<int>(std::lround(tau / h_target)));
    const double hs = d / n1, ht = tau / n2;

    // blade polygon in logical coordinates
    const double perim = geom.profile->length();
    const int nb = std::max(8, static_cast<int>(std::ceil(perim / std::min(hs, ht))));
    std::vector<Vec2> blade(nb);
    for (int k = 0; k < nb; ++k) {
        const Vec2 p = geom.profile->eval(static_cast<double>(k) / nb);
        blade[k] = {p.x, p.y - geom.lower_height(p.x)};
    }
    {  // blade orientation: keep CCW in logical coords
        double a2 = 0;
        for (int i = 0, j = nb - 1; i < nb; j = i++) a2 += blade[j].cross(blade[i]);
        if (a2 < 0) std::reverse(blade.begin(), blade.end());
    }

    std::vector<Vec2> pts;
    // bottom and top rows: pairing by construction
    std::vector<int> bottom_ids, top_ids, left_ids, right_ids;
    for (int i = 0; i <= n1; ++i) {
        bottom_ids.push_back(static_cast<int>(pts.size()));
        pts.push_back({hs * i, 0.0});
    }
    for (int i = 0; i <= n1; ++i) {
        top_ids.push_back(static_cast<int>(pts.size()));
        pts.push_back({hs * i, tau});
    }
    left_ids.push_back(bottom_ids[0]);
    for (int j = 1; j < n2; ++j) {
        left_ids.push_back(static_cast<int>(pts.size()));
        pts.push_back({0.0, ht * j});
    }
    left_ids.push_back(top_ids[0]);
    right_ids.push_back(bottom_ids[n1]);
    for (int j = 1; j < n2; ++j) {
        right_ids.push_back(static_cast<int>(pts.size()));
        pts.push_back({d, ht * j});
    }
    right_ids.push_back(top_ids[n1]);

    const int n_rect = static_cast<int>(pts.size());
    for (const Vec2& p : pts)
        if (detail::dist_to_polygon(blade, p) < 0.75 * std::min(hs, ht))
            throw MeshFailure("blade too close to the outer boundary for this h");

    // interior grid, staggered rows, jittered, blade-protected
    const double keepout = 0.72 * std::min(hs, ht);
    for (int j = 1; j < n2; ++j) {
        const double off = (j % 2 == 0) ? 0.0 : 0.5 * hs;
        for (int i = 0; i <= n1; ++i) {
            Vec2 p{hs * i + off, ht * j};
            if (p.x <= 0.35 * hs || p.x >= d - 0.35 * hs) continue;
            const std::uint64_t key = static_cast<std::uint64_t>(j) * 131071u + i;
            p.x += 1e-7 * hs * detail::index_jitter(key);
            p.y += 1e-7 * ht * detail::index_jitter(key * 7919u + 1);
            if (detail::point_in_polygon(blade, p)) continue;
            if (detail::dist_to_polygon(blade, p) < keepout) continue;
            pts.push_back(p);
        }
    }
    std::vector<int> blade_ids;
    for (const Vec2& p : blade) {
        blade_ids.push_back(static_cast<int>(pts.size()));
        pts.push_back(p);
    }

    auto tris = detail::delaunay(pts, {0.0, 0.0}, {d, tau});

    // drop triangles inside the blade
    std::vector<std::array<int, 3>> kept;
    for (const auto& t : tris) {
        const Vec2 cen = (pts[t[0]] + pts[t[1]] + pts[t[2]]) * (1.0 / 3.0);
        if (!detail::point_in_polygon(blade, cen)) kept.push_back(t);
    }

    // boundary recovery checks
    std::set<std::pair<int, int>> edge_set;
    for (const auto& t : kept)
        for (int k = 0; k < 3; ++k) {
            auto key = std::minmax(t[k], t[(k + 1) % 3]);
            edge_set.insert({key.first, key.second});
        }
    auto require_chain = [&edge_set](const std::vector<int>& ids, const char* what) {
        for (size_t k = 0; k + 1 < ids.size(); ++k) {
            auto key = std::minmax(ids[k], ids[k + 1]);
            if (!edge_set.count({key.first, key.second}))
                throw MeshFailure(std::string("boundary edge not recovered on ") + what +
                                  "; reduce h_target");
        }
    };
    require_chain(bottom_ids, "Gamma^-");
    require_chain(top_ids, "Gamma^+");
    require_chain(left_ids, "Gamma_i");
    require_chain(right_ids, "Gamma_o");
    for (int k = 0; k < nb; ++k) {
        auto key = std::minmax(blade_ids[k], blade_ids[(k + 1) % nb]);
        if (!edge_set.count({key.first, key.second}))
            throw MeshFailure("blade boundary not recovered; reduce h_target");
    }

    // map to physical coordinates; top row rewritten as exact translate
    Mesh m;
    m.tau = tau;
    m.vertices.resize(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        const Vec2 p = pts[i];
        m.vertices[i] = {p.x, p.y + geom.lower_height(p.x)};
    }
    for (int i = 0; i <= n1; ++i)
        m.vertices[top_ids[i]] = m.vertices[bottom_ids[i]] + Vec2{0.0, tau};

    for (const auto& t : kept) {
        std::array<int, 3> tt = t;
        const Vec2 a = m.vertices[tt[0]], b = m.vertices[tt[1]], c = m.vertices[tt[2]];
        if ((b - a).cross(c - a) <= 0.0) std::swap(tt[1], tt[2]);
        m.triangles.push_back(tt);
    }

    for (int i = 0; i < n1; ++i) {
        m.boundary_edges.push_back({bottom_ids[i], bottom_ids[i + 1], BoundaryTag::Lower});
        m.boundary_edges.push_back({top_ids[i + 1], top_ids[i], BoundaryTag::Upper});
    }
    for (size_t j = 0; j + 1 < left_ids.size(); ++j)
        m.boundary_edges.push_back({left_ids[j + 1], left_ids[j], BoundaryTag::Inflow});
    for (size_t j = 0; j + 1 < right_ids.size(); ++j)
        m.boundary_edges.push_back({right_ids[j], right_ids[j + 1], BoundaryTag::Outflow});
    // blade loop is CCW, so the domain lies left of the reversed edges
    for (int k = 0; k < nb; ++k)
        m.boundary_edges.push_back({blade_ids[(k + 1) % nb], blade_ids[k], BoundaryTag::Profile});
    for (int i = 0; i <= n1; ++i) m.periodic_pairs.push_back({bottom_ids[i], top_ids[i]});

    // global area check: catches silent triangulation corruption
    double blade_area = 0;
    for (int i = 0, j = nb - 1; i < nb; j = i++) blade_area += 0.5 * blade[j].cross(blade[i]);
    const double expect = d * tau - blade_area;
    if (std::abs(m.area() - expect) > 1e-10 * expect)
        throw MeshFailure("triangulated area mismatch; meshing failed");

    m.h = m.max_edge_length();
    m.validate();
    return m;
}

/// Generate a mesh with max edge length at most 1.5 * h_target. Structured for
/// blade-free strips, Delaunay for bladed domains.
inline Mesh generate_mesh(const CascadeGeometry& geom, double h_target) {
    if (h_target <= 0) throw MeshFailure("h_target must be positive");
    double ht = h_target;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Mesh m;
        if (geom.has_profile()) {
            m = generate_delaunay_mesh(geom, ht);
        } else {
            const int n1 = std::max(1, static_cast<int>(std::lround(geom.d / ht)));
            const int n2 = std::max(1, static_cast<int>(std::lround(geom.tau / ht)));
            m = generate_structured_mesh(geom, n1, n2);
        }
        if (m.h <= 1.5 * h_target) return m;
        ht *= 1.4 * h_target / m.h;
    }
    throw MeshFailure("could not reach the requested resolution");
}

}  // namespace cascade
