#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cascade/mesh.hpp"

namespace cascade {

// Line-oriented ASCII mesh format:
//   cascademesh <nv> <nt> <nb> <np> <tau>
//   v x1 x2
//   t i j k
//   b i j TAG
//   p i_lower i_upper
// Coordinates are written with 17 significant digits, so write/read round-trips
// are bit-stable.

inline void write_mesh(const Mesh& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    char buf[128];
    os << "cascademesh " << m.n_vertices() << ' ' << m.n_triangles() << ' '
       << m.boundary_edges.size() << ' ' << m.periodic_pairs.size() << ' ';
    std::snprintf(buf, sizeof buf, "%.17g\n", m.tau);
    os << buf;
    for (const Vec2& v : m.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", v.x, v.y);
        os << buf;
    }
    for (const auto& t : m.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& b : m.boundary_edges)
        os << "b " << b.a << ' ' << b.b << ' ' << tag_name(b.tag) << '\n';
    for (const auto& p : m.periodic_pairs) os << "p " << p.first << ' ' << p.second << '\n';
    if (!os) throw Error("write to '" + path + "' failed");
}

inline Mesh read_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open '" + path + "'");
    Mesh m;
    std::string line;
    int lineno = 0;

    auto fail = [&lineno, &path](const std::string& why) -> ParseError {
        return ParseError(path + ":" + std::to_string(lineno) + ": " + why);
    };

    if (!std::getline(is, line)) throw fail("empty file");
    ++lineno;
    std::istringstream hs(line);
    std::string magic;
    long long nv = 0, nt = 0, nb = 0, np = 0;
    if (!(hs >> magic >> nv >> nt >> nb >> np >> m.tau) || magic != "cascademesh")
        throw fail("bad header, expected 'cascademesh nv nt nb np tau'");

    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        char kind = 0;
        ls >> kind;
        if (kind == 'v') {
            Vec2 v;
            if (!(ls >> v.x >> v.y)) throw fail("bad vertex line");
            m.vertices.push_back(v);
        } else if (kind == 't') {
            std::array<int, 3> t{};
            if (!(ls >> t[0] >> t[1] >> t[2])) throw fail("bad triangle line");
            m.triangles.push_back(t);
        } else if (kind == 'b') {
            BoundaryEdge b;
            std::string tag;
            if (!(ls >> b.a >> b.b >> tag)) throw fail("bad boundary line");
            try {
                b.tag = tag_from_name(tag);
            } catch (const ParseError& e) {
                throw fail(e.what());
            }
            m.boundary_edges.push_back(b);
        } else if (kind == 'p') {
            std::pair<int, int> p;
            if (!(ls >> p.first >> p.second)) throw fail("bad pairing line");
            m.periodic_pairs.push_back(p);
        } else {
            throw fail(std::string("unknown record '") + kind + "'");
        }
    }
    if (static_cast<long long>(m.vertices.size()) != nv) throw fail("vertex count mismatch");
    if (static_cast<long long>(m.triangles.size()) != nt) throw fail("triangle count mismatch");
    if (static_cast<long long>(m.boundary_edges.size()) != nb) throw fail("boundary count mismatch");
    if (static_cast<long long>(m.periodic_pairs.size()) != np) throw fail("pairing count mismatch");

    m.h = m.max_edge_length();
    m.validate();  // throws InvariantViolation on broken orientation/pairing
    return m;
}

}  // namespace cascade
