#pragma once

#include <vector>

#include "cascade/core.hpp"

namespace cascade {

/// One point of a triangle rule in barycentric coordinates. Weights sum to 1;
/// integrals are weight * area * f(point).
struct TriQuadPoint {
    double l0, l1, l2;
    double w;
};

/// Symmetric triangle rules with polynomial exactness degree 2, 4 or 6.
inline const std::vector<TriQuadPoint>& triangle_rule(int degree) {
    // degree 2: 3-point edge-midpoint rule
    static const std::vector<TriQuadPoint> deg2 = {
        {0.5, 0.5, 0.0, 1.0 / 3.0},
        {0.0, 0.5, 0.5, 1.0 / 3.0},
        {0.5, 0.0, 0.5, 1.0 / 3.0},
    };
    // degree 4: 6-point rule (two symmetric orbits)
    static const std::vector<TriQuadPoint> deg4 = [] {
        std::vector<TriQuadPoint> q;
        const double a = 0.445948490915965;
        const double wa = 0.223381589678011;
        const double b = 0.091576213509771;
        const double wb = 0.109951743655322;
        auto orbit3 = [&q](double p, double w) {
            q.push_back({1 - 2 * p, p, p, w});
            q.push_back({p, 1 - 2 * p, p, w});
            q.push_back({p, p, 1 - 2 * p, w});
        };
        orbit3(a, wa);
        orbit3(b, wb);
        return q;
    }();
    // degree 6: 12-point rule (two 3-orbits and one 6-orbit)
    static const std::vector<TriQuadPoint> deg6 = [] {
        std::vector<TriQuadPoint> q;
        auto orbit3 = [&q](double p, double w) {
            q.push_back({1 - 2 * p, p, p, w});
            q.push_back({p, 1 - 2 * p, p, w});
            q.push_back({p, p, 1 - 2 * p, w});
        };
        auto orbit6 = [&q](double p, double r, double w) {
            const double s = 1 - p - r;
            q.push_back({p, r, s, w});
            q.push_back({r, s, p, w});
            q.push_back({s, p, r, w});
            q.push_back({p, s, r, w});
            q.push_back({s, r, p, w});
            q.push_back({r, p, s, w});
        };
        orbit3(0.249286745170910, 0.116786275726379);
        orbit3(0.063089014491502, 0.050844906370207);
        orbit6(0.310352451033785, 0.636502499121399, 0.082851075618374);
        return q;
    }();
    switch (degree) {
        case 2: return deg2;
        case 4: return deg4;
        case 6: return deg6;
        default: throw QuadratureFailure("triangle_rule: order must be 2, 4 or 6");
    }
}

/// Gauss-Legendre points on [0,1]; degree is the polynomial exactness.
struct SegQuadPoint {
    double t;
    double w;
};

inline const std::vector<SegQuadPoint>& segment_rule(int degree) {
    static const std::vector<SegQuadPoint> g1 = {{0.5, 1.0}};
    static const std::vector<SegQuadPoint> g2 = [] {
        const double d = 0.5 / std::sqrt(3.0);
        return std::vector<SegQuadPoint>{{0.5 - d, 0.5}, {0.5 + d, 0.5}};
    }();
    static const std::vector<SegQuadPoint> g3 = [] {
        const double d = 0.5 * std::sqrt(3.0 / 5.0);
        return std::vector<SegQuadPoint>{
            {0.5 - d, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + d, 5.0 / 18.0}};
    }();
    static const std::vector<SegQuadPoint> g5 = [] {
        // 5-point Gauss on [-1,1], mapped to [0,1]
        const double x1 = 0.906179845938664;
        const double x2 = 0.538469310105683;
        const double w1 = 0.236926885056189;
        const double w2 = 0.478628670499366;
        const double w0 = 0.568888888888889;
        std::vector<SegQuadPoint> q = {
            {0.5 * (1 - x1), 0.5 * w1}, {0.5 * (1 - x2), 0.5 * w2}, {0.5, 0.5 * w0},
            {0.5 * (1 + x2), 0.5 * w2}, {0.5 * (1 + x1), 0.5 * w1}};
        return q;
    }();
    if (degree <= 1) return g1;
    if (degree <= 3) return g2;
    if (degree <= 5) return g3;
    if (degree <= 9) return g5;
    throw QuadratureFailure("segment_rule: degree must be <= 9");
}

}  // namespace cascade
