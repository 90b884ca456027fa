#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "cascade/core.hpp"

namespace cascade {

enum class BoundaryTag { Inflow, Outflow, Lower, Upper, Profile };

inline const char* tag_name(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::Inflow: return "INFLOW";
        case BoundaryTag::Outflow: return "OUTFLOW";
        case BoundaryTag::Lower: return "LOWER";
        case BoundaryTag::Upper: return "UPPER";
        case BoundaryTag::Profile: return "PROFILE";
    }
    return "?";
}

inline BoundaryTag tag_from_name(const std::string& s) {
    if (s == "INFLOW") return BoundaryTag::Inflow;
    if (s == "OUTFLOW") return BoundaryTag::Outflow;
    if (s == "LOWER") return BoundaryTag::Lower;
    if (s == "UPPER") return BoundaryTag::Upper;
    if (s == "PROFILE") return BoundaryTag::Profile;
    throw ParseError("unknown boundary tag '" + s + "'");
}

/// Piecewise cubic Hermite curve through the given points (Catmull-Rom
/// tangents, one-sided at the ends). Interpolates every point exactly, so the
/// periodic translate is obtained by translating the points, never by
/// refitting. C2 only at segment interiors, C1 at the knots; the smoothness
/// class is recorded on the geometry.
class CubicCurve {
  public:
    CubicCurve() = default;
    explicit CubicCurve(std::vector<Vec2> pts, bool closed = false)
        : pts_(std::move(pts)), closed_(closed) {
        if (pts_.size() < 2) throw InvalidGeometry("curve needs at least 2 points");
    }

    bool closed() const { return closed_; }
    const std::vector<Vec2>& points() const { return pts_; }

    CubicCurve translated(const Vec2& dv) const {
        std::vector<Vec2> p = pts_;
        for (auto& q : p) q += dv;
        return CubicCurve(std::move(p), closed_);
    }

    /// t in [0,1] over the whole chain (uniform knot spacing).
    Vec2 eval(double t) const {
        auto [i, u] = locate(t);
        const Vec2 p0 = pts_[i], p1 = pt(i + 1);
        const Vec2 m0 = tangent(i), m1 = tangent(i + 1);
        const double u2 = u * u, u3 = u2 * u;
        return p0 * (2 * u3 - 3 * u2 + 1) + m0 * (u3 - 2 * u2 + u) +
               p1 * (-2 * u3 + 3 * u2) + m1 * (u3 - u2);
    }

    Vec2 derivative(double t) const {
        auto [i, u] = locate(t);
        const Vec2 p0 = pts_[i], p1 = pt(i + 1);
        const Vec2 m0 = tangent(i), m1 = tangent(i + 1);
        const double u2 = u * u;
        const Vec2 d = p0 * (6 * u2 - 6 * u) + m0 * (3 * u2 - 4 * u + 1) +
                       p1 * (-6 * u2 + 6 * u) + m1 * (3 * u2 - 2 * u);
        return d * static_cast<double>(nseg());
    }

    double length(int samples = 512) const {
        double len = 0;
        Vec2 prev = eval(0.0);
        for (int k = 1; k <= samples; ++k) {
            Vec2 p = eval(static_cast<double>(k) / samples);
            len += (p - prev).norm();
            prev = p;
        }
        return len;
    }

  private:
    std::vector<Vec2> pts_;
    bool closed_ = false;

    int nseg() const { return closed_ ? static_cast<int>(pts_.size()) : static_cast<int>(pts_.size()) - 1; }

    Vec2 pt(int i) const {
        const int n = static_cast<int>(pts_.size());
        if (closed_) return pts_[((i % n) + n) % n];
        return pts_[std::clamp(i, 0, n - 1)];
    }

    Vec2 tangent(int i) const {
        if (closed_) return (pt(i + 1) - pt(i - 1)) * 0.5;
        const int n = static_cast<int>(pts_.size());
        if (i <= 0) return pts_[1] - pts_[0];
        if (i >= n - 1) return pts_[n - 1] - pts_[n - 2];
        return (pts_[i + 1] - pts_[i - 1]) * 0.5;
    }

    std::pair<int, double> locate(double t) const {
        const int n = nseg();
        const double s = t * n;
        int i = static_cast<int>(std::floor(s));
        if (closed_) {
            i = ((i % n) + n) % n;
            return {i, s - std::floor(s)};
        }
        i = std::clamp(i, 0, n - 1);
        return {i, s - i};
    }
};

struct GeometryParams {
    double tau = 1.0;
    double d = 2.0;
    std::vector<Vec2> lower_points;    // at least the two endpoints on x1=0 and x1=d
    std::vector<Vec2> profile_points;  // empty for blade-free domains
    double delta_margin = -1.0;        // default d/10
};

/// One spatial period of the cascade: the strip between the lower curve and
/// its translate by (0, tau), cut at x1 = 0 and x1 = d, minus the optional
/// blade profile.
class CascadeGeometry {
  public:
    double tau = 1.0;
    double d = 2.0;
    CubicCurve lower;                    // Gamma^-
    std::optional<CubicCurve> profile;   // Gamma_w (closed)
    double delta_margin = 0.2;
    std::string curve_smoothness = "C1 piecewise cubic (C2 in segment interiors)";

    bool has_profile() const { return profile.has_value(); }

    CubicCurve upper() const { return lower.translated({0.0, tau}); }

    Vec2 corner_a_minus() const { return lower.eval(0.0); }
    Vec2 corner_a_plus() const { return corner_a_minus() + Vec2{0.0, tau}; }
    Vec2 corner_b_minus() const { return lower.eval(1.0); }
    Vec2 corner_b_plus() const { return corner_b_minus() + Vec2{0.0, tau}; }

    /// Height c(x1) of the lower curve; the lower curve is validated to be a
    /// graph over [0, d], so the parameter is recovered by bisection.
    double lower_height(double x1) const {
        if (x1 <= 0.0) return lower.eval(0.0).y;
        if (x1 >= d) return lower.eval(1.0).y;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 70; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (lower.eval(mid).x < x1) lo = mid;
            else hi = mid;
        }
        return lower.eval(0.5 * (lo + hi)).y;
    }

    double profile_min_x1(int samples = 512) const {
        double m = d;
        for (int k = 0; k < samples; ++k)
            m = std::min(m, profile->eval(static_cast<double>(k) / samples).x);
        return m;
    }
};

inline CascadeGeometry build_geometry(const GeometryParams& params) {
    if (params.tau <= 0) throw InvalidGeometry("tau must be positive");
    if (params.d <= 0) throw InvalidGeometry("d must be positive");

    CascadeGeometry g;
    g.tau = params.tau;
    g.d = params.d;
    g.delta_margin = params.delta_margin > 0 ? params.delta_margin : params.d / 10.0;

    std::vector<Vec2> lp = params.lower_points;
    if (lp.empty()) lp = {{0.0, 0.0}, {params.d, 0.0}};
    if (lp.size() < 2) throw InvalidGeometry("lower curve needs at least 2 points");
    const double snap = 1e-9 * std::max(1.0, params.d);
    if (std::abs(lp.front().x) > snap)
        throw InvalidGeometry("lower curve must start on the inflow line x1=0");
    if (std::abs(lp.back().x - params.d) > snap)
        throw InvalidGeometry("lower curve must end on the outflow line x1=d");
    lp.front().x = 0.0;
    lp.back().x = params.d;
    g.lower = CubicCurve(lp);

    // The strip is meshed as a graph x2 = c(x1); require x1 strictly increasing
    // along the curve, which also guarantees the translate never intersects it.
    const int ns = 1024;
    double prev = g.lower.eval(0.0).x;
    for (int k = 1; k <= ns; ++k) {
        const double x1 = g.lower.eval(static_cast<double>(k) / ns).x;
        if (x1 <= prev - 1e-12 * params.d)
            throw InvalidGeometry("lower curve is not x1-monotone; it would intersect its translate");
        prev = x1;
    }

    if (!params.profile_points.empty()) {
        if (params.profile_points.size() < 3)
            throw InvalidGeometry("profile needs at least 3 points");
        g.profile = CubicCurve(params.profile_points, /*closed=*/true);
        for (int k = 0; k < ns; ++k) {
            const Vec2 p = g.profile->eval(static_cast<double>(k) / ns);
            if (p.x < g.delta_margin || p.x > params.d - g.delta_margin)
                throw InvalidGeometry("profile touches the strip margin in x1");
            const double c = g.lower_height(p.x);
            if (p.y - c < g.delta_margin || (c + params.tau) - p.y < g.delta_margin)
                throw InvalidGeometry("profile too close to the periodic curves");
        }
    }
    return g;
}

/// Classify a boundary point. Corners A-+ belong to the inflow, B-+ to the
/// outflow (checked first), so Dirichlet data wins at A and the outflow corners
/// stay unconstrained.
inline BoundaryTag classify_boundary(const CascadeGeometry& g, const Vec2& p,
                                     double tol = -1.0) {
    if (tol <= 0) tol = 1e-8 * std::max(g.tau, g.d);
    const double c = g.lower_height(p.x);
    const bool in_band = p.y > c - tol && p.y < c + g.tau + tol;
    if (std::abs(p.x) <= tol && in_band) return BoundaryTag::Inflow;
    if (std::abs(p.x - g.d) <= tol && in_band) return BoundaryTag::Outflow;
    if (g.has_profile()) {
        const int ns = 2048;
        for (int k = 0; k < ns; ++k) {
            const Vec2 q = g.profile->eval(static_cast<double>(k) / ns);
            if ((q - p).norm() <= std::max(tol, 2.0 * g.profile->length() / ns))
                return BoundaryTag::Profile;
        }
    }
    if (p.x >= -tol && p.x <= g.d + tol) {
        if (std::abs(p.y - c) <= tol) return BoundaryTag::Lower;
        if (std::abs(p.y - (c + g.tau)) <= tol) return BoundaryTag::Upper;
    }
    throw NotOnBoundary("point is not on the domain boundary");
}

}  // namespace cascade
