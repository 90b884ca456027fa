#pragma once

#include <map>
#include <random>
#include <string>

#include "cascade/geometry.hpp"

namespace cascade {

/// Closed-form tau-periodic solution pair with the derived problem data:
///   f = -nu lap(u) + grad p,  g = u|_{Gamma_i},  h = (-nu du/dn + p n)|_{Gamma_o}.
/// All velocities come from stream functions of x2 alone, so div u = 0 holds
/// identically and the fields solve the problem on any blade-free period (the
/// periodic sides carry no kinematic constraint). The corner-compatible case
/// vanishes on a band of x2, so it also solves bladed problems whose profile
/// stays inside that band.
struct ManufacturedCase {
    std::string id;
    double nu = 1.0;
    double tau = 1.0;
    double y0 = 0.0;  // ordinate of the corner A-
    bool blade_compatible = false;
    bool corner_compatible = false;

    VectorFn u;
    TensorFn grad_u;
    ScalarFn p;
    VectorFn f;
    VectorFn g;  // inflow trace of u
    VectorFn h;  // outflow traction
};

namespace detail {

// C3 smoothstep on [0,1] and its first two derivatives
inline double step7(double u) { return u * u * u * u * (35 + u * (-84 + u * (70 - 20 * u))); }
inline double step7_d1(double u) {
    const double a = u * u * u, b = (1 - u) * (1 - u) * (1 - u);
    return 140.0 * a * b;
}
inline double step7_d2(double u) {
    const double a = u * u, b = (1 - u) * (1 - u);
    return 420.0 * a * b * (1 - 2 * u);
}

/// Plateau bump on [0,1): zero outside (lo, hi), one on [lo+w, hi-w]; C3.
inline double plateau(double xi, int deriv, double lo, double w, double hi) {
    if (xi <= lo || xi >= hi) return 0.0;
    if (xi < lo + w) {
        const double u = (xi - lo) / w;
        if (deriv == 0) return step7(u);
        if (deriv == 1) return step7_d1(u) / w;
        return step7_d2(u) / (w * w);
    }
    if (xi <= hi - w) return deriv == 0 ? 1.0 : 0.0;
    const double u = (hi - xi) / w;
    if (deriv == 0) return step7(u);
    if (deriv == 1) return -step7_d1(u) / w;
    return step7_d2(u) / (w * w);
}

}  // namespace detail

inline ManufacturedCase make_case(const std::string& id, double nu, double tau, double y0) {
    ManufacturedCase c;
    c.id = id;
    c.nu = nu;
    c.tau = tau;
    c.y0 = y0;
    const double om = 2.0 * M_PI / tau;

    if (id == "uniform") {
        c.u = [](Vec2) { return Vec2{1.0, 0.0}; };
        c.grad_u = [](Vec2) { return zero_mat2(); };
        c.p = [](Vec2) { return 0.0; };
        c.f = [](Vec2) { return Vec2{0.0, 0.0}; };
        c.g = c.u;
        c.h = [](Vec2) { return Vec2{0.0, 0.0}; };
        return c;
    }

    if (id == "sine") {
        // stream function psi = (tau/2pi) cos(om x2):  u = (sin(om x2), 0)
        c.u = [om](Vec2 x) { return Vec2{std::sin(om * x.y), 0.0}; };
        c.grad_u = [om](Vec2 x) {
            Mat2 g = zero_mat2();
            g[0][1] = om * std::cos(om * x.y);
            return g;
        };
        c.p = [om](Vec2 x) { return std::cos(om * x.y); };
        c.f = [om, nu](Vec2 x) {
            return Vec2{nu * om * om * std::sin(om * x.y), -om * std::sin(om * x.y)};
        };
        c.g = c.u;
        c.h = [om](Vec2 x) { return Vec2{std::cos(om * x.y), 0.0}; };  // du/dx1 = 0, so h = p e1
        return c;
    }

    if (id == "corner-compatible") {
        // sine profile windowed by a C3 plateau in xi = (x2 - y0)/tau mod 1:
        // zero outside (0.05, 0.35), so g vanishes near the corner ordinates
        // and u vanishes on blades confined to xi in [0.35, 1].
        c.blade_compatible = true;
        c.corner_compatible = true;
        const double lo = 0.05, w = 0.10, hi = 0.35;
        auto u1 = [om, tau, y0, lo, w, hi](double x2, int deriv) -> double {
            const double xi_raw = (x2 - y0) / tau;
            const double xi = xi_raw - std::floor(xi_raw);
            const double q = 2.0 * M_PI;
            const double s = std::sin(q * xi), cv = std::cos(q * xi);
            const double B0 = detail::plateau(xi, 0, lo, w, hi);
            const double B1 = detail::plateau(xi, 1, lo, w, hi);
            const double B2 = detail::plateau(xi, 2, lo, w, hi);
            if (deriv == 0) return s * B0;
            if (deriv == 1) return (q * cv * B0 + s * B1) / tau;
            return (-q * q * s * B0 + 2 * q * cv * B1 + s * B2) / (tau * tau);
        };
        c.u = [u1](Vec2 x) { return Vec2{u1(x.y, 0), 0.0}; };
        c.grad_u = [u1](Vec2 x) {
            Mat2 g = zero_mat2();
            g[0][1] = u1(x.y, 1);
            return g;
        };
        c.p = [om, y0](Vec2 x) { return std::cos(om * (x.y - y0)); };
        c.f = [u1, om, y0, nu](Vec2 x) {
            return Vec2{-nu * u1(x.y, 2), -om * std::sin(om * (x.y - y0))};
        };
        c.g = c.u;
        c.h = [om, y0](Vec2 x) { return Vec2{std::cos(om * (x.y - y0)), 0.0}; };
        return c;
    }

    throw UnknownCase("unknown case id '" + id + "' (known: uniform, sine, corner-compatible)");
}

inline ManufacturedCase make_case(const std::string& id, const CascadeGeometry& geom, double nu) {
    return make_case(id, nu, geom.tau, geom.corner_a_minus().y);
}

/// Oracle gate: verify the derived f, g, h and grad_u of a case against
/// centered finite differences of (u, p) at seeded random points, to 1e-6
/// relative to the scale of each quantity over the sample. Throws on
/// disagreement; run once before any study uses the case.
inline void verify_case_derivations(const ManufacturedCase& c, double d, int npoints = 20,
                                    double tol = 1e-6) {
    std::mt19937 rng(20240901u);
    std::uniform_real_distribution<double> ux(0.15 * d, 0.85 * d);
    std::uniform_real_distribution<double> uy(c.y0 + 0.02 * c.tau, c.y0 + 0.98 * c.tau);
    const double eps = 1e-5 * std::max(1.0, c.tau);

    std::map<std::string, std::pair<double, double>> cols;  // what -> (max diff, scale)
    auto check = [&cols](double got, double want, const char* what) {
        auto& [diff, scale] = cols[what];
        diff = std::max(diff, std::abs(got - want));
        scale = std::max({scale, 1.0, std::abs(want)});
    };

    for (int k = 0; k < npoints; ++k) {
        const Vec2 x{ux(rng), uy(rng)};
        const Vec2 ex{eps, 0}, ey{0, eps};

        const double div_fd = (c.u(x + ex).x - c.u(x - ex).x) / (2 * eps) +
                              (c.u(x + ey).y - c.u(x - ey).y) / (2 * eps);
        check(div_fd, 0.0, "div u");

        const Mat2 g = c.grad_u(x);
        check((c.u(x + ex).x - c.u(x - ex).x) / (2 * eps), g[0][0], "du1/dx1");
        check((c.u(x + ey).x - c.u(x - ey).x) / (2 * eps), g[0][1], "du1/dx2");
        check((c.u(x + ex).y - c.u(x - ex).y) / (2 * eps), g[1][0], "du2/dx1");
        check((c.u(x + ey).y - c.u(x - ey).y) / (2 * eps), g[1][1], "du2/dx2");

        const Vec2 lap{(c.u(x + ex).x - 2 * c.u(x).x + c.u(x - ex).x) / (eps * eps) +
                           (c.u(x + ey).x - 2 * c.u(x).x + c.u(x - ey).x) / (eps * eps),
                       (c.u(x + ex).y - 2 * c.u(x).y + c.u(x - ex).y) / (eps * eps) +
                           (c.u(x + ey).y - 2 * c.u(x).y + c.u(x - ey).y) / (eps * eps)};
        const Vec2 gp{(c.p(x + ex) - c.p(x - ex)) / (2 * eps),
                      (c.p(x + ey) - c.p(x - ey)) / (2 * eps)};
        const Vec2 f = c.f(x);
        check(f.x, -c.nu * lap.x + gp.x, "f1");
        check(f.y, -c.nu * lap.y + gp.y, "f2");

        const Vec2 xt = x + Vec2{0, c.tau};
        check((c.u(xt) - c.u(x)).norm(), 0.0, "periodicity of u");
        check(c.p(xt) - c.p(x), 0.0, "periodicity of p");

        const Vec2 xi{0.0, x.y};
        check((c.g(xi) - c.u(xi)).norm(), 0.0, "g = trace of u");
        const Vec2 xo{d, x.y};
        const Mat2 go = c.grad_u(xo);
        const Vec2 want_h{-c.nu * go[0][0] + c.p(xo), -c.nu * go[1][0]};
        check((c.h(xo) - want_h).norm(), 0.0, "h = outflow traction");
    }

    for (const auto& [what, ds] : cols)
        if (ds.first > tol * ds.second)
            throw Error("manufactured-case oracle mismatch in " + what + " (" +
                        std::to_string(ds.first) + " vs scale " + std::to_string(ds.second) + ")");
}

}  // namespace cascade
