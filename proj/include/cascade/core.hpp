#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace cascade {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(const Vec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// 2x2 tensor, m[i][j]; for gradients m[i][j] = d(component i)/d(x_j).
using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 zero_mat2() { return {{{0.0, 0.0}, {0.0, 0.0}}}; }

using ScalarFn = std::function<double(Vec2)>;
using VectorFn = std::function<Vec2(Vec2)>;
using TensorFn = std::function<Mat2(Vec2)>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidGeometry : Error { using Error::Error; };
struct NotOnBoundary : Error { using Error::Error; };
struct MeshFailure : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct ConstraintConflict : Error { using Error::Error; };
struct IncompatibleCorners : Error { using Error::Error; };
struct CompatibilityFailure : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct UnknownCase : Error { using Error::Error; };
struct UnsupportedSegment : Error { using Error::Error; };
struct PeriodMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace cascade
