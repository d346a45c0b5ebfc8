#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace css {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// 2D cross product det(a, b).
inline double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline Vec2 normalized(const Vec2& v) { double n = v.norm(); return {v.x / n, v.y / n}; }
/// Rotate by +90 degrees.
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Infinite line given by a point and a unit direction.
struct Line {
    Vec2 point;
    Vec2 dir;  // unit

    static Line through(const Vec2& a, const Vec2& b) { return {a, normalized(b - a)}; }

    /// Signed distance of p from the line (positive on the perp(dir) side).
    double signed_offset(const Vec2& p) const { return det(dir, p - point); }
    /// Foot of the perpendicular dropped from the origin.
    Vec2 origin_foot() const { return point - dir * dot(dir, point); }
};

/// Intersection of two lines; empty when directions are parallel within tol.
inline std::optional<Vec2> intersect_lines(const Line& a, const Line& b, double tol = 1e-14) {
    double d = det(a.dir, b.dir);
    if (std::fabs(d) <= tol) return std::nullopt;
    double u = det(b.point - a.point, b.dir) / d;
    return a.point + a.dir * u;
}

/// True when the two lines coincide as point sets within the given tolerances.
inline bool same_line(const Line& a, const Line& b, double angle_tol, double offset_tol) {
    if (std::fabs(det(a.dir, b.dir)) > angle_tol) return false;
    return std::fabs(a.signed_offset(b.point)) <= offset_tol;
}

/// Reduce an angle to (-pi, pi].
inline double principal_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    if (a > kPi) a -= kTwoPi;
    return a;
}

/// Distance of angle a from the nearest multiple of pi.
inline double mod_pi_distance(double a) {
    double r = std::fmod(std::fabs(a), kPi);
    return std::min(r, kPi - r);
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0.0) return distance(p, a);
    double u = dot(p - a, ab) / len2;
    u = std::fmax(0.0, std::fmin(1.0, u));
    return distance(p, a + ab * u);
}

}  // namespace css
