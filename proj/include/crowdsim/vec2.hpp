#pragma once

#include <cmath>

namespace crowd {

/// Plain 2D vector in meters or meters/second, depending on context.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// z-component of the 3D cross product.
constexpr double det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

constexpr double abs_sq(Vec2 v) { return dot(v, v); }

inline double norm(Vec2 v) { return std::sqrt(abs_sq(v)); }

inline Vec2 normalized(Vec2 v) {
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec2{};
}

/// Counter-clockwise perpendicular.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

/// A wall or obstacle edge between two points.
struct Segment {
    Vec2 a;
    Vec2 b;
};

/// Closest point of `s` to `p`.
inline Vec2 closest_point(const Segment& s, Vec2 p) {
    const Vec2 ab = s.b - s.a;
    const double len_sq = abs_sq(ab);
    if (len_sq == 0.0) {
        return s.a;
    }
    double t = dot(p - s.a, ab) / len_sq;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return s.a + ab * t;
}

}  // namespace crowd
