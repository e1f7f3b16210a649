#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pfdoa {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline constexpr double squared_norm(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Axis-aligned rectangle [min.x, max.x] x [min.y, max.y].
struct Rect {
    Vec2 min;
    Vec2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    Vec2 center() const { return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y)}; }
    bool has_area() const { return width() > 0.0 && height() > 0.0 && std::isfinite(width()) && std::isfinite(height()); }

    bool contains(Vec2 p, double slack = 0.0) const {
        return p.x >= min.x - slack && p.x <= max.x + slack && p.y >= min.y - slack && p.y <= max.y + slack;
    }

    Vec2 clamp(Vec2 p) const {
        return {std::fmin(std::fmax(p.x, min.x), max.x), std::fmin(std::fmax(p.y, min.y), max.y)};
    }
};

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

} // namespace pfdoa
