#pragma once

#include <cmath>
#include <vector>

namespace tpgen {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

// z-component of the 3-D cross product; positive when b is counterclockwise of a.
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Cumulative arc lengths of a polyline; result[0] = 0, result.back() = total length.
std::vector<double> cumulative_lengths(const std::vector<Vec2>& polyline);

// Point at arc position s along the polyline (clamped to [0, total length]).
Vec2 point_at_arc_length(const std::vector<Vec2>& polyline,
                         const std::vector<double>& cumulative, double s);

}  // namespace tpgen
