#pragma once

#include <array>
#include <cmath>

namespace rfsi {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double norm_inf(const Vec2& a) { return std::max(std::abs(a.x), std::abs(a.y)); }

// Column-major-free tiny 2x2 matrix; m[r][c].
struct Mat2 {
    std::array<std::array<double, 2>, 2> m{{{1.0, 0.0}, {0.0, 1.0}}};

    static Mat2 identity() { return {}; }
    static Mat2 zero() { Mat2 z; z.m = {{{0.0, 0.0}, {0.0, 0.0}}}; return z; }

    double& operator()(int r, int c) { return m[r][c]; }
    double operator()(int r, int c) const { return m[r][c]; }

    Vec2 operator*(const Vec2& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
    }
    Mat2 operator*(const Mat2& o) const {
        Mat2 r = zero();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j];
        return r;
    }
    Mat2 operator+(const Mat2& o) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }
    Mat2 operator-(const Mat2& o) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }
    Mat2 operator*(double s) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }
    Mat2 transposed() const {
        Mat2 r;
        r.m = {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}};
        return r;
    }
    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
    double trace() const { return m[0][0] + m[1][1]; }
    double norm_fro() const {
        return std::sqrt(m[0][0] * m[0][0] + m[0][1] * m[0][1] +
                         m[1][0] * m[1][0] + m[1][1] * m[1][1]);
    }
};

// Signed area of triangle (a, b, c); positive when counterclockwise.
inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross(b - a, c - a);
}

// Angle of (p - center) in [0, 2*pi).
inline double angle_about(const Vec2& p, const Vec2& center) {
    double a = std::atan2(p.y - center.y, p.x - center.x);
    if (a < 0.0) a += 2.0 * M_PI;
    return a;
}

}  // namespace rfsi
