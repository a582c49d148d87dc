#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "anosov/errors.hpp"

namespace anosov {

struct Vec2 {
    double x{0.0}, y{0.0};

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm_inf() const { return std::max(std::fabs(x), std::fabs(y)); }
    Vec2 normalized() const {
        double n = norm();
        return {x / n, y / n};
    }
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Lift coordinates on the universal cover R^2.
using LiftPoint = Vec2;

struct Mat2 {
    // [[a, b], [c, d]]
    double a{1.0}, b{0.0}, c{0.0}, d{1.0};

    Mat2() = default;
    Mat2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Vec2 operator*(const Vec2& v) const { return apply(v); }
    Mat2 operator*(const Mat2& m) const {
        return {a * m.a + b * m.c, a * m.b + b * m.d,
                c * m.a + d * m.c, c * m.b + d * m.d};
    }
    Mat2 operator+(const Mat2& m) const { return {a + m.a, b + m.b, c + m.c, d + m.d}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

    double det() const { return a * d - b * c; }
    double norm_inf() const {
        return std::max(std::fabs(a) + std::fabs(b), std::fabs(c) + std::fabs(d));
    }
    Mat2 inverse() const {
        double dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
    Mat2 transpose() const { return {a, c, b, d}; }
};

struct IMat2 {
    std::int64_t a{1}, b{0}, c{0}, d{1};

    static IMat2 identity() { return {1, 0, 0, 1}; }

    std::int64_t det() const { return a * d - b * c; }
    IMat2 operator*(const IMat2& m) const {
        return {a * m.a + b * m.c, a * m.b + b * m.d,
                c * m.a + d * m.c, c * m.b + d * m.d};
    }
    IMat2 operator-(const IMat2& m) const { return {a - m.a, b - m.b, c - m.c, d - m.d}; }
    std::array<std::int64_t, 2> apply(std::int64_t x, std::int64_t y) const {
        return {a * x + b * y, c * x + d * y};
    }
    // adj(M) * M = det(M) * I
    IMat2 adjugate() const { return {d, -b, -c, a}; }
    Mat2 real() const {
        return {static_cast<double>(a), static_cast<double>(b),
                static_cast<double>(c), static_cast<double>(d)};
    }
    bool operator==(const IMat2& m) const { return a == m.a && b == m.b && c == m.c && d == m.d; }
};

IMat2 ipow(IMat2 base, int n);

// ---- torus reduction -------------------------------------------------------

// Reduce into [0,1). Floor-based; values within one ulp below 1.0 stay put,
// exact 1.0 wraps to 0.
inline double wrap01(double t) {
    double r = t - std::floor(t);
    if (r >= 1.0) r -= 1.0;
    if (r < 0.0) r += 1.0;
    return r;
}

// Representative of t mod 1 in [-1/2, 1/2).
inline double wrap_half(double t) {
    double r = t - std::round(t);
    if (r < -0.5) r += 1.0;
    if (r >= 0.5) r -= 1.0;
    return r;
}

struct TorusPoint {
    double x{0.0}, y{0.0}; // both in [0,1)

    TorusPoint() = default;
    TorusPoint(double x_, double y_) : x(wrap01(x_)), y(wrap01(y_)) {}

    Vec2 lift() const { return {x, y}; }
    bool operator==(const TorusPoint& o) const { return x == o.x && y == o.y; }
};

inline TorusPoint project(const Vec2& u) { return {u.x, u.y}; }

// Flat torus metric: min over integer translates.
inline double torus_dist(const TorusPoint& p, const TorusPoint& q) {
    return std::hypot(wrap_half(p.x - q.x), wrap_half(p.y - q.y));
}

// Shortest displacement q - p as a vector on the cover.
inline Vec2 torus_displacement(const TorusPoint& p, const TorusPoint& q) {
    return {wrap_half(q.x - p.x), wrap_half(q.y - p.y)};
}

// Lift q next to the lifted point u_p (nearest-image convention).
inline Vec2 lift_near(const Vec2& u_p, const TorusPoint& q) {
    return {u_p.x + wrap_half(q.x - u_p.x), u_p.y + wrap_half(q.y - u_p.y)};
}

// ---- angles ----------------------------------------------------------------

// Angle between vectors in [0, pi].
inline double vector_angle(const Vec2& u, const Vec2& v) {
    return std::atan2(std::fabs(u.cross(v)), u.dot(v));
}

// Angle between the lines spanned by u and v, in [0, pi/2].
inline double line_angle(const Vec2& u, const Vec2& v) {
    double a = std::atan2(std::fabs(u.cross(v)), std::fabs(u.dot(v)));
    return a;
}

inline Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

// ---- eigen data of a hyperbolic 2x2 ----------------------------------------

struct EigenSplit {
    double mu_u{0.0};   // eigenvalue with |mu| > 1 (may be negative)
    double mu_s{0.0};   // eigenvalue with |mu| < 1
    Vec2 e_u;           // unit eigenvectors
    Vec2 e_s;
    double lambda_u() const { return std::log(std::fabs(mu_u)); }
    double lambda_s() const { return std::log(std::fabs(mu_s)); }
};

// Real eigen-decomposition of a 2x2 with real distinct eigenvalues off the
// unit circle. Throws DegenerateMatrix otherwise.
EigenSplit eig_hyperbolic(const Mat2& m);

// ---- integer lattice helpers ------------------------------------------------

// c in M Z^2 ?  (M nonsingular integer matrix)
bool in_lattice(const IMat2& m, std::int64_t cx, std::int64_t cy);

// Column-style Hermite form of the lattice M Z^2: returns lower-triangular
// H = [[h11, 0], [h21, h22]] with h11, h22 > 0 spanning the same lattice.
IMat2 hnf_lower(const IMat2& m);

// Representatives of Z^2 / M Z^2 (exactly |det M| of them).
std::vector<std::array<std::int64_t, 2>> coset_representatives(const IMat2& m);

} // namespace anosov
