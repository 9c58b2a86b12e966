#pragma once

#include <cmath>

namespace geogasket {

/// Two chart components. Used both for chart points and for tangent vectors
/// expressed in the coordinate frame (d/du, d/dv).
struct Vec2 {
    double u = 0.0;
    double v = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) {
        u += o.u;
        v += o.v;
        return *this;
    }
    constexpr Vec2& operator-=(const Vec2& o) {
        u -= o.u;
        v -= o.v;
        return *this;
    }
    constexpr Vec2& operator*=(double k) {
        u *= k;
        v *= k;
        return *this;
    }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator*(Vec2 a, double k) { return a *= k; }
    friend constexpr Vec2 operator*(double k, Vec2 a) { return a *= k; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.u, -a.v}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.u * b.u + a.v * b.v; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.u * b.v - a.v * b.u; }
inline double norm(const Vec2& a) { return std::hypot(a.u, a.v); }

/// Chart point. Kept distinct from Vec2 only by name; arithmetic is shared.
using SurfacePoint = Vec2;
using TangentVector = Vec2;

}  // namespace geogasket
