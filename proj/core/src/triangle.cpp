#include "geogasket/triangle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "geogasket/errors.hpp"

namespace geogasket {

namespace {

void require_triangle_inequality(const SideLengths& a) {
    for (int i = 0; i < 3; ++i) {
        if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
            throw DegenerateTriangleError("side " + std::to_string(i) + " has length " +
                                          std::to_string(a[i]));
        }
    }
    for (int i = 0; i < 3; ++i) {
        if (!(a[i] < a[(i + 1) % 3] + a[(i + 2) % 3])) {
            throw DegenerateTriangleError("side lengths (" + std::to_string(a[0]) + ", " +
                                          std::to_string(a[1]) + ", " + std::to_string(a[2]) +
                                          ") violate the strict triangle inequality");
        }
    }
}

// Half-angle tangent form: tan(alpha_i / 2) = sqrt(f(s-b) f(s-c) / (f(s) f(s-a))),
// with f = identity, sin or sinh. Stable for thin and obtuse triangles alike.
template <class F>
std::array<double, 3> half_angle_solve(const SideLengths& a, F f) {
    const double s = 0.5 * (a[0] + a[1] + a[2]);
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        const double num = f(s - a[(i + 1) % 3]) * f(s - a[(i + 2) % 3]);
        const double den = f(s) * f(s - a[i]);
        out[i] = 2.0 * std::atan2(std::sqrt(num), std::sqrt(den));
    }
    return out;
}

}  // namespace

ComparisonAngles planar_comparison_angles(const SideLengths& a) {
    require_triangle_inequality(a);
    return {ComparisonSpace::plane, half_angle_solve(a, [](double x) { return x; })};
}

ComparisonAngles spherical_comparison_angles(const SideLengths& a) {
    require_triangle_inequality(a);
    for (double x : a) {
        if (!(x < std::numbers::pi)) throw DomainError("spherical side must be shorter than pi");
    }
    if (!(a[0] + a[1] + a[2] < 2.0 * std::numbers::pi)) {
        throw DomainError("spherical perimeter must be below 2 pi");
    }
    return {ComparisonSpace::sphere, half_angle_solve(a, [](double x) { return std::sin(x); })};
}

ComparisonAngles hyperbolic_comparison_angles(const SideLengths& a) {
    require_triangle_inequality(a);
    return {ComparisonSpace::hyperbolic,
            half_angle_solve(a, [](double x) { return std::sinh(x); })};
}

NondegeneracyReport is_delta_nondegenerate(const SideLengths& a, double delta) {
    if (!(delta > 0.0 && delta < std::numbers::pi / 2)) {
        throw DomainError("non-degeneracy delta must lie in (0, pi/2)");
    }
    NondegeneracyReport r;
    r.angles = planar_comparison_angles(a);
    r.min_angle = std::min({r.angles.alpha[0], r.angles.alpha[1], r.angles.alpha[2]});
    r.max_angle = std::max({r.angles.alpha[0], r.angles.alpha[1], r.angles.alpha[2]});
    // acos rounds pi/3 up by an ulp; keep boundary cases on the failing side
    constexpr double guard = 1e-14;
    r.ok = r.min_angle > delta + guard && r.max_angle < std::numbers::pi - delta - guard;
    return r;
}

EdgeQuotientReport edge_quotient_bound(const SideLengths& a, double delta) {
    const auto nd = is_delta_nondegenerate(a, delta);
    if (!nd.ok) throw DomainError("edge quotient bound needs a delta-non-degenerate triangle");
    const double lo = std::min({a[0], a[1], a[2]});
    const double hi = std::max({a[0], a[1], a[2]});
    EdgeQuotientReport r;
    r.max_quotient = hi / lo;
    r.bound = 1.0 / std::sin(delta);
    r.holds = r.max_quotient <= r.bound;
    return r;
}

double nondegeneracy_perturbation(double delta) {
    if (!(delta > 0.0 && delta < std::numbers::pi / 2)) {
        throw DomainError("non-degeneracy delta must lie in (0, pi/2)");
    }
    // |d alpha| <= 4 cot(delta/2) max|d log a| while all angles stay in
    // (delta/2, pi - delta/2); keep the total drift below delta/2.
    const double eta = delta * std::tan(delta / 2) / 8.0;
    return 0.5 * (1.0 - std::exp(-eta));
}

GeodesicTriangle::GeodesicTriangle(Surface surface, std::array<SurfacePoint, 3> p,
                                   std::array<std::array<TangentVector, 3>, 3> w)
    : surface_(std::move(surface)), p_(p), w_(w) {
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        a_[i] = surface_.norm(p_[j], w_[j][k]);
    }
}

GeodesicTriangle GeodesicTriangle::build(const Surface& surface, const SurfacePoint& p0,
                                         const SurfacePoint& p1, const SurfacePoint& p2) {
    const std::array<SurfacePoint, 3> p{p0, p1, p2};
    for (int i = 0; i < 3; ++i) {
        if (!surface.contains(p[i])) {
            throw DomainError("triangle vertex " + std::to_string(i) + " lies outside the chart");
        }
    }
    std::array<std::array<TangentVector, 3>, 3> w{};
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const auto seg = surface.geodesic_between(p[i], p[j]);
            if (seg.length > surface.convexity_guard()) {
                throw ConstructionError("triangle diameter " + std::to_string(seg.length) +
                                        " exceeds the convexity guard " +
                                        std::to_string(surface.convexity_guard()));
            }
            w[i][j] = seg.initial_velocity;
            w[j][i] = -seg.final_velocity;
        }
    }
    GeodesicTriangle tri(surface, p, w);
    require_triangle_inequality(tri.a_);
    return tri;
}

GeodesicSegment GeodesicTriangle::side(int i) const {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    return {p_[j], p_[k], w_[j][k], -w_[k][j], a_[i]};
}

SurfacePoint GeodesicTriangle::phi(int i, double t, double s) const {
    if (!(t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0)) {
        throw DomainError("phi needs t in [0,1] and s in [0,1]");
    }
    return phi_affine(i, s * (1.0 - t), s * t);
}

SurfacePoint GeodesicTriangle::phi_affine(int i, double alpha, double beta) const {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const double s = alpha + beta;
    if (s == 0.0) return p_[i];
    const double t = beta / s;
    const SurfacePoint A = s == 1.0 ? p_[k] : surface_.exp_map(p_[i], w_[i][k], s);
    const SurfacePoint B = s == 1.0 ? p_[j] : surface_.exp_map(p_[i], w_[i][j], s);
    if (t == 0.0) return A;
    if (t == 1.0) return B;
    if (surface_.kind() == SurfaceKind::euclidean) return A + (B - A) * t;
    return surface_.exp_map(A, surface_.log_map(A, B), t);
}

GeodesicTriangle GeodesicTriangle::slice(int i, double s) const {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("slice parameter must lie in (0,1]");
    if (s == 1.0) return *this;
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const auto A = surface_.exp_state(p_[i], w_[i][k], s);
    const auto B = surface_.exp_state(p_[i], w_[i][j], s);
    const auto mid = surface_.geodesic_between(A.position, B.position);

    std::array<SurfacePoint, 3> p{};
    p[i] = p_[i];
    p[k] = A.position;
    p[j] = B.position;
    std::array<std::array<TangentVector, 3>, 3> w{};
    w[i][k] = w_[i][k] * s;
    w[i][j] = w_[i][j] * s;
    w[k][i] = A.velocity * -s;
    w[j][i] = B.velocity * -s;
    w[k][j] = mid.initial_velocity;
    w[j][k] = -mid.final_velocity;
    return GeodesicTriangle(surface_, p, w);
}

double GeodesicTriangle::vertex_angle(int i) const {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    return surface_.angle(p_[i], w_[i][j], w_[i][k]);
}

Subdivision GeodesicTriangle::subdivide() const {
    // Midpoint m[x] of side x (from vertex x+1 to x+2) with the side's velocity there.
    std::array<GeodesicState, 3> m{};
    for (int x = 0; x < 3; ++x) {
        const int a = (x + 1) % 3, b = (x + 2) % 3;
        m[x] = surface_.exp_state(p_[a], w_[a][b], 0.5);
        if (surface_.kind() == SurfaceKind::euclidean) m[x].position = (p_[a] + p_[b]) * 0.5;
    }
    // Midlines: line[x] joins m[x+1] to m[x+2], i.e. it is the side of the
    // centre triangle opposite slot x.
    std::array<GeodesicSegment, 3> line{};
    for (int x = 0; x < 3; ++x) {
        line[x] = surface_.geodesic_between(m[(x + 1) % 3].position, m[(x + 2) % 3].position);
    }

    auto corner = [&](int i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        // Slot j holds the midpoint of edge i-j (side k); slot k the midpoint of edge i-k (side j).
        std::array<SurfacePoint, 3> p{};
        p[i] = p_[i];
        p[j] = m[k].position;
        p[k] = m[j].position;
        std::array<std::array<TangentVector, 3>, 3> w{};
        w[i][j] = w_[i][j] * 0.5;
        w[i][k] = w_[i][k] * 0.5;
        // Side k runs from vertex i to j, so at its midpoint the velocity points to j.
        w[j][i] = m[k].velocity * -0.5;
        // Side j runs from vertex k to i.
        w[k][i] = m[j].velocity * 0.5;
        // line[i] runs from m[j] (slot k) to m[k] (slot j).
        w[k][j] = line[i].initial_velocity;
        w[j][k] = -line[i].final_velocity;
        return GeodesicTriangle(surface_, p, w);
    };

    std::array<SurfacePoint, 3> cp{m[0].position, m[1].position, m[2].position};
    std::array<std::array<TangentVector, 3>, 3> cw{};
    for (int x = 0; x < 3; ++x) {
        const int a = (x + 1) % 3, b = (x + 2) % 3;
        cw[a][b] = line[x].initial_velocity;
        cw[b][a] = -line[x].final_velocity;
    }
    return {{corner(0), corner(1), corner(2)}, GeodesicTriangle(surface_, cp, cw)};
}

GeodesicTriangle::Location GeodesicTriangle::locate(const SurfacePoint& x, int i) const {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const Vec2 ek = p_[k] - p_[i];
    const Vec2 ej = p_[j] - p_[i];
    const double scale = std::max({norm(ek), norm(ej), norm(p_[j] - p_[k])});
    const double det = cross(ek, ej);
    if (det == 0.0) throw DegenerateTriangleError("triangle is degenerate in the chart");

    // Seed from the chart-affine coordinates, then Newton with a
    // finite-difference Jacobian and step halving.
    const Vec2 d = x - p_[i];
    double al = cross(d, ej) / det;
    double be = cross(ek, d) / det;
    auto F = [&](double a, double b) { return phi_affine(i, a, b) - x; };
    Vec2 f = F(al, be);
    double res = norm(f);
    const double target = 1e-13 * scale;
    for (int it = 0; it < 40 && res > target; ++it) {
        const double h = 1e-7;
        const Vec2 fa = (F(al + h, be) - f) * (1.0 / h);
        const Vec2 fb = (F(al, be + h) - f) * (1.0 / h);
        const double jd = cross(fa, fb);
        if (jd == 0.0 || !std::isfinite(jd)) break;
        const double da = -cross(f, fb) / jd;
        const double db = -cross(fa, f) / jd;
        double lam = 1.0;
        bool improved = false;
        for (int k2 = 0; k2 < 20; ++k2) {
            const Vec2 trial = F(al + lam * da, be + lam * db);
            if (norm(trial) < res) {
                al += lam * da;
                be += lam * db;
                f = trial;
                res = norm(trial);
                improved = true;
                break;
            }
            lam *= 0.5;
        }
        if (!improved) break;
    }
    if (!(res <= 1e-7 * scale)) throw ConvergenceError("triangle parameter inversion failed", res);
    Location loc;
    loc.alpha = al;
    loc.beta = be;
    loc.s = al + be;
    loc.t = loc.s != 0.0 ? be / loc.s : 0.0;
    loc.residual = res;
    return loc;
}

bool GeodesicTriangle::contains(const SurfacePoint& x, double tol) const {
    try {
        return locate(x, 0).inside(tol);
    } catch (const ConvergenceError&) {
        return false;
    } catch (const EscapeError&) {
        return false;
    }
}

AngleGap angle_stability(const GeodesicTriangle& base, int i, double s, double t) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const auto as = planar_comparison_angles(base.slice(i, s).side_lengths());
    const auto at = s == t ? as : planar_comparison_angles(base.slice(i, t).side_lengths());
    return {std::abs(as.alpha[k] - at.alpha[k]), std::abs(as.alpha[j] - at.alpha[j])};
}

}  // namespace geogasket
