#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "geogasket/errors.hpp"
#include "geogasket/triangle.hpp"
#include "oracles.hpp"

using namespace geogasket;
using std::numbers::pi;

namespace {

// Equilateral chart triangle centred at the origin with circumradius R.
std::array<SurfacePoint, 3> chart_equilateral(double R) {
    return {SurfacePoint{0, R}, SurfacePoint{-R * std::sqrt(3.0) / 2, -R / 2},
            SurfacePoint{R * std::sqrt(3.0) / 2, -R / 2}};
}

GeodesicTriangle make(const Surface& s, const std::array<SurfacePoint, 3>& p) {
    return GeodesicTriangle::build(s, p[0], p[1], p[2]);
}

double half_angle(double a, double b, double c) {
    const double s = 0.5 * (a + b + c);
    return 2 * std::asin(std::sqrt((s - b) * (s - c) / (b * c)));
}

}  // namespace

TEST_CASE("planar comparison angles") {
    const auto eq = planar_comparison_angles({1, 1, 1});
    for (double a : eq.alpha) CHECK(a == doctest::Approx(pi / 3).epsilon(1e-15));
    CHECK(planar_comparison_angles({5, 3, 4}).alpha[0] == doctest::Approx(pi / 2).epsilon(1e-15));
    const double apex = planar_comparison_angles({1.9, 1, 1}).alpha[0];
    CHECK(apex == doctest::Approx(std::acos((1 + 1 - 3.61) / 2)).epsilon(1e-14));
    CHECK(apex == doctest::Approx(half_angle(1.9, 1, 1)).epsilon(1e-12));
    CHECK_THROWS_AS(planar_comparison_angles({2, 1, 1}), DegenerateTriangleError);
}

TEST_CASE("spherical and hyperbolic comparison angles") {
    for (double a : spherical_comparison_angles({pi / 2, pi / 2, pi / 2}).alpha)
        CHECK(a == doctest::Approx(pi / 2).epsilon(1e-14));
    for (double a : spherical_comparison_angles({0.01, 0.01, 0.01}).alpha)
        CHECK(std::abs(a - pi / 3) <= 1e-4);
    for (double a : hyperbolic_comparison_angles({0.01, 0.01, 0.01}).alpha)
        CHECK(std::abs(a - pi / 3) <= 1e-4);
    CHECK_THROWS_AS(hyperbolic_comparison_angles({1, 1, 2.5}), DegenerateTriangleError);
    CHECK_THROWS_AS(spherical_comparison_angles({3.0, 3.0, 0.5}), DomainError);

    // alpha_- <= alpha_0 <= alpha_+; each model shifts the angle by a third of
    // the excess/defect, area sqrt(3)/4 r^2 to leading order
    for (double r : {0.05, 0.1, 0.2}) {
        const double plus = spherical_comparison_angles({r, r, r}).alpha[0];
        const double zero = planar_comparison_angles({r, r, r}).alpha[0];
        const double minus = hyperbolic_comparison_angles({r, r, r}).alpha[0];
        CHECK(minus < zero);
        CHECK(zero < plus);
        CHECK(plus - minus == doctest::Approx(std::sqrt(3.0) / 6 * r * r).epsilon(0.01));
    }
}

TEST_CASE("angle sums by model space") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(1e-3, 0.3);
    int checked = 0;
    while (checked < 200) {
        const SideLengths a{U(rng), U(rng), U(rng)};
        if (a[0] >= a[1] + a[2] || a[1] >= a[0] + a[2] || a[2] >= a[0] + a[1]) continue;
        if (!is_delta_nondegenerate(a, 0.05).ok) continue;
        ++checked;
        CHECK(std::abs(planar_comparison_angles(a).sum() - pi) <= 1e-10);
        CHECK(spherical_comparison_angles(a).sum() > pi);
        CHECK(hyperbolic_comparison_angles(a).sum() < pi);
    }
}

TEST_CASE("non-degeneracy and edge quotients") {
    CHECK(is_delta_nondegenerate({1, 1, 1}, 0.5).ok);
    const auto thin = is_delta_nondegenerate({1.99, 1, 1}, 0.5);
    CHECK_FALSE(thin.ok);
    CHECK(thin.max_angle == doctest::Approx(2.941).epsilon(1e-3));
    CHECK_FALSE(is_delta_nondegenerate({1, 1, 1}, pi / 3).ok);
    CHECK_THROWS_AS(is_delta_nondegenerate({1, 1, 1}, 0.0), DomainError);
    CHECK_THROWS_AS(is_delta_nondegenerate({1, 1, 1}, pi / 2), DomainError);

    const auto q = edge_quotient_bound({1, 1, 1}, 0.5);
    CHECK(q.max_quotient == 1.0);
    CHECK(q.holds);
    const auto right = edge_quotient_bound({1, 1, std::sqrt(2.0)}, pi / 4 - 0.01);
    CHECK(right.max_quotient == doctest::Approx(std::sqrt(2.0)));
    CHECK(right.bound == doctest::Approx(1.0 / std::sin(pi / 4 - 0.01)));
    CHECK(right.holds);
    CHECK_THROWS_AS(edge_quotient_bound({1.99, 1, 1}, 0.5), DomainError);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.1, 1.0);
    for (int i = 0; i < 300; ++i) {
        const SideLengths a{U(rng), U(rng), U(rng)};
        if (a[0] >= a[1] + a[2] || a[1] >= a[0] + a[2] || a[2] >= a[0] + a[1]) continue;
        const double delta = 0.9 * planar_comparison_angles(a).alpha[0];
        const auto rep = is_delta_nondegenerate(a, std::min(delta, 0.3));
        if (!rep.ok) continue;
        CHECK(edge_quotient_bound(a, std::min(delta, 0.3)).holds);
    }
}

TEST_CASE("perturbation keeps half the non-degeneracy") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.1, 1.0), W(-1.0, 1.0);
    int done = 0;
    while (done < 1000) {
        const double delta = 0.1 + 0.5 * (U(rng) - 0.1);
        const SideLengths a{U(rng), U(rng), U(rng)};
        if (a[0] >= a[1] + a[2] || a[1] >= a[0] + a[2] || a[2] >= a[0] + a[1]) continue;
        if (!is_delta_nondegenerate(a, delta).ok) continue;
        const double eps = nondegeneracy_perturbation(delta);
        REQUIRE(eps > 0.0);
        const SideLengths b{a[0] * (1 + eps * W(rng)), a[1] * (1 + eps * W(rng)), a[2] * (1 + eps * W(rng))};
        CHECK(is_delta_nondegenerate(b, delta / 2).ok);
        ++done;
    }
}

TEST_CASE("flat triangle parametrization") {
    const auto p = chart_equilateral(1.0);
    const auto tri = make(Surface::euclidean(), p);
    CHECK(tri.diameter() == doctest::Approx(std::sqrt(3.0)));
    // phi(i, t, s) runs from the point at s along i->k to the point at s along i->j
    const auto m = tri.phi(0, 0.5, 0.5);
    const SurfacePoint expect{(p[0].u + (p[1].u + p[2].u) / 2) / 2, (p[0].v + (p[1].v + p[2].v) / 2) / 2};
    CHECK(norm(m - expect) <= 1e-12);
    const auto start = tri.phi(0, 0.0, 0.3), end = tri.phi(0, 1.0, 0.3);
    CHECK(norm(start - (p[0] + 0.3 * (p[2] - p[0]))) <= 1e-12);
    CHECK(norm(end - (p[0] + 0.3 * (p[1] - p[0]))) <= 1e-12);
    CHECK(norm(tri.phi(0, 0.7, 0.0) - p[0]) <= 1e-15);

    const auto whole = tri.slice(0, 1.0);
    for (int i = 0; i < 3; ++i) CHECK(whole.side_length(i) == doctest::Approx(tri.side_length(i)).epsilon(1e-8));
    for (int i = 0; i < 3; ++i) CHECK(tri.vertex_angle(i) == doctest::Approx(pi / 3).epsilon(1e-12));

    const auto gap = angle_stability(tri, 0, 1.0, 0.5);
    CHECK(gap.alpha_gap <= 1e-12);
    CHECK(gap.beta_gap <= 1e-12);

    const auto loc = tri.locate(tri.phi(1, 0.25, 0.6), 1);
    CHECK(loc.t == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(loc.s == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(tri.contains({0, 0}));
    CHECK_FALSE(tri.contains({2, 2}));
    CHECK(tri.contains(p[1]));
}

TEST_CASE("construction guards") {
    const Surface sphere = Surface::sphere_unit();
    CHECK_THROWS_AS(make(sphere, chart_equilateral(0.25)), ConstructionError);
    CHECK_THROWS_AS(make(Surface::euclidean(), {SurfacePoint{0, 0}, {1, 0}, {2, 0}}),
                    DegenerateTriangleError);
}

TEST_CASE("curved triangles: side lengths, Rauch envelope and angle drift") {
    for (const Surface& s : {Surface::sphere_unit(), Surface::hyperbolic_poincare()}) {
        const auto tri = make(s, chart_equilateral(0.0577));
        const double r = tri.diameter();
        const auto& p = tri.vertices();
        const bool sph = s.kind() == SurfaceKind::sphere_unit;
        for (int i = 0; i < 3; ++i) {
            const double exact = sph ? oracle::sphere_distance(p[(i + 1) % 3], p[(i + 2) % 3])
                                     : oracle::poincare_distance(p[(i + 1) % 3], p[(i + 2) % 3]);
            CHECK(std::abs(tri.side_length(i) - exact) <= 1e-9);
        }
        CHECK(r == doctest::Approx(0.2).epsilon(0.05));
        for (int k = 1; k <= 9; ++k) {
            const double sv = k / 10.0;
            const double a1s = s.distance(tri.phi(0, 0.0, sv), tri.phi(0, 1.0, sv));
            const double q = a1s / (sv * tri.side_length(0));
            CHECK(q > 1 - r * r);
            CHECK(q < 1 + r * r);
            // sphere: chords come out longer, hyperbolic: shorter
            if (sph) CHECK(q > 1.0);
            else CHECK(q < 1.0);
        }
        const auto gap = angle_stability(tri, 0, 1.0, 0.5);
        CHECK(gap.alpha_gap <= 0.5 * r * r);
        CHECK(gap.beta_gap <= 0.5 * r * r);
        CHECK(angle_stability(tri, 0, 0.5, 0.5).alpha_gap == 0.0);
        double sum = 0;
        for (int i = 0; i < 3; ++i) sum += tri.vertex_angle(i);
        if (sph) CHECK(sum > pi);
        else CHECK(sum < pi);
    }
}
