#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "geogasket/dimension.hpp"
#include "geogasket/errors.hpp"
#include "oracles.hpp"

using namespace geogasket;

namespace {

std::array<SurfacePoint, 3> chart_equilateral(double R) {
    return {SurfacePoint{0, R}, SurfacePoint{-R * std::sqrt(3.0) / 2, -R / 2},
            SurfacePoint{R * std::sqrt(3.0) / 2, -R / 2}};
}

TriangleSystem build(const Surface& s, double R, int depth, int branching = 3) {
    const auto p = chart_equilateral(R);
    BuildOptions opt;
    opt.branching = branching;
    return TriangleSystem::build(GeodesicTriangle::build(s, p[0], p[1], p[2]), depth, opt);
}

}  // namespace

TEST_CASE("Moran equation") {
    const std::vector<double> gasket{0.5, 0.5, 0.5};
    const auto sol = solve_moran(gasket);
    CHECK(std::abs(sol.s - std::log(3.0) / std::log(2.0)) <= 1e-12);
    CHECK(sol.residual <= 1e-12);
    CHECK(std::abs(solve_moran(std::vector<double>{0.5, 0.5}).s - 1.0) <= 1e-12);
    // x + x^2 = 1 with x = 2^-s
    const double golden = (std::sqrt(5.0) - 1) / 2;
    CHECK(std::abs(solve_moran(std::vector<double>{0.5, 0.25}).s - std::log2(1 / golden)) <= 1e-12);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> r(2 + i % 4);
        for (auto& x : r) x = U(rng);
        const double s = solve_moran(r).s;
        CHECK(std::abs(s - oracle::moran_bisection(r)) <= 1e-10);
        // strictly increasing in every ratio
        auto bigger = r;
        bigger[0] = std::min(0.99, bigger[0] + 0.01);
        CHECK(solve_moran(bigger).s > s);
        // uniform lists in closed form
        const std::vector<double> uni(r.size(), r[0]);
        CHECK(std::abs(solve_moran(uni).s - std::log(double(r.size())) / std::log(1 / r[0])) <= 1e-12);
    }
    CHECK_THROWS_AS(solve_moran(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(solve_moran(std::vector<double>{1.5}), DomainError);
    CHECK_THROWS_AS(solve_moran(std::vector<double>{0.0, 0.5}), DomainError);
}

TEST_CASE("gauges") {
    CHECK(Gauge::power(2)(0.3) == doctest::Approx(0.09));
    CHECK(Gauge::log_power(1)(std::exp(-4.0)) == doctest::Approx(0.25));
    CHECK(Gauge::log_power_family(1)(std::exp(-8.0)) == doctest::Approx(std::pow(8.0, -5.0 / 3)));
    CHECK(Gauge::power(2).from_log(-1000.0) == 0.0);
    const auto t = Gauge::table({0.01, 0.1, 1.0}, {0.001, 0.01, 0.1});
    CHECK(t(0.1) == doctest::Approx(0.01));
    CHECK(t(0.005) == doctest::Approx(0.0005));
    CHECK_NOTHROW(t.validate());
    CHECK_THROWS_AS(Gauge::table({0.1, 1.0}, {0.5, 0.1}).validate(), DomainError);
    CHECK_THROWS_AS(Gauge::power(-1.0), DomainError);
}

TEST_CASE("gauge admissibility") {
    const auto sq = gauge_admissible(Gauge::power(2), 1.0, 0.5);
    CHECK(sq.admissible);
    // integral of 2^{-2x} over [1, inf) = 1 / (4 * 2 ln 2)
    CHECK(std::abs(sq.integral - 1 / (8 * std::log(2.0))) <= 1e-8);
    for (int n = 1; n <= 3; ++n) CHECK(gauge_admissible(Gauge::log_power_family(n), 1.0, 0.5).admissible);
    CHECK_FALSE(gauge_admissible(Gauge::log_power(1), 1.0, 0.5).admissible);
    CHECK_THROWS_AS(gauge_admissible(Gauge::power(2), 1.0, 1.5), DomainError);
}

TEST_CASE("product bounds") {
    const double nu = 0.545, V = 0.3;
    const auto pb = product_bounds(Gauge::power(2), nu, V);
    // reference: log of the products by explicit summation far past double precision
    double lu = 0, ll = 0;
    for (int i = 0; i < 400; ++i) {
        const double phi = std::pow(std::pow(nu, i) * V, 2);
        lu += std::log1p(phi);
        ll += std::log1p(-phi);
    }
    CHECK(pb.upper == doctest::Approx(std::exp(lu)).epsilon(1e-12));
    CHECK(pb.lower == doctest::Approx(std::exp(ll)).epsilon(1e-12));
    CHECK(pb.upper < std::exp(0.09 / (1 - nu * nu)));
    const auto zero = product_bounds(Gauge::table({1e-3, 1.0}, {1e-300, 2e-300}), nu, V);
    CHECK(zero.upper == doctest::Approx(1.0));
    CHECK(zero.lower == doctest::Approx(1.0));
    CHECK_THROWS_AS(product_bounds(Gauge::power(2), nu, 1.0), DomainError);
}

TEST_CASE("simple families") {
    const std::vector<double> half{0.5, 0.5, 0.5};
    const double s = solve_moran(half).s;
    SimpleFamily mixed{3, {MultiIndex::parse("1"), MultiIndex::parse("2"), MultiIndex::parse("31"),
                           MultiIndex::parse("32"), MultiIndex::parse("33")}};
    CHECK(is_simple_family(mixed));
    CHECK(simple_family_sum(mixed, half, s) == doctest::Approx(1.0).epsilon(1e-14));
    SimpleFamily gap{3, {MultiIndex::parse("1"), MultiIndex::parse("2")}};
    CHECK_FALSE(is_simple_family(gap));
    SimpleFamily overlap{3, {MultiIndex::parse("1"), MultiIndex::parse("11"), MultiIndex::parse("2"),
                             MultiIndex::parse("3")}};
    CHECK_FALSE(is_simple_family(overlap));

    const auto flat = build(Surface::euclidean(), 1 / std::sqrt(3.0), 4);
    const auto f3 = enumerate_simple_family(flat, 0.125);
    CHECK(f3.members.size() == 27);
    const auto f2 = enumerate_simple_family(flat, 0.3);
    CHECK(f2.members.size() == 9);
    CHECK(is_simple_family(f2));
    CHECK(simple_family_sum(f2, half, s) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(enumerate_simple_family(flat, 0.01), DomainError);
    CHECK_THROWS_AS(enumerate_simple_family(flat, 1.5), DomainError);

    const auto sphere = build(Surface::sphere_unit(), 0.3 / (2 * std::sqrt(3.0)), 5);
    const auto fs = enumerate_simple_family(sphere, 0.3 * 0.2);
    CHECK(is_simple_family(fs));
}

namespace {

// Sum over a threshold family by recursive replacement: each word is either
// kept or replaced by its k children, which preserves the total when
// sum lambda_i^s = 1.
double recursive_sum(const std::vector<double>& r, double s, double threshold, double prod) {
    if (prod <= threshold) return std::pow(prod, s);
    double total = 0.0;
    for (double x : r) total += recursive_sum(r, s, threshold, prod * x);
    return total;
}

}  // namespace

TEST_CASE("threshold families over random ratio lists") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> U(0.1, 0.7);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> r(2 + i % 3);
        for (auto& x : r) x = U(rng);
        const double s = solve_moran(r).s;
        const double th = 0.05 + 0.1 * U(rng);
        const auto fam = ratio_threshold_family(r, th);
        CHECK(is_simple_family(fam));
        const double sum = simple_family_sum(fam, r, s);
        CHECK(std::abs(sum - 1.0) <= 1e-10);
        CHECK(sum == doctest::Approx(recursive_sum(r, s, th, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("Hausdorff upper sums") {
    const auto flat = build(Surface::euclidean(), 1 / std::sqrt(3.0), 6);
    const double s = std::log2(3.0);
    for (int n = 0; n <= 6; ++n) CHECK(hausdorff_upper_sum(flat, s, n) == doctest::Approx(1.0).epsilon(1e-12));

    const auto sphere = build(Surface::sphere_unit(), 0.3 / (2 * std::sqrt(3.0)), 6);
    const double V = sphere.base().diameter();
    const auto pb = product_bounds(Gauge::power(2), sphere.nu(), V);
    for (int n = 0; n <= 6; ++n) CHECK(hausdorff_upper_sum(sphere, s, n) <= std::pow(pb.upper, s) * std::pow(V, s));
}

TEST_CASE("box-dimension regression") {
    const auto flat = build(Surface::euclidean(), 1 / std::sqrt(3.0), 9);
    const auto rep = box_dimension_estimate(flat, 4, 9);
    CHECK(std::abs(rep.slope - std::log2(3.0)) <= 1e-12);
    CHECK(rep.levels.size() == 6);
    CHECK(rep.levels[0].count == 81);
    CHECK_THROWS_AS(box_dimension_estimate(flat, 4, 6), DomainError);
    CHECK_THROWS_AS(box_dimension_estimate(flat, 4, 10), DomainError);

    std::ostringstream csv;
    write_box_csv(csv, rep);
    CHECK(csv.str().rfind("level,epsilon,count,upper_sum,used\n", 0) == 0);

    const auto full = build(Surface::euclidean(), 1 / std::sqrt(3.0), 6, 4);
    CHECK(std::abs(box_dimension_estimate(full, 2, 6).slope - 2.0) <= 1e-12);

    const auto sphere = build(Surface::sphere_unit(), 0.3 / (2 * std::sqrt(3.0)), 7);
    CHECK(std::abs(box_dimension_estimate(sphere, 3, 7).slope - std::log2(3.0)) <= 0.05);
}
