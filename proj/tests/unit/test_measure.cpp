#include <doctest.h>

#include <cmath>
#include <random>

#include "geogasket/errors.hpp"
#include "geogasket/measure.hpp"
#include "oracles.hpp"

using namespace geogasket;

namespace {

const DistanceFn planar = [](const SurfacePoint& a, const SurfacePoint& b) {
    return oracle::euclid_distance(a, b);
};

TriangleSystem flat_system(int depth) {
    const double R = 1 / std::sqrt(3.0);
    return TriangleSystem::build(
        GeodesicTriangle::build(Surface::euclidean(), {0, R}, {-0.5, -R / 2}, {0.5, -R / 2}), depth);
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<Atom> atoms(n);
    double total = 0;
    for (auto& a : atoms) {
        a.point = {U(rng), U(rng)};
        a.weight = 0.05 + U(rng);
        total += a.weight;
    }
    for (auto& a : atoms) a.weight /= total;
    // renormalise the last weight so the total is 1 to the last bit
    double rest = 1.0;
    for (int i = 0; i + 1 < n; ++i) rest -= atoms[i].weight;
    atoms.back().weight = rest;
    return DiscreteMeasure(atoms);
}

double brute_kr(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    std::vector<double> s, d, c;
    for (const auto& x : a.atoms()) s.push_back(x.weight);
    for (const auto& y : b.atoms()) d.push_back(y.weight);
    for (const auto& x : a.atoms())
        for (const auto& y : b.atoms()) c.push_back(oracle::euclid_distance(x.point, y.point));
    return oracle::brute_force_transport(s, d, c);
}

}  // namespace

TEST_CASE("discrete measures validate their weights") {
    CHECK_NOTHROW(DiscreteMeasure({Atom{{0, 0}, 0.5, {}}, Atom{{1, 0}, 0.5, {}}}));
    CHECK_THROWS_AS(DiscreteMeasure({Atom{{0, 0}, 0.7, {}}, Atom{{1, 0}, 0.5, {}}}), DomainError);
    CHECK_THROWS_AS(DiscreteMeasure({Atom{{0, 0}, 1.5, {}}, Atom{{1, 0}, -0.5, {}}}), DomainError);
    CHECK(DiscreteMeasure::point_mass({0.2, 0.3}).size() == 1);
}

TEST_CASE("transport solver against basis enumeration") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + trial % 3, n = 2 + (trial / 3) % 3;
        std::vector<double> s(m), d(n), c(m * n);
        double ts = 0, td = 0;
        for (auto& x : s) ts += (x = U(rng) + 0.01);
        for (auto& x : d) td += (x = U(rng) + 0.01);
        for (auto& x : s) x /= ts;
        for (auto& x : d) x /= td;
        for (auto& x : c) x = U(rng);
        CHECK(transport_cost(s, d, c) == doctest::Approx(oracle::brute_force_transport(s, d, c)).epsilon(1e-10));
    }
    // degenerate supplies (ties in the north-west corner walk)
    const std::vector<double> s{0.5, 0.5}, d{0.5, 0.5}, c{1, 0, 0, 1};
    CHECK(transport_cost(s, d, c) == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(transport_cost(std::vector<double>{1.0}, std::vector<double>{0.5}, std::vector<double>{1.0}),
                    DomainError);
}

TEST_CASE("KR distance") {
    std::mt19937_64 rng(23);
    SUBCASE("trivial cases") {
        const auto mu = random_measure(rng, 5);
        CHECK(kr_distance(mu, mu, planar).value <= 1e-15);
        const auto p = DiscreteMeasure::point_mass({0.1, 0.2}), q = DiscreteMeasure::point_mass({0.4, 0.6});
        CHECK(kr_distance(p, q, planar).value == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("three-atom measures match the enumeration oracle") {
        for (int i = 0; i < 50; ++i) {
            const auto a = random_measure(rng, 3), b = random_measure(rng, 3);
            const auto kr = kr_distance(a, b, planar);
            CHECK(kr.exact);
            CHECK(std::abs(kr.value - brute_kr(a, b)) <= 1e-10);
        }
    }
    SUBCASE("metric axioms") {
        for (int i = 0; i < 30; ++i) {
            const auto a = random_measure(rng, 4), b = random_measure(rng, 5), c = random_measure(rng, 3);
            const double ab = kr_distance(a, b, planar).value, ba = kr_distance(b, a, planar).value;
            const double bc = kr_distance(b, c, planar).value, ac = kr_distance(a, c, planar).value;
            CHECK(std::abs(ab - ba) <= 1e-9);
            CHECK(ac <= ab + bc + 1e-9);
            CHECK(ab > 0.0);
        }
    }
    SUBCASE("bounded ground cost sits below the plain one") {
        for (int i = 0; i < 20; ++i) {
            const auto a = random_measure(rng, 4), b = random_measure(rng, 4);
            KrOptions bounded;
            bounded.bounded = true;
            const double d = kr_distance(a, b, planar, bounded).value;
            const double dstar = kr_distance(a, b, planar).value;
            CHECK(d <= dstar + 1e-12);
            // the unit square has diameter sqrt 2
            CHECK(dstar <= std::max(std::sqrt(2.0), 1.0) * d + 1e-12);
        }
    }
}

TEST_CASE("split KR bounds bracket the exact value") {
    const auto sys = flat_system(6);
    const std::vector<double> w{0.5, 0.3, 0.2}, eq{1.0 / 3, 1.0 / 3, 1.0 / 3};
    FixpointOptions opt;
    opt.atom_budget = 1000;
    opt.resample = false;
    const auto a = pushforward_fixpoint(sys, w, 5, default_seed(sys), opt).measure;
    const auto b = pushforward_fixpoint(sys, eq, 5, default_seed(sys), opt).measure;
    const auto exact = kr_distance(a, b, planar);
    REQUIRE(exact.exact);
    KrOptions small;
    small.exact_limit = 60;
    const auto split = kr_distance(a, b, planar, small);
    CHECK_FALSE(split.exact);
    CHECK(split.lower <= exact.value + 1e-12);
    CHECK(split.upper >= exact.value - 1e-12);
    CHECK(split.value == split.upper);
    // no addresses to split by
    std::mt19937_64 rng(1);
    const auto big_a = random_measure(rng, 40), big_b = random_measure(rng, 40);
    CHECK_THROWS_AS(kr_distance(big_a, big_b, planar, small), CapacityError);
}

TEST_CASE("push-forward iteration") {
    const auto sys = flat_system(6);
    const auto seed = default_seed(sys);
    SUBCASE("zero iterations return the seed") {
        const auto res = pushforward_fixpoint(sys, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0, seed);
        CHECK(res.trace.empty());
        REQUIRE(res.measure.size() == 1);
        CHECK(res.measure.atoms()[0].point == seed.atoms()[0].point);
    }
    SUBCASE("single map collapses onto its fixed vertex") {
        const auto res = pushforward_fixpoint(sys, std::vector<double>{1.0}, 6, seed);
        REQUIRE(res.measure.size() == 1);
        const double d0 = planar(seed.atoms()[0].point, sys.base().vertex(0));
        CHECK(planar(res.measure.atoms()[0].point, sys.base().vertex(0)) == doctest::Approx(d0 / 64).epsilon(1e-10));
        for (std::size_t m = 1; m < res.trace.size(); ++m)
            CHECK(res.trace[m].value == doctest::Approx(res.trace[m - 1].value / 2).epsilon(1e-10));
    }
    SUBCASE("equal weights contract by one half and give equal cell masses") {
        const std::vector<double> eq{1.0 / 3, 1.0 / 3, 1.0 / 3};
        const auto res = pushforward_fixpoint(sys, eq, 6, seed);
        for (std::size_t m = 1; m < res.trace.size(); ++m) {
            CHECK(res.trace[m].value <= 0.55 * res.trace[m - 1].value);
            CHECK(res.trace[m].value <= res.trace[m - 1].value);
        }
        for (double mass : cell_masses(res.measure, sys, 3)) CHECK(std::abs(mass - 1.0 / 27) <= 1e-12);
        CHECK(invariance_residual(res.measure, sys, eq, 4) <= 1e-12);
    }
    SUBCASE("weighted masses follow the product rule") {
        const std::vector<double> w{0.5, 0.3, 0.2};
        const auto res = pushforward_fixpoint(sys, w, 4, seed);
        const auto mass = cell_masses(res.measure, sys, 2);
        CHECK(mass[sys.offset_of(MultiIndex::parse("13"))] == doctest::Approx(0.1));
        CHECK(mass[sys.offset_of(MultiIndex::parse("22"))] == doctest::Approx(0.09));
    }
    SUBCASE("budget") {
        FixpointOptions tight;
        tight.atom_budget = 100;
        tight.resample = false;
        CHECK_THROWS_AS(pushforward_fixpoint(sys, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 6, seed, tight),
                        CapacityError);
        tight.resample = true;
        tight.snap_tolerance = 1.0 / 8;
        const auto res = pushforward_fixpoint(sys, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 6, seed, tight);
        CHECK(res.resamples > 0);
        CHECK(res.measure.size() <= 100);
    }
    SUBCASE("bad weights") {
        CHECK_THROWS_AS(pushforward_fixpoint(sys, std::vector<double>{0.5, 0.4}, 1, seed), DomainError);
        CHECK_THROWS_AS(pushforward_fixpoint(sys, std::vector<double>{1.2, -0.2}, 1, seed), DomainError);
        CHECK_THROWS_AS(pushforward_fixpoint(sys, std::vector<double>{0.25, 0.25, 0.25, 0.25}, 1, seed),
                        DomainError);
    }
}
