#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "geogasket/covering.hpp"
#include "geogasket/errors.hpp"
#include "oracles.hpp"

using namespace geogasket;

namespace {

TriangleSystem flat_system(int depth) {
    const double R = 1 / std::sqrt(3.0);
    return TriangleSystem::build(
        GeodesicTriangle::build(Surface::euclidean(), {0, R}, {-0.5, -R / 2}, {0.5, -R / 2}), depth);
}

}  // namespace

TEST_CASE("cell witnesses on a flat equilateral cell") {
    const auto sys = flat_system(1);
    const auto w = cell_witness(sys.base());
    // phi(1/2, 2/3) of an equilateral triangle is its centroid
    CHECK(norm(w.center) <= 1e-12);
    CHECK(w.circumradius == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(w.inradius == doctest::Approx(1 / (2 * std::sqrt(3.0))).epsilon(1e-9));
}

TEST_CASE("distance to a flat cell against the planar oracle") {
    const auto sys = flat_system(2);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-0.8, 0.8);
    for (const auto& cell : sys.level(2)) {
        for (int i = 0; i < 20; ++i) {
            const SurfacePoint x{U(rng), U(rng)};
            const double expect = oracle::planar_triangle_distance(x, cell.vertices());
            CHECK(std::abs(distance_to_cell(cell, x) - expect) <= 1e-9);
        }
    }
}

TEST_CASE("ball intersection counts") {
    const int level = 5;
    const auto sys = flat_system(level);
    const double rho = sys.level_diameter(level);

    SUBCASE("far ball meets nothing") {
        CHECK(disjoint_ball_intersection_count(sys, level, {5, 5}, rho).count == 0);
    }

    SUBCASE("counts agree with a planar brute force and stay under the bounds") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> U(-0.6, 0.6);
        std::size_t worst = 0;
        for (int i = 0; i < 300; ++i) {
            const SurfacePoint x{U(rng), U(rng)};
            const auto rep = disjoint_ball_intersection_count(sys, level, x, rho);
            std::size_t brute = 0;
            for (const auto& cell : sys.level(level))
                if (oracle::planar_triangle_distance(x, cell.vertices()) <= rho) ++brute;
            CHECK(rep.count == brute);
            worst = std::max(worst, rep.count);
            if (rep.count > 0) {
                CHECK(rep.count <= rep.bound_containment);
                CHECK(rep.bound_containment <= rep.bound_stated);
                CHECK(rep.probe_achieved <= rep.bound_stated);
                CHECK(rep.c1 == doctest::Approx(1 / (2 * std::sqrt(3.0))).epsilon(1e-6));
                CHECK(rep.c2 == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-9));
            }
        }
        CHECK(worst >= 4);
    }

    SUBCASE("curved cells") {
        const double R = 0.3 / (2 * std::sqrt(3.0));
        const auto sphere = TriangleSystem::build(
            GeodesicTriangle::build(Surface::sphere_unit(), {0, R}, {-R * std::sqrt(3.0) / 2, -R / 2},
                                    {R * std::sqrt(3.0) / 2, -R / 2}),
            3);
        const double r3 = sphere.level_diameter(3);
        const auto rep = disjoint_ball_intersection_count(sphere, 3, sphere.level(3)[4].vertex(0), r3);
        CHECK(rep.count >= 1);
        CHECK(rep.count <= rep.bound_containment);
    }
}
