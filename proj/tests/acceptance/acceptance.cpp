// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed
// here and never loosened at run time. Exit status is the number of failures.
//
//   acceptance            run everything
//   acceptance 3 9        run only criteria 3 and 9

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "geogasket/dimension.hpp"
#include "geogasket/errors.hpp"
#include "geogasket/gasket.hpp"
#include "geogasket/measure.hpp"
#include "oracles.hpp"

using namespace geogasket;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const double kLog3Log2 = std::log(3.0) / std::log(2.0);

// Chart equilateral triangle centred at the origin. `side` is the geodesic
// side length to first order (conformal factor 2 at the origin on both
// curved built-ins, 1 on the plane).
std::array<SurfacePoint, 3> equilateral(const Surface& s, double side) {
    const double factor = s.kind() == SurfaceKind::euclidean ? 1.0 : 2.0;
    const double R = side / (factor * std::sqrt(3.0));
    return {SurfacePoint{0, R}, SurfacePoint{-R * std::sqrt(3.0) / 2, -R / 2},
            SurfacePoint{R * std::sqrt(3.0) / 2, -R / 2}};
}

TriangleSystem build(const Surface& s, double side, int depth, std::optional<double> delta = {}) {
    const auto p = equilateral(s, side);
    BuildOptions opt;
    opt.delta = delta;
    return TriangleSystem::build(GeodesicTriangle::build(s, p[0], p[1], p[2]), depth, opt);
}

double closed_form_distance(const Surface& s, const SurfacePoint& a, const SurfacePoint& b) {
    return s.kind() == SurfaceKind::sphere_unit ? oracle::sphere_distance(a, b) : oracle::poincare_distance(a, b);
}

// 1. Moran solver
Outcome moran_solver() {
    const std::vector<double> gasket{0.5, 0.5, 0.5};
    const auto sol = solve_moran(gasket);
    const double err = std::abs(sol.s - kLog3Log2);

    double worst_uniform = 0.0;
    for (int k = 1; k <= 8; ++k)
        for (double lambda : {0.05, 0.1, 0.25, 0.5, 0.7, 0.9, 0.99}) {
            const std::vector<double> r(k, lambda);
            worst_uniform = std::max(worst_uniform, std::abs(solve_moran(r).s - std::log(double(k)) / std::log(1 / lambda)));
        }

    const int reps = 2000;
    const auto t0 = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (int i = 0; i < reps; ++i) sink += solve_moran(gasket).s;
    const double per_call = seconds_since(t0) / reps;
    const bool pass = err <= 1e-12 && worst_uniform <= 1e-12 && per_call < 1e-3 && sink > 0;
    return {pass, "s=" + fmt("%.15f", sol.s) + " err=" + fmt("%.1e", err) + " uniform_err=" +
                      fmt("%.1e", worst_uniform) + " time=" + fmt("%.2e", per_call) + "s"};
}

// 2. Flat gasket at depth 12 is the classical gasket
Outcome flat_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = build(Surface::euclidean(), 1.0, 12);
    const double D = sys.base().diameter();

    double diam_err = 0.0;
    for (int n = 0; n <= 12; ++n) {
        const double expect = std::ldexp(D, -n);
        for (const auto& c : sys.level(n)) diam_err = std::max(diam_err, std::abs(c.diameter() - expect) / expect);
    }
    const auto box = box_dimension_estimate(sys, 4, 12);
    const double slope_err = std::abs(box.slope - kLog3Log2);

    // Every cell through level 5, then an even stride of 243 cells per deeper
    // level. Raw deviations, no noise floor.
    double dev = 0.0;
    std::size_t audits = 0;
    std::string per_level;
    for (int n = 1; n <= 12; ++n) {
        const std::size_t cells = sys.level(n).size(), stride = n <= 5 ? 1 : cells / 243;
        double level_dev = 0.0;
        for (std::size_t off = 0; off < cells; off += stride) {
            level_dev = std::max(level_dev, audit_similarity(sys, sys.index_at(n, off), 128, 1).max_ratio_deviation);
            ++audits;
        }
        dev = std::max(dev, level_dev);
        per_level += (n > 1 ? "," : "") + fmt("%.0e", level_dev);
    }
    const double t = seconds_since(t0);
    const bool pass = sys.level(12).size() == 531441 && diam_err <= 1e-12 && slope_err <= 1e-10 && dev <= 1e-12 && t < 30;
    return {pass, "cells=" + std::to_string(sys.level(12).size()) + " diam_rel_err=" + fmt("%.1e", diam_err) +
                      " slope=" + fmt("%.12f", box.slope) + " slope_err=" + fmt("%.1e", slope_err) +
                      " audits=" + std::to_string(audits) + " max_dev=" + fmt("%.1e", dev) + " (need <= 1e-12)" +
                      " dev_by_level=[" + per_level + "] time=" + fmt("%.1f", t) + "s"};
}

// 3. Curved surfaces, box dimension at depth 8
Outcome curved_dimension() {
    bool pass = true;
    std::string detail;
    for (const Surface& s : {Surface::sphere_unit(), Surface::hyperbolic_poincare()}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto sys = build(s, 0.3, 8);
        const auto box = box_dimension_estimate(sys, 3, 8);
        const double t = seconds_since(t0);
        const double err = std::abs(box.slope - kLog3Log2);
        pass = pass && err <= 0.05 && t < 300;
        detail += to_string(s.kind()) + ": |D|=" + fmt("%.4f", sys.base().diameter()) + " slope=" +
                  fmt("%.6f", box.slope) + " err=" + fmt("%.1e", err) + " time=" + fmt("%.1f", t) + "s ";
    }
    return {pass, detail};
}

// 4. Chord envelope 1 - r^2 < a1(s) / (s a1) < 1 + r^2
Outcome rauch_envelope() {
    bool pass = true;
    std::string detail;
    for (const Surface& s : {Surface::sphere_unit(), Surface::hyperbolic_poincare()}) {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        std::size_t triangles = 0, violations = 0, rejected = 0;
        double worst = 0.0;  // max |q - 1| / r^2
        while (triangles < 500) {
            const SurfacePoint c{0.25 * U(rng), 0.25 * U(rng)};
            std::array<SurfacePoint, 3> p;
            for (auto& v : p) v = {c.u + 0.075 * U(rng), c.v + 0.075 * U(rng)};
            const double r = std::max({closed_form_distance(s, p[0], p[1]), closed_form_distance(s, p[1], p[2]),
                                       closed_form_distance(s, p[0], p[2])});
            if (r > 0.3) {
                ++rejected;
                continue;
            }
            std::optional<GeodesicTriangle> tri;
            try {
                tri = GeodesicTriangle::build(s, p[0], p[1], p[2]);
            } catch (const DegenerateTriangleError&) {
                ++rejected;
                continue;
            }
            ++triangles;
            const double R = tri->diameter();
            for (int k = 1; k <= 9; ++k) {
                const double sv = k / 10.0;
                const double a1s = s.distance(tri->phi(0, 0.0, sv), tri->phi(0, 1.0, sv));
                const double q = a1s / (sv * tri->side_length(0));
                if (!(q > 1 - R * R && q < 1 + R * R)) ++violations;
                worst = std::max(worst, std::abs(q - 1) / (R * R));
            }
        }
        pass = pass && violations == 0;
        detail += to_string(s.kind()) + ": triangles=" + std::to_string(triangles) + " violations=" +
                  std::to_string(violations) + " max|q-1|/r^2=" + fmt("%.3f", worst) + " ";
    }
    return {pass, detail};
}

// 5. Dilation deviation of f_1 decays like |D|^2
Outcome quadratic_rate() {
    bool pass = true;
    std::string detail;
    for (const Surface& s : {Surface::sphere_unit(), Surface::hyperbolic_poincare()}) {
        std::vector<double> x, y;
        for (double side : {0.05, 0.1, 0.2, 0.3}) {
            const auto sys = build(s, side, 1);
            const auto a = audit_similarity(sys, MultiIndex::parse("1"), 400, 1);
            x.push_back(std::log(sys.base().diameter()));
            y.push_back(std::log(a.max_ratio_deviation));
        }
        const double mx = (x[0] + x[1] + x[2] + x[3]) / 4, my = (y[0] + y[1] + y[2] + y[3]) / 4;
        double sxy = 0, sxx = 0;
        for (int i = 0; i < 4; ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        const double slope = sxy / sxx;
        pass = pass && slope >= 1.8;
        detail += to_string(s.kind()) + ": exponent=" + fmt("%.4f", slope) + " ";
    }
    return {pass, detail};
}

// 6. delta-non-degeneracy passes to every cell at delta/2
Outcome nondegeneracy_propagation() {
    const auto sys = build(Surface::sphere_unit(), 0.3, 8, 0.4);
    const auto base = is_delta_nondegenerate(sys.base().side_lengths(), 0.4);
    const auto sweep = nondegeneracy_sweep(sys, 0.4);
    const bool pass = base.ok && sweep.failures == 0 && sweep.checked == sys.cell_count() + 1;  // base included
    return {pass, "cells=" + std::to_string(sweep.checked) + " failures=" + std::to_string(sweep.failures) +
                      " min_angle=" + fmt("%.4f", sweep.min_angle) + " max_angle=" + fmt("%.4f", sweep.max_angle) +
                      " (need > 0.2, < pi-0.2)"};
}

// 7. Simple families sum to one
Outcome simple_families() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0.05, 0.8), T(0.01, 0.3);
    double worst = 0.0;
    std::size_t bad_families = 0, members = 0;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> r(2 + i % 4);
        for (auto& x : r) x = U(rng);
        const double s = solve_moran(r).s;
        const auto fam = ratio_threshold_family(r, T(rng));
        if (!is_simple_family(fam)) ++bad_families;
        members += fam.members.size();
        worst = std::max(worst, std::abs(simple_family_sum(fam, r, s) - 1.0));
    }
    return {worst <= 1e-10 && bad_families == 0,
            "lists=50 members=" + std::to_string(members) + " invalid=" + std::to_string(bad_families) +
                " max|sum-1|=" + fmt("%.1e", worst)};
}

// 8. Controlled Moran ratios
Outcome controlled_moran() {
    bool pass = true;
    std::string detail;
    {
        const auto sys = build(Surface::euclidean(), 0.3, 8);
        const double D = sys.base().diameter();
        const auto rep = controlled_moran_check(sys, 4.0 / D);
        const double spread = (rep.max_ratio - rep.min_ratio) / rep.min_ratio;
        const double off = std::abs(rep.min_ratio * D - 1.0);
        pass = pass && spread <= 1e-12 && off <= 1e-12;
        detail += "euclidean: pairs=" + std::to_string(rep.pairs) + " spread=" + fmt("%.1e", spread) +
                  " |ratio*|D|-1|=" + fmt("%.1e", off) + " ";
    }
    for (const Surface& s : {Surface::sphere_unit(), Surface::hyperbolic_poincare()}) {
        const auto sys = build(s, 0.3, 8);
        const double D = sys.base().diameter();
        const auto rep = controlled_moran_check(sys, 4.0 / D);
        const bool ok = rep.min_ratio >= 0.25 / D && rep.max_ratio <= 4.0 / D;
        pass = pass && ok;
        detail += to_string(s.kind()) + ": pairs=" + std::to_string(rep.pairs) + " ratio*|D| in [" +
                  fmt("%.4f", rep.min_ratio * D) + ", " + fmt("%.4f", rep.max_ratio * D) + "] ";
    }
    return {pass, detail};
}

// 9. Measure iteration on the flat gasket
Outcome measure_fixpoint() {
    const auto sys = build(Surface::euclidean(), 1.0, 8);
    const std::vector<double> eq{1.0 / 3, 1.0 / 3, 1.0 / 3};
    FixpointOptions opt;
    opt.atom_budget = 531441;  // 3^12: twelve steps without merging atoms
    const auto res = pushforward_fixpoint(sys, eq, 12, default_seed(sys), opt);

    double worst_ratio = 0.0;
    bool brackets = true;
    for (std::size_t m = 0; m < res.trace.size(); ++m) {
        const auto& k = res.trace[m];
        brackets = brackets && k.lower <= k.value + 1e-15 && k.value <= k.upper + 1e-15;
        if (m > 0) worst_ratio = std::max(worst_ratio, k.value / res.trace[m - 1].value);
    }
    std::size_t exact = 0;
    for (const auto& k : res.trace) exact += k.exact ? 1 : 0;
    double mass_err = 0.0;
    for (double w : cell_masses(res.measure, sys, 4)) mass_err = std::max(mass_err, std::abs(w - 1.0 / 81));
    const bool pass = res.trace.size() == 12 && worst_ratio <= 0.55 && brackets && mass_err <= 2e-3;
    return {pass, "iterations=12 exact_steps=" + std::to_string(exact) + " max_ratio=" + fmt("%.6f", worst_ratio) +
                      " max|mass-3^-4|=" + fmt("%.1e", mass_err) + " atoms=" + std::to_string(res.measure.size())};
}

// 10. Gauge admissibility
Outcome gauge_admissibility() {
    const auto sq = gauge_admissible(Gauge::power(2), 1.0, 0.5);
    const double err = std::abs(sq.integral - 1 / (8 * std::log(2.0)));
    const auto inv = gauge_admissible(Gauge::log_power(1), 1.0, 0.5);
    bool family = true;
    std::string fam;
    for (int n = 1; n <= 3; ++n) {
        const auto r = gauge_admissible(Gauge::log_power_family(n), 1.0, 0.5);
        family = family && r.admissible;
        fam += " n" + std::to_string(n) + "=" + (r.admissible ? "admissible" : "inadmissible");
    }
    const bool pass = sq.admissible && err <= 1e-8 && !inv.admissible && family;
    return {pass, "y^2 integral=" + fmt("%.12f", sq.integral) + " err=" + fmt("%.1e", err) +
                      " (-log y)^-1=" + (inv.admissible ? "admissible" : "inadmissible") + fam};
}

// 11. Geodesic solver against closed forms
Outcome geodesic_fidelity() {
    bool pass = true;
    std::string detail;
    for (const Surface& s : {Surface::sphere_unit(), Surface::hyperbolic_poincare()}) {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        double dist_err = 0.0, trip_err = 0.0;
        std::size_t pairs = 0;
        while (pairs < 10000) {
            // p in the chart disk of radius 0.5, q within the convexity guard of p
            const SurfacePoint p{0.5 * U(rng), 0.5 * U(rng)};
            if (std::hypot(p.u, p.v) >= 0.5) continue;
            const SurfacePoint q{p.u + 0.2 * U(rng), p.v + 0.2 * U(rng)};
            const double exact = closed_form_distance(s, p, q);
            if (exact > s.convexity_guard() || std::hypot(q.u, q.v) >= 0.7) continue;
            ++pairs;
            const auto w = s.log_map(p, q);
            dist_err = std::max(dist_err, std::abs(s.norm(p, w) - exact));
            const auto back = s.exp_map(p, w, 1.0);
            trip_err = std::max(trip_err, norm(back - q) / norm(q - p));
        }
        pass = pass && dist_err <= 1e-8 && trip_err <= 1e-7;
        detail += to_string(s.kind()) + ": pairs=" + std::to_string(pairs) + " max_dist_err=" + fmt("%.1e", dist_err) +
                  " max_roundtrip_rel=" + fmt("%.1e", trip_err) + " ";
    }
    return {pass, detail};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "moran_solver", moran_solver},
        {2, "flat_gasket_oracle", flat_oracle},
        {3, "curved_box_dimension", curved_dimension},
        {4, "chord_comparison_envelope", rauch_envelope},
        {5, "almost_similarity_quadratic_rate", quadratic_rate},
        {6, "nondegeneracy_propagation", nondegeneracy_propagation},
        {7, "simple_family_sums", simple_families},
        {8, "controlled_moran_band", controlled_moran},
        {9, "measure_fixed_point", measure_fixpoint},
        {10, "gauge_admissibility", gauge_admissibility},
        {11, "geodesic_oracle_fidelity", geodesic_fidelity},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += out.pass ? 0 : 1;
        std::printf("%s %2d %-34s %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
