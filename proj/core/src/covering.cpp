#include "geogasket/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geogasket/errors.hpp"
#include "geogasket/metric.hpp"
#include "geogasket/parallel.hpp"

namespace geogasket {

namespace {

// Coarse scan of the side followed by a golden-section refinement.
double distance_to_side(const Surface& surface, const GeodesicSegment& side, const SurfacePoint& x) {
    constexpr int n = 32;
    auto f = [&](double tau) { return surface.distance(x, side.at(surface, tau)); };
    int best = 0;
    double best_d = f(0.0);
    for (int k = 1; k <= n; ++k) {
        const double d = f(static_cast<double>(k) / n);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    double lo = std::max(0, best - 1) / static_cast<double>(n);
    double hi = std::min(n, best + 1) / static_cast<double>(n);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    double fa = f(a), fb = f(b);
    for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    return std::min({best_d, fa, fb});
}

}  // namespace

double distance_to_cell(const GeodesicTriangle& cell, const SurfacePoint& x) {
    if (cell.contains(x, 1e-12)) return 0.0;
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) d = std::min(d, distance_to_side(cell.surface(), cell.side(i), x));
    return d;
}

CellWitness cell_witness(const GeodesicTriangle& cell) {
    const Surface& s = cell.surface();
    CellWitness w;
    w.center = cell.phi(0, 0.5, 2.0 / 3.0);
    w.circumradius = 0.0;
    for (const auto& p : cell.vertices()) w.circumradius = std::max(w.circumradius, s.distance(w.center, p));
    w.inradius = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) w.inradius = std::min(w.inradius, distance_to_side(s, cell.side(i), w.center));
    if (!(w.inradius > 0.0)) throw DomainError("cell has no interior ball witness");
    return w;
}

BallIntersectionReport disjoint_ball_intersection_count(const TriangleSystem& sys, int level,
                                                        const SurfacePoint& x, double rho) {
    if (!(rho > 0.0)) throw DomainError("ball radius must be positive");
    const auto& cells = sys.level(level);
    const Surface& surface = sys.surface();

    std::vector<CellWitness> wit(cells.size());
    std::vector<char> hit(cells.size(), 0);
    parallel_for(cells.size(), [&](std::size_t i) {
        wit[i] = cell_witness(cells[i]);
        const double dc = surface.distance(x, wit[i].center);
        if (dc > rho + wit[i].circumradius) return;
        if (dc <= rho || distance_to_cell(cells[i], x) <= rho * (1.0 + 1e-12)) hit[i] = 1;
    });

    BallIntersectionReport rep;
    rep.rho = rho;
    rep.c1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!hit[i]) continue;
        ++rep.count;
        rep.cells.push_back(sys.index_at(level, i));
        rep.c1 = std::min(rep.c1, wit[i].inradius / rho);
        rep.c2 = std::max(rep.c2, wit[i].circumradius / rho);
    }
    if (rep.count == 0) {
        rep.c1 = 0.0;
        return rep;
    }
    const double k = surface.curvature_bound();
    const double r_stated = (rep.c1 + 4.0 * rep.c2 + 2.0) * rho;
    const double r_cont = (rep.c1 + 2.0 * rep.c2 + 1.0) * rho;
    rep.bound_stated = packing_bound(rep.c1 * rho / r_stated, r_stated, k);
    rep.bound_containment = packing_bound(rep.c1 * rho / r_cont, r_cont, k);

    std::vector<SurfacePoint> cand;
    for (const auto& w : wit)
        if (surface.distance(x, w.center) <= r_cont) cand.push_back(w.center);
    const DistanceFn dist = [&surface](const SurfacePoint& p, const SurfacePoint& q) {
        return surface.distance(p, q);
    };
    const PointCloud cloud(std::move(cand), dist);
    rep.probe_achieved = greedy_pack(x, r_cont, rep.c1 * rho / r_cont, cloud, dist, k).achieved;
    return rep;
}

}  // namespace geogasket
