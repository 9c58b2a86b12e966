#include "geogasket/metric.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "geogasket/errors.hpp"

namespace geogasket {

PointCloud::PointCloud(std::vector<SurfacePoint> points, const DistanceFn& dist)
    : points_(std::move(points)), table_(points_.size() * points_.size(), 0.0) {
    const std::size_t n = points_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist(points_[i], points_[j]);
            table_[i * n + j] = d;
            table_[j * n + i] = d;
        }
    }
}

PointCloud::PointCloud(std::vector<SurfacePoint> points, std::vector<double> table)
    : points_(std::move(points)), table_(std::move(table)) {
    const std::size_t n = points_.size();
    if (table_.size() != n * n) {
        throw DomainError("distance table must be n*n");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (table_[i * n + i] != 0.0) {
            throw DomainError("distance table has a nonzero diagonal entry at " + std::to_string(i));
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = table_[i * n + j];
            const double b = table_[j * n + i];
            if (!(a >= 0.0) || a != b) {
                throw DomainError("distance table is not symmetric and nonnegative at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

std::size_t PointCloud::triangle_violations(double rel_tol, std::size_t max_exhaustive,
                                            std::size_t samples) const {
    const std::size_t n = size();
    if (n < 3) return 0;
    const double tol = rel_tol * std::max(diameter(*this), std::numeric_limits<double>::min());
    std::size_t bad = 0;
    auto check = [&](std::size_t i, std::size_t j, std::size_t k) {
        if (dist(i, k) > dist(i, j) + dist(j, k) + tol) ++bad;
    };
    if (n <= max_exhaustive) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) check(i, j, k);
        return bad;
    }
    // Stride walk with steps coprime to typical n; deterministic.
    std::size_t i = 0, j = 1, k = 2;
    for (std::size_t s = 0; s < samples; ++s) {
        check(i, j, k);
        i = (i + 1) % n;
        j = (j + 7) % n;
        k = (k + 31) % n;
    }
    return bad;
}

double diameter(const PointCloud& cloud) {
    if (cloud.empty()) throw DomainError("diameter of an empty point cloud");
    double best = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.size(); ++j) best = std::max(best, cloud.dist(i, j));
    return best;
}

double union_diameter(const PointCloud& a, const PointCloud& b, const DistanceFn& dist) {
    if (a.empty() && b.empty()) throw DomainError("diameter of an empty point cloud");
    double best = 0.0;
    if (!a.empty()) best = diameter(a);
    if (!b.empty()) best = std::max(best, diameter(b));
    for (const auto& p : a.points())
        for (const auto& q : b.points()) best = std::max(best, dist(p, q));
    return best;
}

std::size_t packing_bound(double delta, double r, double curvature_bound) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("packing delta must lie in (0,1)");
    double ratio;
    if (curvature_bound <= 0.0) {
        ratio = 1.0 / (delta * delta);
    } else {
        const double k = std::sqrt(curvature_bound);
        const double outer = std::cosh(k * r) - 1.0;
        const double inner = 1.0 - std::cos(k * delta * r);
        ratio = outer / inner;
    }
    return static_cast<std::size_t>(std::floor(ratio * (1.0 + 1e-12)));
}

PackingReport greedy_pack(const SurfacePoint& center, double r, double delta,
                          const PointCloud& candidates, const DistanceFn& dist,
                          double curvature_bound) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("packing delta must lie in (0,1)");
    if (!(r > 0.0)) throw DomainError("packing radius must be positive");

    PackingReport report;
    report.delta = delta;
    report.bound_constant = packing_bound(delta, r, curvature_bound);

    const std::size_t n = candidates.size();
    std::vector<std::size_t> eligible;
    std::size_t seed = n;
    double seed_dist = std::numeric_limits<double>::infinity();
    const double reach = (1.0 - delta) * r;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = dist(center, candidates.point(i));
        if (d > r * (1.0 + 1e-12)) {
            throw DomainError("packing candidate " + std::to_string(i) + " lies outside B(center, r)");
        }
        if (d <= reach) {
            eligible.push_back(i);
            if (d < seed_dist) {
                seed_dist = d;
                seed = i;
            }
        }
    }
    if (eligible.empty()) return report;

    // Farthest-point insertion: min_gap[e] is the distance from eligible[e]
    // to the current set of centres.
    const double separation = 2.0 * delta * r;
    std::vector<double> min_gap(eligible.size(), std::numeric_limits<double>::infinity());
    std::size_t next = seed;
    while (true) {
        report.centers.push_back(next);
        std::size_t arg = eligible.size();
        double best = -1.0;
        for (std::size_t e = 0; e < eligible.size(); ++e) {
            min_gap[e] = std::min(min_gap[e], candidates.dist(eligible[e], next));
            if (min_gap[e] > best) {
                best = min_gap[e];
                arg = e;
            }
        }
        if (!(best > separation)) break;
        next = eligible[arg];
    }
    report.achieved = report.centers.size();
    return report;
}

CoverRecord box_count(std::span<const PointCloud> cells, double epsilon) {
    std::vector<double> diams;
    diams.reserve(cells.size());
    for (const auto& c : cells) diams.push_back(c.empty() ? 0.0 : diameter(c));
    return box_count(diams, epsilon);
}

CoverRecord box_count(std::span<const double> cell_diameters, double epsilon) {
    if (!(epsilon > 0.0)) throw DomainError("box_count epsilon must be positive");
    if (cell_diameters.empty()) throw DomainError("box_count needs at least one cell");
    for (std::size_t i = 0; i < cell_diameters.size(); ++i) {
        if (cell_diameters[i] > epsilon) {
            throw DomainError("cell " + std::to_string(i) + " has diameter " +
                              std::to_string(cell_diameters[i]) + " > epsilon " +
                              std::to_string(epsilon));
        }
    }
    return {epsilon, cell_diameters.size()};
}

void write_cover_csv(std::ostream& out, std::span<const CoverRecord> rows) {
    const auto old_flags = out.flags();
    const auto old_prec = out.precision();
    out << "epsilon,count\n";
    out << std::setprecision(17);
    for (const auto& row : rows) out << row.epsilon << ',' << row.count << '\n';
    out.flags(old_flags);
    out.precision(old_prec);
}

}  // namespace geogasket
