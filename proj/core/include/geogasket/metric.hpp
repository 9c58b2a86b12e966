#pragma once

// Metric-space primitives. Nothing in here knows about surfaces: distances
// come in through a DistanceFn supplied by the caller (normally a Surface).

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "geogasket/vec2.hpp"

namespace geogasket {

using DistanceFn = std::function<double(const SurfacePoint&, const SurfacePoint&)>;

/// Finite point set with its symmetric distance table.
class PointCloud {
public:
    PointCloud() = default;

    /// Computes the full distance table with `dist` (n(n-1)/2 calls).
    PointCloud(std::vector<SurfacePoint> points, const DistanceFn& dist);

    /// Takes a precomputed row-major n*n table. Throws DomainError if it is not
    /// square, has a nonzero diagonal, is asymmetric or has negative entries.
    PointCloud(std::vector<SurfacePoint> points, std::vector<double> table);

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const SurfacePoint& point(std::size_t i) const { return points_[i]; }
    std::span<const SurfacePoint> points() const { return points_; }
    double dist(std::size_t i, std::size_t j) const { return table_[i * points_.size() + j]; }

    /// Number of triples violating the triangle inequality by more than
    /// `rel_tol * diameter`. Exhaustive for n <= max_exhaustive, otherwise the
    /// first `samples` triples of a fixed stride walk.
    std::size_t triangle_violations(double rel_tol = 1e-9, std::size_t max_exhaustive = 64,
                                    std::size_t samples = 20000) const;

private:
    std::vector<SurfacePoint> points_;
    std::vector<double> table_;
};

/// Upper-bound witness for the covering number N_eps.
struct CoverRecord {
    double epsilon = 0.0;
    std::size_t count = 0;
};

struct PackingReport {
    double delta = 0.0;
    std::size_t achieved = 0;
    std::size_t bound_constant = 0;
    std::vector<std::size_t> centers;  // indices into the candidate cloud
};

/// Largest pairwise distance; 0 for a singleton. Throws DomainError when empty.
double diameter(const PointCloud& cloud);

/// Diameter of the union of two clouds, given a distance for cross pairs.
double union_diameter(const PointCloud& a, const PointCloud& b, const DistanceFn& dist);

/// Packing bound for disjoint delta*r balls inside an r ball on a surface with
/// |K| <= curvature_bound: area of the hyperbolic r ball over the area of the
/// spherical delta*r ball (Euclidean ratio 1/delta^2 when curvature_bound = 0).
std::size_t packing_bound(double delta, double r, double curvature_bound);

/// Greedy farthest-point packing of disjoint balls B(x_i, delta*r) contained in
/// B(center, r). Candidates farther than (1 - delta) r from the centre are not
/// eligible; accepted centres are pairwise more than 2 delta r apart.
/// Throws DomainError for delta outside (0,1) or a candidate outside B(center, r).
PackingReport greedy_pack(const SurfacePoint& center, double r, double delta,
                          const PointCloud& candidates, const DistanceFn& dist,
                          double curvature_bound = 0.0);

/// Box-count witness: every cell must have diameter <= epsilon.
/// Throws DomainError naming the first offending cell.
CoverRecord box_count(std::span<const PointCloud> cells, double epsilon);

/// Same, from precomputed cell diameters.
CoverRecord box_count(std::span<const double> cell_diameters, double epsilon);

/// `epsilon,count` rows with 17 significant digits, header first.
void write_cover_csv(std::ostream& out, std::span<const CoverRecord> rows);

}  // namespace geogasket
