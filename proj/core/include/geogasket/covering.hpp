#pragma once

// Intersection counts of a closed ball with the cells of one level, checked
// against the packing bounds for disjoint cells with inner and outer radius
// witnesses.

#include <cstddef>
#include <vector>

#include "geogasket/gasket.hpp"

namespace geogasket {

/// Ball B(center, inradius) inside the cell and the cell inside
/// B(center, circumradius); center = phi(1/2, 2/3) with vertex 0 as apex.
struct CellWitness {
    SurfacePoint center;
    double inradius = 0.0;
    double circumradius = 0.0;
};

/// Throws DomainError when the inradius vanishes (degenerate cell).
CellWitness cell_witness(const GeodesicTriangle& cell);

/// Distance from x to the closed cell: 0 inside, else to the nearest side.
double distance_to_cell(const GeodesicTriangle& cell, const SurfacePoint& x);

struct BallIntersectionReport {
    std::size_t count = 0;
    std::vector<MultiIndex> cells;
    double rho = 0.0;
    /// Measured constants over the meeting cells: inradius >= c1 rho and
    /// circumradius <= c2 rho.
    double c1 = 0.0;
    double c2 = 0.0;
    /// Packing bounds for disjoint c1 rho balls: radius (c1 + 4 c2 + 2) rho as
    /// stated, and radius (c1 + 2 c2 + 1) rho as the containment argument gives.
    std::size_t bound_stated = 0;
    std::size_t bound_containment = 0;
    /// Greedy disjoint-ball probe among the witness centres in the larger ball.
    std::size_t probe_achieved = 0;
};

/// Level-n cells meeting the closed ball B(x, rho).
BallIntersectionReport disjoint_ball_intersection_count(const TriangleSystem& sys, int level,
                                                        const SurfacePoint& x, double rho);

}  // namespace geogasket
