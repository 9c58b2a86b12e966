#pragma once

// Geodesic triangle regions, their two-parameter geodesic families, and
// comparison-triangle angles in the plane, the unit sphere and H^2.
//
// Vertex indices are 0-based here. Side i is the side opposite vertex i.

#include <algorithm>
#include <array>

#include "geogasket/surface.hpp"

namespace geogasket {

using SideLengths = std::array<double, 3>;

enum class ComparisonSpace { plane, sphere, hyperbolic };

/// alpha[i] is the angle opposite side i.
struct ComparisonAngles {
    ComparisonSpace space = ComparisonSpace::plane;
    std::array<double, 3> alpha{};

    double sum() const { return alpha[0] + alpha[1] + alpha[2]; }
};

/// Throws DegenerateTriangleError unless a_i < a_j + a_k strictly for all i.
ComparisonAngles planar_comparison_angles(const SideLengths& a);
/// Additionally requires every side < pi and perimeter < 2 pi.
ComparisonAngles spherical_comparison_angles(const SideLengths& a);
ComparisonAngles hyperbolic_comparison_angles(const SideLengths& a);

struct NondegeneracyReport {
    bool ok = false;
    ComparisonAngles angles;
    double min_angle = 0.0;
    double max_angle = 0.0;
};

/// True iff every planar comparison angle lies in (delta, pi - delta).
/// delta must lie in (0, pi/2).
NondegeneracyReport is_delta_nondegenerate(const SideLengths& a, double delta);

struct EdgeQuotientReport {
    double max_quotient = 1.0;  // max_{i,j} a_j / a_i
    double bound = 1.0;         // 1 / sin(delta)
    bool holds = true;
};

/// For a delta-non-degenerate triangle the sine rule gives a_j/a_i <= 1/sin(delta).
/// Throws DomainError when the triangle is not delta-non-degenerate.
EdgeQuotientReport edge_quotient_bound(const SideLengths& a, double delta);

/// Relative side perturbation eps such that any triangle whose sides are
/// rescaled by factors in (1 - eps, 1 + eps) stays delta/2-non-degenerate when
/// the original is delta-non-degenerate. From the angle derivatives
/// d alpha / d log a = cot beta + cot gamma, -cot gamma, -cot beta bounded by
/// cot(delta/2) along the path, then halved.
double nondegeneracy_perturbation(double delta);

struct Subdivision;

class GeodesicTriangle {
public:
    /// Solves for the three sides. Throws ConstructionError when the diameter
    /// exceeds the surface's convexity guard, DegenerateTriangleError when the
    /// side lengths violate the strict triangle inequality.
    static GeodesicTriangle build(const Surface& surface, const SurfacePoint& p0,
                                  const SurfacePoint& p1, const SurfacePoint& p2);

    const Surface& surface() const { return surface_; }
    const SurfacePoint& vertex(int i) const { return p_[i]; }
    const std::array<SurfacePoint, 3>& vertices() const { return p_; }
    /// Initial velocity of the geodesic from vertex i to vertex j (i != j).
    const TangentVector& edge_velocity(int i, int j) const { return w_[i][j]; }
    /// Side i, oriented from vertex i+1 to vertex i+2 (mod 3).
    GeodesicSegment side(int i) const;
    const SideLengths& side_lengths() const { return a_; }
    double side_length(int i) const { return a_[i]; }
    double diameter() const { return std::max({a_[0], a_[1], a_[2]}); }

    /// phi(t, s) with vertex i in the apex role: the point at parameter t on
    /// the geodesic from the point at s along the edge i->k to the point at s
    /// along i->j, where (i, j, k) is cyclic. Requires t in [0,1], s in [0,1].
    SurfacePoint phi(int i, double t, double s) const;
    /// phi in the affine coordinates (alpha, beta) = (s(1-t), s t); accepts
    /// values slightly outside the closed region (used by the inverse).
    SurfacePoint phi_affine(int i, double alpha, double beta) const;

    /// The sub-triangle cut off by the geodesic sigma_s, apex i kept in slot i.
    GeodesicTriangle slice(int i, double s) const;

    /// Interior angle at vertex i from the two edge tangent vectors.
    double vertex_angle(int i) const;

    /// Corner children (child i = slice(i, 1/2)) and the centre triangle.
    Subdivision subdivide() const;

    /// Parameters (t, s) of x with vertex i as apex, and the chart residual of
    /// phi(t, s) - x. Throws ConvergenceError if the residual stays above
    /// 1e-7 * diameter.
    struct Location {
        double alpha = 0.0;
        double beta = 0.0;
        double t = 0.0;
        double s = 0.0;
        double residual = 0.0;
        /// Closed-region test in the affine coordinates.
        bool inside(double tol = 1e-7) const {
            return alpha >= -tol && beta >= -tol && alpha + beta <= 1.0 + tol;
        }
    };
    Location locate(const SurfacePoint& x, int i = 0) const;
    /// Closed membership; a point whose inversion fails counts as outside.
    bool contains(const SurfacePoint& x, double tol = 1e-7) const;

private:
    GeodesicTriangle(Surface surface, std::array<SurfacePoint, 3> p,
                     std::array<std::array<TangentVector, 3>, 3> w);

    Surface surface_;
    std::array<SurfacePoint, 3> p_;
    std::array<std::array<TangentVector, 3>, 3> w_{};
    SideLengths a_{};
};

/// Corner i contains vertex i of the parent; vertex i of the centre triangle
/// is the midpoint of side i.
struct Subdivision {
    std::array<GeodesicTriangle, 3> corners;
    GeodesicTriangle center;
};

struct AngleGap {
    double alpha_gap = 0.0;  // at the moving vertex on edge i->k
    double beta_gap = 0.0;   // at the moving vertex on edge i->j
};

/// Planar comparison angles of slice(i, s) and slice(i, t) at the two moving
/// vertices, compared.
AngleGap angle_stability(const GeodesicTriangle& base, int i, double s, double t);

}  // namespace geogasket
