#pragma once

// Riemannian surfaces given on a single chart, with a numerical geodesic
// oracle: exp by adaptive Dormand-Prince integration, log by shooting.

#include <functional>
#include <memory>
#include <string>

#include "geogasket/expr.hpp"
#include "geogasket/vec2.hpp"

namespace geogasket {

enum class SurfaceKind { euclidean, sphere_unit, hyperbolic_poincare, custom };

std::string to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& name);

/// Open rectangle in the parameter plane.
struct ChartRect {
    double u_min = -1.0;
    double u_max = 1.0;
    double v_min = -1.0;
    double v_max = 1.0;

    bool contains(const SurfacePoint& p) const {
        return p.u > u_min && p.u < u_max && p.v > v_min && p.v < v_max;
    }
};

/// First fundamental form E du^2 + 2F du dv + G dv^2.
struct MetricTensor {
    double E = 1.0;
    double F = 0.0;
    double G = 1.0;

    double det() const { return E * G - F * F; }
};

/// Christoffel symbols of the second kind; `uuv` is Gamma^u_{uv}, etc.
struct Christoffel {
    double u_uu = 0.0, u_uv = 0.0, u_vv = 0.0;
    double v_uu = 0.0, v_uv = 0.0, v_vv = 0.0;
};

/// Integrator and shooting controls. Defaults are the production tolerances.
struct GeodesicOptions {
    double abs_tol = 1e-11;
    double rel_tol = 1e-10;
    double residual_target = 1e-9;  // failure threshold for the log map (chart units)
    int max_shooting_iterations = 60;
    int max_steps = 100000;
};

/// Position and velocity along a geodesic.
struct GeodesicState {
    SurfacePoint position;
    TangentVector velocity;
};

class Surface;

/// Constant-speed geodesic on parameter [0,1].
struct GeodesicSegment {
    SurfacePoint start;
    SurfacePoint end;
    TangentVector initial_velocity;
    TangentVector final_velocity;
    double length = 0.0;

    bool degenerate() const { return length == 0.0; }
    SurfacePoint at(const Surface& surface, double tau) const;
    GeodesicSegment reversed() const {
        return {end, start, -final_velocity, -initial_velocity, length};
    }
};

/// Immutable surface model. Copies share the underlying metric description.
class Surface {
public:
    static Surface euclidean();
    /// Unit sphere in the stereographic chart from the south pole; the chart
    /// origin is the north pole and the unit circle is the equator.
    static Surface sphere_unit();
    /// Poincare disk model of the hyperbolic plane (curvature -1).
    static Surface hyperbolic_poincare();
    /// Metric components given as expressions in u, v. Validates positive
    /// definiteness and |K| <= 1 on a sample grid, throwing DomainError.
    static Surface custom(const ChartRect& chart, Expression E, Expression F, Expression G,
                          int sample_grid = 21);

    SurfaceKind kind() const;
    const ChartRect& chart() const;
    bool contains(const SurfacePoint& p) const;

    MetricTensor metric(const SurfacePoint& p) const;
    Christoffel christoffel(const SurfacePoint& p) const;
    double curvature(const SurfacePoint& p) const;

    double inner(const SurfacePoint& p, const TangentVector& a, const TangentVector& b) const;
    double norm(const SurfacePoint& p, const TangentVector& a) const;
    /// Angle between two tangent vectors at p, measured with the metric.
    double angle(const SurfacePoint& p, const TangentVector& a, const TangentVector& b) const;

    /// Largest triangle diameter allowed for constructions (convexity guard).
    double convexity_guard() const;
    /// Upper bound for |K| used by packing and comparison estimates.
    double curvature_bound() const { return kind() == SurfaceKind::euclidean ? 0.0 : 1.0; }

    /// Max |K| over an n*n grid of the chart (interior points).
    double max_abs_curvature(int n) const;

    const GeodesicOptions& options() const;
    Surface with_options(const GeodesicOptions& opts) const;

    // Geodesic oracle. All throw EscapeError when the curve leaves the chart.
    GeodesicState exp_state(const SurfacePoint& p, const TangentVector& w, double t) const;
    SurfacePoint exp_map(const SurfacePoint& p, const TangentVector& w, double t = 1.0) const;
    /// Shooting solve for w with exp_map(p, w, 1) = q. Throws ConvergenceError.
    TangentVector log_map(const SurfacePoint& p, const SurfacePoint& q) const;
    GeodesicSegment geodesic_between(const SurfacePoint& p, const SurfacePoint& q) const;
    double distance(const SurfacePoint& p, const SurfacePoint& q) const;
    SurfacePoint midpoint(const SurfacePoint& p, const SurfacePoint& q) const;

    struct Impl;

private:
    explicit Surface(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// Central-difference Jacobi field J_s(t) = d phi/ds of a two-parameter
/// geodesic family, plus its metric norm at phi(t, s).
struct JacobiSample {
    TangentVector field;
    double norm = 0.0;
};

using SurfaceFamily = std::function<SurfacePoint(double t, double s)>;

/// Requires 0 < s - h, s + h <= 1 and 0 < h <= 1e-4; throws DomainError otherwise.
JacobiSample jacobi_field(const Surface& surface, const SurfaceFamily& phi, double t, double s,
                          double h = 1e-4);

}  // namespace geogasket
