#pragma once

// Moran equation, admissible gauges, simple families and the Hausdorff /
// box-dimension estimators over a TriangleSystem.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "geogasket/gasket.hpp"
#include "geogasket/metric.hpp"

namespace geogasket {

struct MoranSolution {
    double s = 0.0;
    double residual = 0.0;  // |sum lambda_i^s - 1|
};

/// Unique s >= 0 with sum lambda_i^s = 1: bisection on [0, log k / log(1/lambda_max)]
/// followed by a Newton polish. Throws DomainError for an empty list or a
/// ratio outside (0,1).
MoranSolution solve_moran(std::span<const double> ratios);

/// Increasing gauge phi on (0, inf) with phi(0+) = 0, evaluated through
/// log y so that phi(a nu^x) stays finite for huge x.
class Gauge {
public:
    /// phi(y) = y^alpha, alpha > 0.
    static Gauge power(double alpha);
    /// phi(y) = (-log y)^-p on (0,1); needs p > 0.
    static Gauge log_power(double p);
    /// The family (-log y)^{-1 - 2/(2n+1)}, n >= 1.
    static Gauge log_power_family(int n);
    /// Piecewise-linear in (log y, phi) through the given knots, linear in y
    /// towards 0 below the first knot and constant past the last.
    static Gauge table(std::vector<double> y, std::vector<double> phi);

    double operator()(double y) const;
    double from_log(double log_y) const;
    const std::string& description() const { return description_; }

    /// Throws DomainError if phi is not increasing on a log grid over
    /// [1e-300, y_max] or phi(1e-300) is not small.
    void validate(double y_max = 1.0) const;

private:
    enum class Form { power, log_power, table };
    Form form_ = Form::power;
    double param_ = 2.0;
    std::vector<double> log_y_, phi_;
    std::string description_;
};

struct AdmissibilityReport {
    bool admissible = false;
    double integral = 0.0;        // partial integral plus geometric tail estimate
    double last_increment = 0.0;
    double increment_ratio = 0.0; // last increment over the previous one
    int doublings = 0;
};

/// Integral of phi(a nu^x) over [1, X] with X doubling. Admissible once the
/// estimated tail drops below 1e-10; inadmissible when after 40 doublings the
/// increments no longer decay (ratio >= 0.99, i.e. log-type growth).
AdmissibilityReport gauge_admissible(const Gauge& gauge, double a, double nu);

struct ProductBounds {
    double upper = 1.0;   // prod_{i>=0} (1 + phi(nu^i |V|))
    double lower = 1.0;   // prod_{i>=0} (1 - phi(nu^i |V|))
    double tail_error = 0.0;
};

/// Both infinite products, explicit terms plus an integral tail.
/// Throws DomainError when phi(|V|) >= 1 or nu outside (0,1).
ProductBounds product_bounds(const Gauge& gauge, double nu, double diameter);

/// Finite prefix-free exhaustive set of words over {1..k}.
struct SimpleFamily {
    int k = 3;
    std::vector<MultiIndex> members;
};

/// Prefix-free and every infinite word has exactly one prefix in the family.
bool is_simple_family(const SimpleFamily& family);

/// For every branch, the first prefix whose cell diameter is <= threshold
/// (relative slack 1e-12). Throws DomainError naming a branch that never gets
/// there within the system depth, or when threshold >= |Delta|.
SimpleFamily enumerate_simple_family(const TriangleSystem& sys, double threshold);

/// Same construction on abstract ratios: first prefixes with lambda_I <= threshold.
SimpleFamily ratio_threshold_family(std::span<const double> ratios, double threshold);

/// sum over members of (lambda_{i1} ... lambda_{in})^s.
double simple_family_sum(const SimpleFamily& family, std::span<const double> ratios, double s);

/// sum over |I| = n of |Delta_I|^s; n = 0 gives |Delta|^s.
double hausdorff_upper_sum(const TriangleSystem& sys, double s, int n);

struct BoxLevel {
    int level = 0;
    double epsilon = 0.0;       // max cell diameter at the level
    std::size_t count = 0;      // cells at the level (upper witness for N_eps)
    double upper_sum = 0.0;     // sum |Delta_I|^s with s from the Moran equation
    double residual = 0.0;      // regression residual in log count
    bool used = true;
};

struct BoxDimensionReport {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double moran_s = 0.0;
    bool discarded_coarsest = false;
    std::vector<BoxLevel> levels;
};

/// Least-squares slope of log N against -log eps over levels [n1, n2]. The
/// coarsest level is dropped once if its residual exceeds 3x the median.
/// Throws DomainError for fewer than 4 levels or levels beyond the depth.
BoxDimensionReport box_dimension_estimate(const TriangleSystem& sys, int n1, int n2);

/// CSV rows `level,epsilon,count,upper_sum,used` with a header.
void write_box_csv(std::ostream& out, const BoxDimensionReport& report);

}  // namespace geogasket
