#pragma once

// Geodesic-midpoint subdivision of a triangle, the resulting system of cells
// Delta_I, the maps f_I, and the checks that certify the system as an
// asymptotic similarity system.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "geogasket/triangle.hpp"

namespace geogasket {

/// Word over {1..k}. Digit i names the child containing vertex i of the parent
/// (vertex slot i-1 of the 0-based triangle API); digit 4 is the centre cell
/// in the full subdivision.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {}
    /// Parses "132"; the empty string is the root.
    static MultiIndex parse(const std::string& text);

    std::size_t size() const { return digits_.size(); }
    bool empty() const { return digits_.empty(); }
    const std::vector<std::uint8_t>& digits() const { return digits_; }
    std::uint8_t last() const { return digits_.back(); }

    MultiIndex parent() const;
    MultiIndex child(std::uint8_t digit) const;
    MultiIndex concat(const MultiIndex& other) const;
    bool has_prefix(const MultiIndex& prefix) const;
    std::string to_string() const;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<std::uint8_t> digits_;
};

struct BuildOptions {
    /// When set, the base must be delta-non-degenerate and every cell
    /// delta/2-non-degenerate; violations abort the build.
    std::optional<double> delta;
    /// 3 for the gasket, 4 to keep the centre cell as digit 4.
    int branching = 3;
    std::size_t max_cells = 20'000'000;
};

class TriangleSystem {
public:
    /// All cells Delta_I for |I| <= depth. Throws ConstructionError naming the
    /// first failing cell, CapacityError past max_cells.
    static TriangleSystem build(const GeodesicTriangle& base, int depth,
                                const BuildOptions& options = {});

    const GeodesicTriangle& base() const { return levels_[0][0]; }
    const Surface& surface() const { return base().surface(); }
    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    int branching() const { return branching_; }
    const std::optional<double>& delta() const { return delta_; }

    /// nu = (1 + r^2) / 2 with r = |Delta|.
    double nu() const;
    /// lambda_i = 1/2 for every digit.
    std::vector<double> ratios() const { return std::vector<double>(branching_, 0.5); }

    /// Gauge phi(x) = c x^2. NaN until calibrated or set.
    double gauge_constant() const { return gauge_c_; }
    void set_gauge_constant(double c) { gauge_c_ = c; }

    /// Level n holds k^n cells in lexicographic order of their indices.
    const std::vector<GeodesicTriangle>& level(int n) const { return levels_.at(n); }
    const GeodesicTriangle& cell(const MultiIndex& index) const;
    MultiIndex index_at(int n, std::size_t offset) const;
    std::size_t offset_of(const MultiIndex& index) const;
    /// Max cell diameter on level n.
    double level_diameter(int n) const;
    /// Cells with |I| >= 1 (the base is not counted).
    std::size_t cell_count() const;

    /// f_I: x in Delta_{I-} -> phi(t, s/2) where (t, s) are the coordinates of
    /// x with apex at the fixed vertex. Throws DomainError when x is outside
    /// the closed parent, ConvergenceError when the inversion fails.
    SurfacePoint apply_f(const MultiIndex& index, const SurfacePoint& x) const;

private:
    int branching_ = 3;
    std::optional<double> delta_;
    double gauge_c_;
    std::vector<std::vector<GeodesicTriangle>> levels_;

    TriangleSystem() : gauge_c_(std::numeric_limits<double>::quiet_NaN()) {}
};

/// Deviation floor for similarity audits: relative round-off in measured
/// distance ratios. Deviations below it count as zero.
inline constexpr double kAuditNoiseFloor = 1e-12;

struct SimilarityAudit {
    MultiIndex index;
    double lambda = 0.5;
    double parent_diameter = 0.0;
    double max_ratio_deviation = 0.0;
    double envelope = 0.0;  // lambda * c * |Delta_{I-}|^2
    std::size_t pairs = 0;
    bool pass = false;
};

/// Compares d(f(x), f(y)) / d(x, y) with 1/2 on `samples` pairs drawn from a
/// rotated Halton sequence over (t, s)^2 in the parent. Uses the system's
/// gauge constant (0 if uncalibrated). Throws DomainError for samples < 100 or
/// when every pair is degenerate.
SimilarityAudit audit_similarity(const TriangleSystem& sys, const MultiIndex& index,
                                 std::size_t samples = 128, std::uint64_t seed = 0);

/// Audits every cell with 1 <= |I| <= max_level, in level order.
std::vector<SimilarityAudit> audit_levels(const TriangleSystem& sys, int max_level,
                                          std::size_t samples = 128, std::uint64_t seed = 0);

/// c = 1.5 * max over cells with |I-| <= 2 of deviation / (lambda |Delta_{I-}|^2),
/// with sub-floor deviations treated as zero.
double calibrate_gauge(const TriangleSystem& sys, std::size_t samples = 128,
                       std::uint64_t seed = 0);

struct NestingReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_residual = 0.0;
    std::vector<std::string> failing;
};

/// Child vertices located in the closed parent via the parametrization
/// inverse. At most `per_level` cells are checked per level (evenly strided).
NestingReport check_nesting(const TriangleSystem& sys, std::size_t per_level = 0);

struct ContractionReport {
    double nu = 0.0;
    double max_step_ratio = 0.0;    // max |Delta_I| / |Delta_{I-}|
    double max_level_ratio = 0.0;   // max |Delta_I| / (nu^|I| |Delta|)
    std::size_t violations = 0;
    bool pass = false;
};

ContractionReport check_contraction(const TriangleSystem& sys);

struct NondegeneracySweep {
    double delta = 0.0;
    double min_angle = 0.0;
    double max_angle = 0.0;
    std::size_t checked = 0;
    std::size_t failures = 0;
    std::vector<std::string> failing;
};

/// Every stored cell against delta/2.
NondegeneracySweep nondegeneracy_sweep(const TriangleSystem& sys, double delta);

struct RatioProductReport {
    double L = 1.0;            // exp(2 r^2 / (1 - nu^2))
    double max_drift = 1.0;    // max over cells and i != j of q or 1/q
    std::size_t violations = 0;
    std::vector<std::string> failing;
};

/// q = (a_{I,i} / a_{I,j}) / (a_i / a_j) must lie in (1/L, L).
RatioProductReport check_ratio_products(const TriangleSystem& sys);

struct ControlledMoranReport {
    double D = 0.0;
    double min_ratio = 0.0;   // min |V_IJ| / (|V_I| |V_J|)
    double max_ratio = 0.0;
    std::size_t pairs = 0;
    bool band_ok = false;     // D^{-1} <= ratio <= D for every pair
    int small_level = -1;     // first level n with max |V_I| < 1/D, -1 if none
    bool pass = false;
};

/// All (I, J) with |I|, |J| >= 1 and |I| + |J| <= depth.
ControlledMoranReport controlled_moran_check(const TriangleSystem& sys, double D);

struct GnomonicReport {
    /// Per level n >= 1: max relative deviation of planar image side lengths
    /// from 2^-n times the planar base side lengths.
    std::vector<double> similarity_deviation;
    double lipschitz = 1.0;          // L with L^-1 <= |proj x - proj y| / d(x,y) <= L
    std::size_t pairs = 0;
    std::size_t area_violations = 0; // cells with Area < L^-2 Area(planar image)
    double min_area_ratio = 0.0;     // min Area(Delta_I) / Area(planar image)
};

/// Central projection of the sphere system onto the plane through the base
/// vertices. Throws DomainError for non-sphere systems or perimeter >= 2 pi.
GnomonicReport gnomonic_crosscheck(const TriangleSystem& sys, std::size_t pairs = 10000,
                                   std::uint64_t seed = 0);

struct SiblingReport {
    std::size_t samples = 0;
    std::size_t overlaps = 0;
};

/// Interior points of Delta_{I'i} (s < 1/2 in apex-i coordinates of the
/// parent) must have apex-j coordinate s > 1/2 for every sibling j != i.
SiblingReport check_sibling_interiors(const TriangleSystem& sys, int max_depth,
                                      std::size_t samples_per_pair, std::uint64_t seed = 0);

/// Radical-inverse point i of the Halton sequence in the given prime base.
double halton(std::uint64_t i, unsigned base);

/// Area of a geodesic triangle from its side lengths in the model space of
/// the surface: Heron in the plane, spherical excess on the unit sphere,
/// hyperbolic defect on H^2. Custom surfaces use the planar formula.
double model_area(SurfaceKind kind, const SideLengths& a);

}  // namespace geogasket
