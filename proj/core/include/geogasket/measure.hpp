#pragma once

// Finitely supported probability measures, their Kantorovich-Rubinshtein
// distance (optimal transport with geodesic ground cost) and the iteration
// mu -> sum a_i (f_i)_* mu over the maps of a TriangleSystem.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "geogasket/gasket.hpp"
#include "geogasket/metric.hpp"

namespace geogasket {

struct Atom {
    SurfacePoint point;
    double weight = 0.0;
    /// Cell word the atom is known to lie in; empty when unknown.
    MultiIndex address;
};

class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    /// Throws DomainError for a negative weight or a total off 1 by > 1e-12.
    explicit DiscreteMeasure(std::vector<Atom> atoms);
    static DiscreteMeasure point_mass(const SurfacePoint& p, MultiIndex address = {});

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

private:
    std::vector<Atom> atoms_;
};

/// Exact balanced transportation problem by the network simplex method.
/// `cost` is row-major supply.size() x demand.size(). The two totals must
/// agree to 1e-12 relative. Returns the optimal cost.
double transport_cost(std::span<const double> supply, std::span<const double> demand,
                      std::span<const double> cost);

struct KrOptions {
    /// Largest combined atom count solved as one exact problem.
    std::size_t exact_limit = 1000;
    /// Ground cost min(d, 2): the dual over 1-Lipschitz functions with |f| <= 1.
    bool bounded = false;
};

struct KrResult {
    double value = 0.0;   // exact value, or the upper bound when !exact
    double lower = 0.0;
    double upper = 0.0;
    bool exact = true;
    int split_depth = 0;  // address prefix length of the cell decomposition
};

/// Past exact_limit the atoms are split by address prefix into cells that
/// fit; each cell is solved exactly and unmatched mass is carried up through
/// cell representatives. That plan gives `upper`; `lower` is the best 1-D
/// transport bound over pushforwards by distance-to-anchor functions.
/// Throws CapacityError when addresses are too short to split.
KrResult kr_distance(const DiscreteMeasure& a, const DiscreteMeasure& b, const DistanceFn& dist,
                     const KrOptions& options = {});

struct FixpointOptions {
    std::size_t atom_budget = 20'000;
    /// Merge atoms by address prefix when the budget would be exceeded;
    /// otherwise throw CapacityError.
    bool resample = true;
    /// Atoms merge into the centroid of their depth ceil(log2(1/tol)) cell.
    double snap_tolerance = 1.0 / 512.0;
    KrOptions kr;
};

struct FixpointResult {
    DiscreteMeasure measure;
    /// trace[m] = KR(mu_{m+1}, mu_m).
    std::vector<KrResult> trace;
    std::size_t resamples = 0;
};

/// Point mass at phi(1/2, 2/3) of the base triangle, the centroid-like point
/// used as the default seed.
DiscreteMeasure default_seed(const TriangleSystem& sys);

/// `iterations` steps of mu -> sum_i a_i (f_i)_* mu with f_i the maps of
/// digits 1..a.size() on the base. One weight gives the single-map mode.
/// Throws DomainError unless every a_i > 0, a.size() <= branching and the
/// weights sum to 1 within 1e-12.
FixpointResult pushforward_fixpoint(const TriangleSystem& sys, std::span<const double> weights,
                                    int iterations, const DiscreteMeasure& seed,
                                    const FixpointOptions& options = {});

/// Mass of every level-n cell (offset order). Atoms with addresses of length
/// >= n are binned by prefix, others by descending the cell tree.
std::vector<double> cell_masses(const DiscreteMeasure& mu, const TriangleSystem& sys, int n);

/// max over |I| = n of |mu(Delta_I) - a_{i1} ... a_{in}|.
double invariance_residual(const DiscreteMeasure& mu, const TriangleSystem& sys,
                           std::span<const double> weights, int n);

}  // namespace geogasket
