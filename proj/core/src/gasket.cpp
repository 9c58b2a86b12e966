#include "geogasket/gasket.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "geogasket/errors.hpp"
#include "geogasket/parallel.hpp"

namespace geogasket {

MultiIndex MultiIndex::parse(const std::string& text) {
    std::vector<std::uint8_t> d;
    d.reserve(text.size());
    for (char c : text) {
        if (c < '1' || c > '4') throw DomainError("bad multi-index digit in '" + text + "'");
        d.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return MultiIndex(std::move(d));
}

MultiIndex MultiIndex::parent() const {
    if (digits_.empty()) throw DomainError("the root index has no parent");
    return MultiIndex({digits_.begin(), digits_.end() - 1});
}

MultiIndex MultiIndex::child(std::uint8_t digit) const {
    auto d = digits_;
    d.push_back(digit);
    return MultiIndex(std::move(d));
}

MultiIndex MultiIndex::concat(const MultiIndex& other) const {
    auto d = digits_;
    d.insert(d.end(), other.digits_.begin(), other.digits_.end());
    return MultiIndex(std::move(d));
}

bool MultiIndex::has_prefix(const MultiIndex& prefix) const {
    return prefix.size() <= size() &&
           std::equal(prefix.digits_.begin(), prefix.digits_.end(), digits_.begin());
}

std::string MultiIndex::to_string() const {
    std::string s;
    for (auto d : digits_) s.push_back(static_cast<char>('0' + d));
    return s;
}

namespace {

std::string cell_name(const MultiIndex& I) { return I.empty() ? "<base>" : I.to_string(); }

}  // namespace

TriangleSystem TriangleSystem::build(const GeodesicTriangle& base, int depth,
                                     const BuildOptions& options) {
    if (depth < 0) throw DomainError("depth must be nonnegative");
    if (options.branching != 3 && options.branching != 4) {
        throw DomainError("branching must be 3 or 4");
    }
    const std::size_t k = static_cast<std::size_t>(options.branching);
    std::size_t total = 0, width = 1;
    for (int n = 0; n <= depth; ++n) {
        total += width;
        if (total > options.max_cells) {
            throw CapacityError("system of depth " + std::to_string(depth) + " exceeds " +
                                std::to_string(options.max_cells) + " cells");
        }
        width *= k;
    }

    TriangleSystem sys;
    sys.branching_ = options.branching;
    sys.delta_ = options.delta;
    if (options.delta) {
        const auto nd = is_delta_nondegenerate(base.side_lengths(), *options.delta);
        if (!nd.ok) {
            throw ConstructionError("base triangle is not " + std::to_string(*options.delta) +
                                    "-non-degenerate (angles in [" + std::to_string(nd.min_angle) +
                                    ", " + std::to_string(nd.max_angle) + "])");
        }
    }
    sys.levels_.push_back({base});

    for (int n = 1; n <= depth; ++n) {
        const auto& parents = sys.levels_.back();
        std::vector<std::optional<GeodesicTriangle>> slots(parents.size() * k);
        parallel_for(parents.size(), [&](std::size_t p) {
            auto sub = parents[p].subdivide();
            for (std::size_t d = 0; d < 3; ++d) slots[p * k + d] = std::move(sub.corners[d]);
            if (k == 4) slots[p * k + 3] = std::move(sub.center);
        });

        std::vector<GeodesicTriangle> level;
        level.reserve(slots.size());
        for (std::size_t off = 0; off < slots.size(); ++off) {
            const auto& cell = *slots[off];
            try {
                if (options.delta) {
                    const auto nd = is_delta_nondegenerate(cell.side_lengths(), *options.delta / 2);
                    if (!nd.ok) {
                        throw ConstructionError("cell " + sys.index_at(n, off).to_string() +
                                                " is not delta/2-non-degenerate (min angle " +
                                                std::to_string(nd.min_angle) + ", max angle " +
                                                std::to_string(nd.max_angle) + ")");
                    }
                } else {
                    planar_comparison_angles(cell.side_lengths());
                }
            } catch (const DegenerateTriangleError& e) {
                throw ConstructionError("cell " + sys.index_at(n, off).to_string() +
                                        " is degenerate: " + e.what());
            }
            level.push_back(std::move(*slots[off]));
        }
        sys.levels_.push_back(std::move(level));
    }
    return sys;
}

double TriangleSystem::nu() const {
    const double r = base().diameter();
    return 0.5 * (1.0 + r * r);
}

std::size_t TriangleSystem::offset_of(const MultiIndex& index) const {
    std::size_t off = 0;
    for (auto d : index.digits()) {
        if (d < 1 || d > branching_) {
            throw DomainError("digit " + std::to_string(d) + " out of range in index " +
                              index.to_string());
        }
        off = off * static_cast<std::size_t>(branching_) + (d - 1);
    }
    return off;
}

MultiIndex TriangleSystem::index_at(int n, std::size_t offset) const {
    std::vector<std::uint8_t> d(static_cast<std::size_t>(n));
    for (int p = n - 1; p >= 0; --p) {
        d[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(offset % branching_ + 1);
        offset /= branching_;
    }
    return MultiIndex(std::move(d));
}

const GeodesicTriangle& TriangleSystem::cell(const MultiIndex& index) const {
    if (static_cast<int>(index.size()) > depth()) {
        throw DomainError("index " + index.to_string() + " is deeper than the system");
    }
    return levels_[index.size()][offset_of(index)];
}

double TriangleSystem::level_diameter(int n) const {
    double best = 0.0;
    for (const auto& c : level(n)) best = std::max(best, c.diameter());
    return best;
}

std::size_t TriangleSystem::cell_count() const {
    std::size_t n = 0;
    for (std::size_t l = 1; l < levels_.size(); ++l) n += levels_[l].size();
    return n;
}

SurfacePoint TriangleSystem::apply_f(const MultiIndex& index, const SurfacePoint& x) const {
    if (index.empty()) throw DomainError("apply_f needs a nonempty index");
    const int d = index.last();
    if (d < 1 || d > 3) throw DomainError("the centre cell carries no almost-similarity map");
    const auto& parent = cell(index.parent());
    const int i = d - 1;
    const auto loc = parent.locate(x, i);
    if (!loc.inside()) {
        throw DomainError("apply_f argument lies outside the parent cell " +
                          cell_name(index.parent()));
    }
    return parent.phi_affine(i, 0.5 * loc.alpha, 0.5 * loc.beta);
}

double halton(std::uint64_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

namespace {

// Cranley-Patterson rotation of the Halton sequence; the seed only fixes the shift.
struct RotatedHalton {
    std::array<double, 4> shift{};
    explicit RotatedHalton(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& s : shift) s = u(rng);
    }
    std::array<double, 4> operator()(std::uint64_t q) const {
        static constexpr unsigned bases[4] = {2, 3, 5, 7};
        std::array<double, 4> out{};
        for (int d = 0; d < 4; ++d) {
            const double x = halton(q, bases[d]) + shift[d];
            out[d] = x - std::floor(x);
        }
        return out;
    }
};

}  // namespace

SimilarityAudit audit_similarity(const TriangleSystem& sys, const MultiIndex& index,
                                 std::size_t samples, std::uint64_t seed) {
    if (samples < 100) throw DomainError("similarity audit needs at least 100 pairs");
    if (index.empty()) throw DomainError("similarity audit needs a nonempty index");
    const int d = index.last();
    if (d < 1 || d > 3) throw DomainError("the centre cell carries no almost-similarity map");
    const auto& parent = sys.cell(index.parent());
    const auto& surface = sys.surface();
    const int i = d - 1;
    const double diam = parent.diameter();
    const RotatedHalton seq(seed);

    SimilarityAudit audit;
    audit.index = index;
    audit.parent_diameter = diam;
    for (std::size_t q = 1; q <= samples; ++q) {
        const auto h = seq(q);
        const double t1 = h[0], s1 = 1.0 - h[1], t2 = h[2], s2 = 1.0 - h[3];
        const SurfacePoint x = parent.phi(i, t1, s1);
        const SurfacePoint y = parent.phi(i, t2, s2);
        const double dxy = surface.distance(x, y);
        if (!(dxy >= 1e-6 * diam)) continue;
        const SurfacePoint fx = parent.phi(i, t1, 0.5 * s1);
        const SurfacePoint fy = parent.phi(i, t2, 0.5 * s2);
        const double ratio = surface.distance(fx, fy) / dxy;
        audit.max_ratio_deviation = std::max(audit.max_ratio_deviation, std::abs(ratio - 0.5));
        ++audit.pairs;
    }
    if (audit.pairs == 0) throw DomainError("every sampled pair in cell " + index.to_string() +
                                            " is degenerate");
    const double c = std::isnan(sys.gauge_constant()) ? 0.0 : sys.gauge_constant();
    audit.envelope = audit.lambda * c * diam * diam;
    audit.pass = audit.max_ratio_deviation <= audit.envelope + kAuditNoiseFloor;
    return audit;
}

std::vector<SimilarityAudit> audit_levels(const TriangleSystem& sys, int max_level,
                                          std::size_t samples, std::uint64_t seed) {
    max_level = std::min(max_level, sys.depth());
    std::vector<MultiIndex> todo;
    for (int n = 1; n <= max_level; ++n) {
        for (std::size_t off = 0; off < sys.level(n).size(); ++off) {
            const auto I = sys.index_at(n, off);
            if (I.last() <= 3) todo.push_back(I);
        }
    }
    std::vector<SimilarityAudit> out(todo.size());
    parallel_for(todo.size(),
                 [&](std::size_t j) { out[j] = audit_similarity(sys, todo[j], samples, seed); });
    return out;
}

double calibrate_gauge(const TriangleSystem& sys, std::size_t samples, std::uint64_t seed) {
    if (sys.depth() < 1) throw DomainError("gauge calibration needs depth >= 1");
    double worst = 0.0;
    for (const auto& a : audit_levels(sys, std::min(3, sys.depth()), samples, seed)) {
        if (a.max_ratio_deviation <= kAuditNoiseFloor) continue;
        worst = std::max(worst, a.max_ratio_deviation /
                                    (a.lambda * a.parent_diameter * a.parent_diameter));
    }
    return 1.5 * worst;
}

NestingReport check_nesting(const TriangleSystem& sys, std::size_t per_level) {
    std::vector<MultiIndex> todo;
    for (int n = 1; n <= sys.depth(); ++n) {
        const std::size_t size = sys.level(n).size();
        const std::size_t stride =
            (per_level == 0 || size <= per_level) ? 1 : (size + per_level - 1) / per_level;
        for (std::size_t off = 0; off < size; off += stride) todo.push_back(sys.index_at(n, off));
    }
    struct Result {
        double residual = 0.0;
        bool ok = true;
    };
    std::vector<Result> res(todo.size());
    parallel_for(todo.size(), [&](std::size_t j) {
        const auto& child = sys.cell(todo[j]);
        const auto& parent = sys.cell(todo[j].parent());
        for (const auto& v : child.vertices()) {
            try {
                const auto loc = parent.locate(v, 0);
                res[j].residual = std::max(res[j].residual, loc.residual);
                if (!loc.inside(1e-7)) res[j].ok = false;
            } catch (const ConvergenceError& e) {
                res[j].residual = std::max(res[j].residual, e.residual());
                res[j].ok = false;
            }
        }
    });
    NestingReport report;
    report.checked = todo.size();
    for (std::size_t j = 0; j < todo.size(); ++j) {
        report.max_residual = std::max(report.max_residual, res[j].residual);
        if (!res[j].ok) {
            ++report.violations;
            report.failing.push_back(todo[j].to_string());
        }
    }
    return report;
}

ContractionReport check_contraction(const TriangleSystem& sys) {
    ContractionReport r;
    r.nu = sys.nu();
    const double base = sys.base().diameter();
    constexpr double slack = 1.0 + 1e-12;
    double scale = 1.0;
    for (int n = 1; n <= sys.depth(); ++n) {
        scale *= r.nu;
        const auto& level = sys.level(n);
        const auto& parents = sys.level(n - 1);
        for (std::size_t off = 0; off < level.size(); ++off) {
            const double d = level[off].diameter();
            const double step = d / parents[off / sys.branching()].diameter();
            const double lvl = d / (scale * base);
            r.max_step_ratio = std::max(r.max_step_ratio, step);
            r.max_level_ratio = std::max(r.max_level_ratio, lvl);
            if (step > r.nu * slack || lvl > slack) ++r.violations;
        }
    }
    r.pass = r.violations == 0;
    return r;
}

NondegeneracySweep nondegeneracy_sweep(const TriangleSystem& sys, double delta) {
    NondegeneracySweep r;
    r.delta = delta;
    r.min_angle = std::numbers::pi;
    for (int n = 0; n <= sys.depth(); ++n) {
        const auto& level = sys.level(n);
        for (std::size_t off = 0; off < level.size(); ++off) {
            ++r.checked;
            bool ok = false;
            try {
                const auto nd = is_delta_nondegenerate(level[off].side_lengths(), delta / 2);
                r.min_angle = std::min(r.min_angle, nd.min_angle);
                r.max_angle = std::max(r.max_angle, nd.max_angle);
                ok = nd.ok;
            } catch (const DegenerateTriangleError&) {
            }
            if (!ok) {
                ++r.failures;
                r.failing.push_back(cell_name(sys.index_at(n, off)));
            }
        }
    }
    return r;
}

RatioProductReport check_ratio_products(const TriangleSystem& sys) {
    RatioProductReport r;
    const double rad = sys.base().diameter();
    const double nu = sys.nu();
    // The bound only means something for nu < 1 (r < 1).
    r.L = nu < 1.0 ? std::exp(2.0 * rad * rad / (1.0 - nu * nu))
                   : std::numeric_limits<double>::infinity();
    const auto& a = sys.base().side_lengths();
    for (int n = 1; n <= sys.depth(); ++n) {
        const auto& level = sys.level(n);
        for (std::size_t off = 0; off < level.size(); ++off) {
            const auto& b = level[off].side_lengths();
            double drift = 1.0;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    if (i == j) continue;
                    const double q = (b[i] / b[j]) / (a[i] / a[j]);
                    drift = std::max({drift, q, 1.0 / q});
                }
            }
            r.max_drift = std::max(r.max_drift, drift);
            if (!(drift < r.L)) {
                ++r.violations;
                r.failing.push_back(sys.index_at(n, off).to_string());
            }
        }
    }
    return r;
}

ControlledMoranReport controlled_moran_check(const TriangleSystem& sys, double D) {
    if (!(D > 0.0)) throw DomainError("controlled Moran constant must be positive");
    ControlledMoranReport r;
    r.D = D;
    r.min_ratio = std::numeric_limits<double>::infinity();
    r.max_ratio = 0.0;
    const std::size_t k = static_cast<std::size_t>(sys.branching());
    for (int ni = 1; ni < sys.depth(); ++ni) {
        const auto& LI = sys.level(ni);
        for (int nj = 1; ni + nj <= sys.depth(); ++nj) {
            const auto& LJ = sys.level(nj);
            const auto& LIJ = sys.level(ni + nj);
            std::size_t kj = 1;
            for (int p = 0; p < nj; ++p) kj *= k;
            for (std::size_t oi = 0; oi < LI.size(); ++oi) {
                const double di = LI[oi].diameter();
                for (std::size_t oj = 0; oj < LJ.size(); ++oj) {
                    const double ratio = LIJ[oi * kj + oj].diameter() / (di * LJ[oj].diameter());
                    r.min_ratio = std::min(r.min_ratio, ratio);
                    r.max_ratio = std::max(r.max_ratio, ratio);
                    ++r.pairs;
                }
            }
        }
    }
    for (int n = 0; n <= sys.depth(); ++n) {
        if (sys.level_diameter(n) < 1.0 / D) {
            r.small_level = n;
            break;
        }
    }
    if (r.pairs == 0) {
        r.min_ratio = r.max_ratio = 0.0;
        r.band_ok = true;
        r.pass = true;
        return r;
    }
    r.band_ok = r.min_ratio >= 1.0 / D && r.max_ratio <= D;
    r.pass = r.band_ok && r.small_level >= 0;
    return r;
}

double model_area(SurfaceKind kind, const SideLengths& a) {
    const double s = 0.5 * (a[0] + a[1] + a[2]);
    switch (kind) {
        case SurfaceKind::sphere_unit: {
            const double t = std::tan(s / 2) * std::tan((s - a[0]) / 2) *
                             std::tan((s - a[1]) / 2) * std::tan((s - a[2]) / 2);
            return 4.0 * std::atan(std::sqrt(std::max(0.0, t)));
        }
        case SurfaceKind::hyperbolic_poincare: {
            const double t = std::tanh(s / 2) * std::tanh((s - a[0]) / 2) *
                             std::tanh((s - a[1]) / 2) * std::tanh((s - a[2]) / 2);
            return 4.0 * std::atan(std::sqrt(std::max(0.0, t)));
        }
        default: {
            const double t = s * (s - a[0]) * (s - a[1]) * (s - a[2]);
            return std::sqrt(std::max(0.0, t));
        }
    }
}

namespace {

struct Vec3 {
    double x, y, z;
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double k) const { return {x * k, y * k, z * k}; }
};
double dot3(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

// Inverse stereographic projection matching Surface::sphere_unit.
Vec3 embed(const SurfacePoint& p) {
    const double r2 = p.u * p.u + p.v * p.v;
    const double q = 1.0 + r2;
    return {2.0 * p.u / q, 2.0 * p.v / q, (1.0 - r2) / q};
}

double great_circle(const Vec3& a, const Vec3& b) {
    return std::atan2(norm3(cross3(a, b)), dot3(a, b));
}

}  // namespace

GnomonicReport gnomonic_crosscheck(const TriangleSystem& sys, std::size_t pairs,
                                   std::uint64_t seed) {
    if (sys.surface().kind() != SurfaceKind::sphere_unit) {
        throw DomainError("gnomonic cross-check applies to sphere systems only");
    }
    const auto& base = sys.base();
    const auto& a = base.side_lengths();
    if (!(a[0] + a[1] + a[2] < 2.0 * std::numbers::pi)) {
        throw DomainError("gnomonic cross-check needs perimeter below 2 pi");
    }
    const Vec3 A = embed(base.vertex(0)), B = embed(base.vertex(1)), C = embed(base.vertex(2));
    Vec3 n = cross3(B - A, C - A);
    double h = dot3(n, A);
    if (h < 0) {
        n = n * -1.0;
        h = -h;
    }
    auto project = [&](const SurfacePoint& p) {
        const Vec3 X = embed(p);
        return X * (h / dot3(n, X));
    };
    auto planar_sides = [&](const GeodesicTriangle& t) {
        std::array<Vec3, 3> y{project(t.vertex(0)), project(t.vertex(1)), project(t.vertex(2))};
        return SideLengths{norm3(y[1] - y[2]), norm3(y[2] - y[0]), norm3(y[0] - y[1])};
    };
    auto planar_area = [&](const GeodesicTriangle& t) {
        const Vec3 y0 = project(t.vertex(0)), y1 = project(t.vertex(1)), y2 = project(t.vertex(2));
        return 0.5 * norm3(cross3(y1 - y0, y2 - y0));
    };

    GnomonicReport r;
    const SideLengths b0 = planar_sides(base);
    double scale = 1.0;
    for (int lvl = 1; lvl <= sys.depth(); ++lvl) {
        scale *= 0.5;
        double dev = 0.0;
        for (const auto& cell : sys.level(lvl)) {
            const auto b = planar_sides(cell);
            for (int i = 0; i < 3; ++i) dev = std::max(dev, std::abs(b[i] / (scale * b0[i]) - 1.0));
        }
        r.similarity_deviation.push_back(dev);
    }

    const RotatedHalton seq(seed);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t q = 1; q <= pairs; ++q) {
        const auto u = seq(q);
        const SurfacePoint x = base.phi(0, u[0], 1.0 - u[1]);
        const SurfacePoint y = base.phi(0, u[2], 1.0 - u[3]);
        const double d = great_circle(embed(x), embed(y));
        if (!(d > 1e-9)) continue;
        const double ratio = norm3(project(x) - project(y)) / d;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++r.pairs;
    }
    r.lipschitz = r.pairs ? std::max(hi, 1.0 / lo) : 1.0;

    r.min_area_ratio = std::numeric_limits<double>::infinity();
    const double floor = 1.0 / (r.lipschitz * r.lipschitz);
    for (int lvl = 0; lvl <= sys.depth(); ++lvl) {
        for (const auto& cell : sys.level(lvl)) {
            const double ratio =
                model_area(SurfaceKind::sphere_unit, cell.side_lengths()) / planar_area(cell);
            r.min_area_ratio = std::min(r.min_area_ratio, ratio);
            if (ratio < floor * (1.0 - 1e-9)) ++r.area_violations;
        }
    }
    return r;
}

SiblingReport check_sibling_interiors(const TriangleSystem& sys, int max_depth,
                                      std::size_t samples_per_pair, std::uint64_t seed) {
    max_depth = std::min(max_depth, sys.depth());
    std::vector<MultiIndex> parents;
    for (int n = 0; n < max_depth; ++n) {
        for (std::size_t off = 0; off < sys.level(n).size(); ++off) {
            const auto I = sys.index_at(n, off);
            if (I.empty() || I.last() <= 3) parents.push_back(I);
        }
    }
    const RotatedHalton seq(seed);
    std::vector<std::size_t> overlaps(parents.size(), 0);
    parallel_for(parents.size(), [&](std::size_t p) {
        const auto& P = sys.cell(parents[p]);
        for (int i = 0; i < 3; ++i) {
            for (std::size_t q = 1; q <= samples_per_pair; ++q) {
                const auto u = seq(q);
                const double t = 1e-6 + (1.0 - 2e-6) * u[0];
                const double s = 0.5 * (1e-6 + (1.0 - 2e-6) * u[1]);
                const SurfacePoint x = P.phi(i, t, s);
                for (int j = 0; j < 3; ++j) {
                    if (j == i) continue;
                    const auto loc = P.locate(x, j);
                    if (loc.s < 0.5 - 1e-9) ++overlaps[p];
                }
            }
        }
    });
    SiblingReport r;
    r.samples = parents.size() * 6 * samples_per_pair;
    for (auto o : overlaps) r.overlaps += o;
    return r;
}

}  // namespace geogasket
