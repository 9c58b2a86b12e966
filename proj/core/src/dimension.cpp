#include "geogasket/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "geogasket/errors.hpp"

namespace geogasket {

MoranSolution solve_moran(std::span<const double> ratios) {
    if (ratios.empty()) throw DomainError("Moran equation needs at least one ratio");
    double lmax = 0.0;
    for (double l : ratios) {
        if (!(l > 0.0 && l < 1.0)) {
            throw DomainError("ratio " + std::to_string(l) + " is outside (0,1)");
        }
        lmax = std::max(lmax, l);
    }
    auto g = [&](double s) {
        double sum = 0.0;
        for (double l : ratios) sum += std::pow(l, s);
        return sum - 1.0;
    };
    // At s = log k / log(1/lambda_max), sum lambda_i^s <= k lambda_max^s = 1.
    double lo = 0.0;
    double hi = std::log(static_cast<double>(ratios.size())) / std::log(1.0 / lmax);
    if (ratios.size() == 1) return {0.0, 0.0};
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        double f = -1.0, df = 0.0;
        for (double l : ratios) {
            const double p = std::pow(l, s);
            f += p;
            df += p * std::log(l);
        }
        if (df == 0.0) break;
        const double next = s - f / df;
        if (!(next >= lo - 1e-12 && next <= hi + 1e-12)) break;
        s = next;
    }
    return {s, std::abs(g(s))};
}

Gauge Gauge::power(double alpha) {
    if (!(alpha > 0.0)) throw DomainError("power gauge exponent must be positive");
    Gauge g;
    g.form_ = Form::power;
    g.param_ = alpha;
    g.description_ = "y^" + std::to_string(alpha);
    return g;
}

Gauge Gauge::log_power(double p) {
    if (!(p > 0.0)) throw DomainError("log-power gauge exponent must be positive");
    Gauge g;
    g.form_ = Form::log_power;
    g.param_ = p;
    g.description_ = "(-log y)^-" + std::to_string(p);
    return g;
}

Gauge Gauge::log_power_family(int n) {
    if (n < 1) throw DomainError("log-power family index must be >= 1");
    return log_power(1.0 + 2.0 / (2.0 * n + 1.0));
}

Gauge Gauge::table(std::vector<double> y, std::vector<double> phi) {
    if (y.size() != phi.size() || y.empty()) {
        throw DomainError("gauge table needs matching nonempty knot lists");
    }
    Gauge g;
    g.form_ = Form::table;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0) || (i > 0 && !(y[i] > y[i - 1]))) {
            throw DomainError("gauge table abscissae must be positive and increasing");
        }
        if (!(phi[i] > 0.0)) throw DomainError("gauge table values must be positive");
        g.log_y_.push_back(std::log(y[i]));
    }
    g.phi_ = std::move(phi);
    g.description_ = "table(" + std::to_string(y.size()) + " knots)";
    return g;
}

double Gauge::from_log(double ly) const {
    switch (form_) {
        case Form::power: return std::exp(param_ * ly);
        case Form::log_power:
            return ly < 0.0 ? std::pow(-ly, -param_) : std::numeric_limits<double>::infinity();
        case Form::table: {
            if (ly <= log_y_.front()) return phi_.front() * std::exp(ly - log_y_.front());
            if (ly >= log_y_.back()) return phi_.back();
            const auto it = std::upper_bound(log_y_.begin(), log_y_.end(), ly);
            const std::size_t j = static_cast<std::size_t>(it - log_y_.begin());
            const double w = (ly - log_y_[j - 1]) / (log_y_[j] - log_y_[j - 1]);
            return phi_[j - 1] + w * (phi_[j] - phi_[j - 1]);
        }
    }
    return 0.0;
}

double Gauge::operator()(double y) const {
    if (!(y > 0.0)) throw DomainError("gauge argument must be positive");
    return from_log(std::log(y));
}

void Gauge::validate(double y_max) const {
    if (!(y_max > 0.0)) throw DomainError("gauge probe range must be positive");
    constexpr int n = 2000;
    const double lo = std::log(1e-300), hi = std::log(y_max);
    double prev = from_log(lo);
    if (!(prev >= 0.0)) throw DomainError("gauge " + description_ + " is negative near 0");
    for (int i = 1; i <= n; ++i) {
        const double ly = lo + (hi - lo) * i / n;
        const double v = from_log(ly);
        if (v < prev * (1.0 - 1e-14)) {
            throw DomainError("gauge " + description_ + " is not increasing near y = " +
                              std::to_string(std::exp(ly)));
        }
        prev = v;
    }
    // phi(0+) = 0 cannot be proven on a grid; require a clear decrease toward 0.
    if (!(from_log(lo) <= 0.5 * from_log(std::min(hi, std::log(1e-3))))) {
        throw DomainError("gauge " + description_ + " does not tend to 0 at 0+");
    }
}

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
}

struct TailIntegral {
    double value = 0.0;
    double last_increment = 0.0;
    double ratio = 0.0;
    int doublings = 0;
    bool converged = false;
    bool divergent = false;
};

// Integral of phi(exp(log_a + x log_nu)) over [x0, inf) on the blocks
// [x0 2^j, x0 2^{j+1}], with a geometric extrapolation of the remaining blocks.
TailIntegral tail_integral(const Gauge& g, double log_a, double log_nu, double x0) {
    TailIntegral r;
    auto f = [&](double x) { return g.from_log(log_a + x * log_nu); };
    double prev = std::numeric_limits<double>::quiet_NaN();
    int flat_run = 0;
    double X = x0;
    for (int j = 0; j < 1000; ++j) {
        const double inc = integrate(f, X, 2.0 * X);
        r.value += inc;
        r.last_increment = inc;
        r.doublings = j + 1;
        X *= 2.0;
        if (inc == 0.0) {
            r.ratio = 0.0;
            r.converged = true;
            return r;
        }
        if (j > 0) {
            r.ratio = inc / prev;
            flat_run = r.ratio >= 0.99 ? flat_run + 1 : 0;
            if (r.ratio < 0.99 && j >= 2) {
                const double tail = inc * r.ratio / (1.0 - r.ratio);
                if (tail < 1e-10 && inc < 1e-10) {
                    r.value += tail;
                    r.converged = true;
                    return r;
                }
            }
            if (j >= 40 && flat_run >= 10) {
                r.divergent = true;
                return r;
            }
        }
        prev = inc;
    }
    return r;
}

}  // namespace

AdmissibilityReport gauge_admissible(const Gauge& gauge, double a, double nu) {
    if (!(a > 0.0)) throw DomainError("admissibility needs a > 0");
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("admissibility needs nu in (0,1)");
    gauge.validate(a * nu);
    const auto t = tail_integral(gauge, std::log(a), std::log(nu), 1.0);
    AdmissibilityReport r;
    r.admissible = t.converged;
    r.integral = t.value;
    r.last_increment = t.last_increment;
    r.increment_ratio = t.ratio;
    r.doublings = t.doublings;
    return r;
}

ProductBounds product_bounds(const Gauge& gauge, double nu, double diameter) {
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("product bounds need nu in (0,1)");
    if (!(diameter > 0.0)) throw DomainError("product bounds need a positive diameter");
    const double log_v = std::log(diameter), log_nu = std::log(nu);
    const double phi0 = gauge.from_log(log_v);
    if (!(phi0 < 1.0)) throw DomainError("phi(|V|) >= 1: the lower product vanishes");

    double su = 0.0, sl = 0.0;
    std::size_t i = 0;
    double phi = phi0;
    constexpr std::size_t max_terms = 1'000'000;
    for (; i < max_terms; ++i) {
        phi = gauge.from_log(log_v + static_cast<double>(i) * log_nu);
        su += std::log1p(phi);
        sl += std::log1p(-phi);
        if (phi < 1e-17) break;
    }
    ProductBounds b;
    double tail = 0.0;
    if (i == max_terms) {
        // Slowly decaying gauge: remaining terms by the midpoint-rule integral.
        const auto t = tail_integral(gauge, log_v, log_nu, static_cast<double>(i) + 0.5);
        tail = t.value;
        b.tail_error = phi - gauge.from_log(log_v + static_cast<double>(i + 1) * log_nu);
    } else {
        b.tail_error = phi * nu / (1.0 - nu);
    }
    b.upper = std::exp(su + tail);
    b.lower = std::exp(sl - tail);
    return b;
}

namespace {

bool covers(std::vector<MultiIndex>::const_iterator first,
            std::vector<MultiIndex>::const_iterator last, const MultiIndex& prefix, int k) {
    if (first == last) return false;
    if (first->size() == prefix.size()) return std::next(first) == last;  // sorted: prefix first
    for (int d = 1; d <= k; ++d) {
        const auto child = prefix.child(static_cast<std::uint8_t>(d));
        auto lo = std::find_if(first, last, [&](const MultiIndex& m) { return m.has_prefix(child); });
        auto hi = std::find_if(lo, last, [&](const MultiIndex& m) { return !m.has_prefix(child); });
        if (!covers(lo, hi, child, k)) return false;
        first = hi;
    }
    return first == last;
}

}  // namespace

bool is_simple_family(const SimpleFamily& family) {
    if (family.k < 1) return false;
    for (const auto& m : family.members) {
        if (m.empty()) return family.members.size() == 1;
        for (auto d : m.digits())
            if (d < 1 || d > family.k) return false;
    }
    auto sorted = family.members;
    std::sort(sorted.begin(), sorted.end());
    return covers(sorted.begin(), sorted.end(), MultiIndex{}, family.k);
}

SimpleFamily enumerate_simple_family(const TriangleSystem& sys, double threshold) {
    const double top = sys.base().diameter();
    if (!(threshold > 0.0 && threshold < top)) {
        throw DomainError("simple-family threshold must lie in (0, |Delta|)");
    }
    SimpleFamily fam;
    fam.k = sys.branching();
    const double cut = threshold * (1.0 + 1e-12);
    std::function<void(const MultiIndex&)> walk = [&](const MultiIndex& I) {
        for (int d = 1; d <= fam.k; ++d) {
            const auto child = I.child(static_cast<std::uint8_t>(d));
            if (sys.cell(child).diameter() <= cut) {
                fam.members.push_back(child);
            } else if (static_cast<int>(child.size()) == sys.depth()) {
                throw DomainError("system depth exhausted on branch " + child.to_string() +
                                  " before reaching the threshold");
            } else {
                walk(child);
            }
        }
    };
    if (sys.depth() < 1) throw DomainError("system depth exhausted at the root");
    walk(MultiIndex{});
    return fam;
}

SimpleFamily ratio_threshold_family(std::span<const double> ratios, double threshold) {
    if (ratios.empty()) throw DomainError("ratio list is empty");
    for (double l : ratios)
        if (!(l > 0.0 && l < 1.0)) throw DomainError("ratio outside (0,1)");
    if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("threshold must lie in (0,1)");
    SimpleFamily fam;
    fam.k = static_cast<int>(ratios.size());
    const double cut = threshold * (1.0 + 1e-12);
    std::function<void(const MultiIndex&, double)> walk = [&](const MultiIndex& I, double lam) {
        for (int d = 1; d <= fam.k; ++d) {
            const double l = lam * ratios[static_cast<std::size_t>(d - 1)];
            const auto child = I.child(static_cast<std::uint8_t>(d));
            if (l <= cut) {
                fam.members.push_back(child);
                if (fam.members.size() > 10'000'000) {
                    throw CapacityError("simple family exceeds 10^7 members");
                }
            } else {
                walk(child, l);
            }
        }
    };
    walk(MultiIndex{}, 1.0);
    return fam;
}

double simple_family_sum(const SimpleFamily& family, std::span<const double> ratios, double s) {
    double sum = 0.0;
    for (const auto& m : family.members) {
        double log_l = 0.0;
        for (auto d : m.digits()) {
            if (d < 1 || d > ratios.size()) throw DomainError("family digit outside the ratio list");
            log_l += std::log(ratios[d - 1u]);
        }
        sum += std::exp(s * log_l);
    }
    return sum;
}

double hausdorff_upper_sum(const TriangleSystem& sys, double s, int n) {
    if (n < 0 || n > sys.depth()) throw DomainError("level outside the system depth");
    double sum = 0.0;
    for (const auto& c : sys.level(n)) sum += std::pow(c.diameter(), s);
    return sum;
}

namespace {

struct Fit {
    double slope = 0.0, intercept = 0.0, stderr_ = 0.0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Fit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ssr += r * r;
    }
    f.stderr_ = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return f;
}

}  // namespace

BoxDimensionReport box_dimension_estimate(const TriangleSystem& sys, int n1, int n2) {
    if (n1 < 0 || n2 > sys.depth() || n1 > n2) {
        throw DomainError("levels [" + std::to_string(n1) + ", " + std::to_string(n2) +
                          "] are outside the system depth " + std::to_string(sys.depth()));
    }
    if (n2 - n1 < 3) throw DomainError("box-dimension regression needs at least 4 levels");

    BoxDimensionReport rep;
    rep.moran_s = solve_moran(sys.ratios()).s;
    for (int n = n1; n <= n2; ++n) {
        std::vector<double> diams;
        diams.reserve(sys.level(n).size());
        for (const auto& c : sys.level(n)) diams.push_back(c.diameter());
        const double eps = *std::max_element(diams.begin(), diams.end());
        const auto rec = box_count(diams, eps);
        BoxLevel lv;
        lv.level = n;
        lv.epsilon = rec.epsilon;
        lv.count = rec.count;
        lv.upper_sum = hausdorff_upper_sum(sys, rep.moran_s, n);
        rep.levels.push_back(lv);
    }

    auto fit_used = [&] {
        std::vector<double> x, y;
        for (const auto& lv : rep.levels) {
            if (!lv.used) continue;
            x.push_back(-std::log(lv.epsilon));
            y.push_back(std::log(static_cast<double>(lv.count)));
        }
        const auto f = least_squares(x, y);
        rep.slope = f.slope;
        rep.intercept = f.intercept;
        rep.slope_stderr = f.stderr_;
        for (auto& lv : rep.levels) {
            lv.residual = std::log(static_cast<double>(lv.count)) -
                          (f.intercept + f.slope * -std::log(lv.epsilon));
        }
    };
    fit_used();

    std::vector<double> abs_res;
    for (const auto& lv : rep.levels) abs_res.push_back(std::abs(lv.residual));
    std::nth_element(abs_res.begin(), abs_res.begin() + abs_res.size() / 2, abs_res.end());
    const double median = abs_res[abs_res.size() / 2];
    const double coarse = std::abs(rep.levels.front().residual);
    if (coarse > 3.0 * median && coarse > 1e-9) {
        rep.levels.front().used = false;
        rep.discarded_coarsest = true;
        fit_used();
    }
    return rep;
}

void write_box_csv(std::ostream& out, const BoxDimensionReport& report) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << "level,epsilon,count,upper_sum,used\n" << std::setprecision(17);
    for (const auto& lv : report.levels) {
        out << lv.level << ',' << lv.epsilon << ',' << lv.count << ',' << lv.upper_sum << ','
            << (lv.used ? 1 : 0) << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

}  // namespace geogasket
