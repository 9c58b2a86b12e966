#include "geogasket/surface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "geogasket/errors.hpp"

namespace geogasket {

std::string to_string(SurfaceKind kind) {
    switch (kind) {
        case SurfaceKind::euclidean: return "euclidean";
        case SurfaceKind::sphere_unit: return "sphere_unit";
        case SurfaceKind::hyperbolic_poincare: return "hyperbolic_poincare";
        case SurfaceKind::custom: return "custom";
    }
    return "custom";
}

SurfaceKind surface_kind_from_string(const std::string& name) {
    if (name == "euclidean") return SurfaceKind::euclidean;
    if (name == "sphere_unit") return SurfaceKind::sphere_unit;
    if (name == "hyperbolic_poincare") return SurfaceKind::hyperbolic_poincare;
    if (name == "custom") return SurfaceKind::custom;
    throw DomainError("unknown surface kind '" + name + "'");
}

struct Surface::Impl {
    SurfaceKind kind = SurfaceKind::custom;
    ChartRect chart;
    GeodesicOptions options;

    virtual ~Impl() = default;
    virtual std::unique_ptr<Impl> clone() const = 0;
    virtual bool contains(const SurfacePoint& p) const { return chart.contains(p); }
    virtual MetricTensor metric(const SurfacePoint& p) const = 0;
    virtual Christoffel christoffel(const SurfacePoint& p) const = 0;
    virtual double curvature(const SurfacePoint& p) const = 0;
};

namespace {

struct FlatImpl final : Surface::Impl {
    FlatImpl() {
        kind = SurfaceKind::euclidean;
        chart = {-1e3, 1e3, -1e3, 1e3};
    }
    std::unique_ptr<Impl> clone() const override { return std::make_unique<FlatImpl>(*this); }
    MetricTensor metric(const SurfacePoint&) const override { return {}; }
    Christoffel christoffel(const SurfacePoint&) const override { return {}; }
    double curvature(const SurfacePoint&) const override { return 0.0; }
};

// Metric e^{2 sigma} (du^2 + dv^2); only grad sigma is needed for the symbols.
Christoffel conformal_christoffel(double su, double sv) {
    Christoffel c;
    c.u_uu = su;
    c.u_uv = sv;
    c.u_vv = -su;
    c.v_uu = -sv;
    c.v_uv = su;
    c.v_vv = sv;
    return c;
}

struct StereoSphereImpl final : Surface::Impl {
    StereoSphereImpl() {
        kind = SurfaceKind::sphere_unit;
        chart = {-4.0, 4.0, -4.0, 4.0};
    }
    std::unique_ptr<Impl> clone() const override {
        return std::make_unique<StereoSphereImpl>(*this);
    }
    MetricTensor metric(const SurfacePoint& p) const override {
        const double rho = 2.0 / (1.0 + p.u * p.u + p.v * p.v);
        return {rho * rho, 0.0, rho * rho};
    }
    Christoffel christoffel(const SurfacePoint& p) const override {
        const double q = 1.0 + p.u * p.u + p.v * p.v;
        return conformal_christoffel(-2.0 * p.u / q, -2.0 * p.v / q);
    }
    double curvature(const SurfacePoint&) const override { return 1.0; }
};

struct PoincareImpl final : Surface::Impl {
    PoincareImpl() {
        kind = SurfaceKind::hyperbolic_poincare;
        chart = {-1.0, 1.0, -1.0, 1.0};
    }
    std::unique_ptr<Impl> clone() const override { return std::make_unique<PoincareImpl>(*this); }
    bool contains(const SurfacePoint& p) const override {
        return chart.contains(p) && p.u * p.u + p.v * p.v < 1.0;
    }
    MetricTensor metric(const SurfacePoint& p) const override {
        const double rho = 2.0 / (1.0 - p.u * p.u - p.v * p.v);
        return {rho * rho, 0.0, rho * rho};
    }
    Christoffel christoffel(const SurfacePoint& p) const override {
        const double q = 1.0 - p.u * p.u - p.v * p.v;
        return conformal_christoffel(2.0 * p.u / q, 2.0 * p.v / q);
    }
    double curvature(const SurfacePoint&) const override { return -1.0; }
};

struct CustomImpl final : Surface::Impl {
    Expression E, F, G;
    static constexpr double kStep = 1e-6;
    static constexpr double kCurvatureStep = 1e-4;

    CustomImpl(const ChartRect& rect, Expression e, Expression f, Expression g)
        : E(std::move(e)), F(std::move(f)), G(std::move(g)) {
        kind = SurfaceKind::custom;
        chart = rect;
    }
    std::unique_ptr<Impl> clone() const override { return std::make_unique<CustomImpl>(*this); }

    bool contains(const SurfacePoint& p) const override {
        if (!chart.contains(p)) return false;
        const auto m = metric(p);
        return m.E > 0.0 && m.det() > 0.0;
    }
    MetricTensor metric(const SurfacePoint& p) const override {
        return {E(p.u, p.v), F(p.u, p.v), G(p.u, p.v)};
    }
    Christoffel christoffel(const SurfacePoint& p) const override {
        const double h = kStep;
        auto du = [&](const Expression& x) { return (x(p.u + h, p.v) - x(p.u - h, p.v)) / (2 * h); };
        auto dv = [&](const Expression& x) { return (x(p.u, p.v + h) - x(p.u, p.v - h)) / (2 * h); };
        const auto m = metric(p);
        const double Eu = du(E), Ev = dv(E), Fu = du(F), Fv = dv(F), Gu = du(G), Gv = dv(G);
        const double w2 = 2.0 * m.det();
        Christoffel c;
        c.u_uu = (m.G * Eu - 2.0 * m.F * Fu + m.F * Ev) / w2;
        c.v_uu = (2.0 * m.E * Fu - m.E * Ev - m.F * Eu) / w2;
        c.u_uv = (m.G * Ev - m.F * Gu) / w2;
        c.v_uv = (m.E * Gu - m.F * Ev) / w2;
        c.u_vv = (2.0 * m.G * Fv - m.G * Gu - m.F * Gv) / w2;
        c.v_vv = (m.E * Gv - 2.0 * m.F * Fv + m.F * Gu) / w2;
        return c;
    }
    // Gauss equation in terms of the Christoffel symbols.
    double curvature(const SurfacePoint& p) const override {
        const double h = kCurvatureStep;
        const auto c = christoffel(p);
        const double dv_vuu =
            (christoffel({p.u, p.v + h}).v_uu - christoffel({p.u, p.v - h}).v_uu) / (2 * h);
        const double du_vuv =
            (christoffel({p.u + h, p.v}).v_uv - christoffel({p.u - h, p.v}).v_uv) / (2 * h);
        const double r = dv_vuu - du_vuv + c.u_uu * c.v_uv - c.u_uv * c.v_uu + c.v_uu * c.v_vv -
                         c.v_uv * c.v_uv;
        return r / metric(p).E;
    }
};

using State = std::array<double, 4>;

State geodesic_rhs(const Surface::Impl& s, const State& y) {
    const auto c = s.christoffel({y[0], y[1]});
    const double du = y[2], dv = y[3];
    return {du, dv,
            -(c.u_uu * du * du + 2.0 * c.u_uv * du * dv + c.u_vv * dv * dv),
            -(c.v_uu * du * du + 2.0 * c.v_uv * du * dv + c.v_vv * dv * dv)};
}

bool finite_state(const State& y) {
    return std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x); });
}

// Dormand-Prince 5(4) with FSAL and the standard max-norm error control.
GeodesicState integrate(const Surface::Impl& s, const SurfacePoint& p, const TangentVector& w,
                        double t_end) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                     e5 = b5 - (-92097.0 / 339200), e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;

    State y{p.u, p.v, w.u, w.v};
    if (t_end == 0.0) return {p, w};

    const auto& opt = s.options;
    const double direction = t_end > 0 ? 1.0 : -1.0;
    const double span = std::abs(t_end);
    double t = 0.0;
    double h = span;
    State k1 = geodesic_rhs(s, y);
    int steps = 0;

    while (t < span) {
        if (++steps > opt.max_steps) throw ConvergenceError("geodesic integration exceeded step budget", span - t);
        h = std::min(h, span - t);
        const double hs = h * direction;
        auto stage = [&](std::initializer_list<std::pair<double, const State*>> terms) {
            State out = y;
            for (const auto& [a, k] : terms)
                for (int i = 0; i < 4; ++i) out[i] += hs * a * (*k)[i];
            return out;
        };
        const State k2 = geodesic_rhs(s, stage({{a21, &k1}}));
        const State k3 = geodesic_rhs(s, stage({{a31, &k1}, {a32, &k2}}));
        const State k4 = geodesic_rhs(s, stage({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 = geodesic_rhs(s, stage({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 =
            geodesic_rhs(s, stage({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State y_new = stage({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const State k7 = geodesic_rhs(s, y_new);

        double err = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        const bool ok = finite_state(y_new) && finite_state(k7) && std::isfinite(err) &&
                        s.contains({y_new[0], y_new[1]});
        if (ok && err <= 1.0) {
            t += h;
            y = y_new;
            k1 = k7;
            const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= grow;
        } else if (!ok && err <= 1.0 && finite_state(y_new) && !s.contains({y_new[0], y_new[1]})) {
            // Accurate step that lands outside the chart: the curve really exits.
            throw EscapeError("geodesic left the chart domain", direction * (t + h));
        } else {
            h *= std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5) : 0.25;
            if (h < 1e-14 * span) throw EscapeError("geodesic left the chart domain", direction * t);
        }
    }
    return {{y[0], y[1]}, {y[2], y[3]}};
}

// 2x2 solve; returns false when singular.
bool solve2(const std::array<double, 4>& J, const Vec2& rhs, Vec2& out) {
    const double det = J[0] * J[3] - J[1] * J[2];
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
    out = {(J[3] * rhs.u - J[1] * rhs.v) / det, (-J[2] * rhs.u + J[0] * rhs.v) / det};
    return true;
}

}  // namespace

Surface Surface::euclidean() { return Surface(std::make_shared<FlatImpl>()); }
Surface Surface::sphere_unit() { return Surface(std::make_shared<StereoSphereImpl>()); }
Surface Surface::hyperbolic_poincare() { return Surface(std::make_shared<PoincareImpl>()); }

Surface Surface::custom(const ChartRect& chart, Expression E, Expression F, Expression G,
                        int sample_grid) {
    if (!(chart.u_min < chart.u_max && chart.v_min < chart.v_max)) {
        throw DomainError("custom chart rectangle is empty");
    }
    auto impl = std::make_shared<CustomImpl>(chart, std::move(E), std::move(F), std::move(G));
    Surface s(impl);
    const int n = std::max(sample_grid, 2);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            const SurfacePoint p{chart.u_min + (chart.u_max - chart.u_min) * i / (n + 1),
                                 chart.v_min + (chart.v_max - chart.v_min) * j / (n + 1)};
            const auto m = impl->metric(p);
            if (!(m.E > 0.0 && m.det() > 0.0)) {
                throw DomainError("custom metric is not positive definite at (" +
                                  std::to_string(p.u) + ", " + std::to_string(p.v) + ")");
            }
        }
    }
    const double kmax = s.max_abs_curvature(n);
    if (!(kmax <= 1.0 + 1e-4)) {  // slack for finite-difference noise
        throw DomainError("custom metric violates |K| <= 1 on the chart (max |K| = " +
                          std::to_string(kmax) + ")");
    }
    return s;
}

SurfaceKind Surface::kind() const { return impl_->kind; }
const ChartRect& Surface::chart() const { return impl_->chart; }
bool Surface::contains(const SurfacePoint& p) const { return impl_->contains(p); }
MetricTensor Surface::metric(const SurfacePoint& p) const { return impl_->metric(p); }
Christoffel Surface::christoffel(const SurfacePoint& p) const { return impl_->christoffel(p); }
double Surface::curvature(const SurfacePoint& p) const { return impl_->curvature(p); }
const GeodesicOptions& Surface::options() const { return impl_->options; }

Surface Surface::with_options(const GeodesicOptions& opts) const {
    auto copy = impl_->clone();
    copy->options = opts;
    return Surface(std::shared_ptr<const Impl>(std::move(copy)));
}

double Surface::inner(const SurfacePoint& p, const TangentVector& a, const TangentVector& b) const {
    const auto m = metric(p);
    return m.E * a.u * b.u + m.F * (a.u * b.v + a.v * b.u) + m.G * a.v * b.v;
}

double Surface::norm(const SurfacePoint& p, const TangentVector& a) const {
    return std::sqrt(std::max(0.0, inner(p, a, a)));
}

double Surface::angle(const SurfacePoint& p, const TangentVector& a, const TangentVector& b) const {
    // atan2 form keeps accuracy near 0 and pi.
    const auto m = metric(p);
    const double c = inner(p, a, b);
    const double s = std::sqrt(m.det()) * std::abs(cross(a, b));
    return std::atan2(s, c);
}

double Surface::convexity_guard() const {
    return kind() == SurfaceKind::euclidean ? std::numeric_limits<double>::infinity() : 0.4;
}

double Surface::max_abs_curvature(int n) const {
    const auto& c = chart();
    // Unbounded flat chart: the value is exact anyway.
    if (kind() == SurfaceKind::euclidean) return 0.0;
    double kmax = 0.0;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            const SurfacePoint p{c.u_min + (c.u_max - c.u_min) * i / (n + 1),
                                 c.v_min + (c.v_max - c.v_min) * j / (n + 1)};
            if (!contains(p)) continue;
            kmax = std::max(kmax, std::abs(curvature(p)));
        }
    }
    return kmax;
}

GeodesicState Surface::exp_state(const SurfacePoint& p, const TangentVector& w, double t) const {
    if (!contains(p)) throw DomainError("exp_map base point outside the chart domain");
    if (kind() == SurfaceKind::euclidean) {
        const SurfacePoint q = p + w * t;
        if (!contains(q)) throw EscapeError("geodesic left the chart domain", t);
        return {q, w};
    }
    return integrate(*impl_, p, w, t);
}

SurfacePoint Surface::exp_map(const SurfacePoint& p, const TangentVector& w, double t) const {
    return exp_state(p, w, t).position;
}

TangentVector Surface::log_map(const SurfacePoint& p, const SurfacePoint& q) const {
    if (!contains(p) || !contains(q)) throw DomainError("log_map point outside the chart domain");
    if (p == q) return {0.0, 0.0};
    if (kind() == SurfaceKind::euclidean) return q - p;

    const auto& opt = options();
    const double chord = geogasket::norm(q - p);
    // Stop once the endpoint matches to near round-off; fail above residual_target.
    const double stop = std::max(1e-15, 1e-13 * chord);

    TangentVector w = q - p;
    auto residual_at = [&](const TangentVector& x) { return exp_map(p, x, 1.0) - q; };

    auto fd_jacobian = [&](const TangentVector& x, const Vec2& fx) {
        const double h = 1e-7 * std::max(geogasket::norm(x), 1e-12);
        const Vec2 fu = residual_at(x + Vec2{h, 0.0});
        const Vec2 fv = residual_at(x + Vec2{0.0, h});
        return std::array<double, 4>{(fu.u - fx.u) / h, (fv.u - fx.u) / h, (fu.v - fx.v) / h,
                                     (fv.v - fx.v) / h};
    };

    Vec2 F = residual_at(w);
    double res = geogasket::norm(F);
    std::array<double, 4> J = fd_jacobian(w, F);

    for (int it = 0; it < opt.max_shooting_iterations && res > stop; ++it) {
        Vec2 step;
        if (!solve2(J, -F, step)) {
            J = fd_jacobian(w, F);
            if (!solve2(J, -F, step)) break;
        }
        // Damped update: halve the step while the trial escapes or gets worse.
        double lambda = 1.0;
        Vec2 F_new{};
        double res_new = std::numeric_limits<double>::infinity();
        TangentVector w_new = w;
        for (int d = 0; d < 30; ++d) {
            w_new = w + step * lambda;
            try {
                F_new = residual_at(w_new);
                res_new = geogasket::norm(F_new);
            } catch (const EscapeError&) {
                res_new = std::numeric_limits<double>::infinity();
            }
            if (res_new < res || res_new <= stop) break;
            lambda *= 0.5;
        }
        if (!(res_new < res)) {
            // No progress along the quasi-Newton direction; refresh the Jacobian once.
            J = fd_jacobian(w, F);
            if (!solve2(J, -F, step)) break;
            w_new = w + step;
            try {
                F_new = residual_at(w_new);
                res_new = geogasket::norm(F_new);
            } catch (const EscapeError&) {
                break;
            }
            if (!(res_new < res)) break;
        }
        const Vec2 dw = w_new - w;
        const Vec2 dF = F_new - F;
        const double dw2 = dot(dw, dw);
        if (dw2 > 0.0) {
            // Broyden rank-one update J += (dF - J dw) dw^T / |dw|^2
            const Vec2 Jdw{J[0] * dw.u + J[1] * dw.v, J[2] * dw.u + J[3] * dw.v};
            const Vec2 r = dF - Jdw;
            J[0] += r.u * dw.u / dw2;
            J[1] += r.u * dw.v / dw2;
            J[2] += r.v * dw.u / dw2;
            J[3] += r.v * dw.v / dw2;
        }
        const bool slow = res_new > 0.5 * res;
        w = w_new;
        F = F_new;
        res = res_new;
        if (slow && res <= opt.residual_target * 1e-3) break;  // at the integrator noise floor
    }
    if (!(res <= opt.residual_target)) {
        throw ConvergenceError("log_map shooting did not converge", res);
    }
    return w;
}

GeodesicSegment Surface::geodesic_between(const SurfacePoint& p, const SurfacePoint& q) const {
    if (p == q) {
        if (!contains(p)) throw DomainError("geodesic endpoint outside the chart domain");
        return {p, q, {}, {}, 0.0};
    }
    const TangentVector w = log_map(p, q);
    const GeodesicState end = exp_state(p, w, 1.0);
    return {p, q, w, end.velocity, norm(p, w)};
}

double Surface::distance(const SurfacePoint& p, const SurfacePoint& q) const {
    if (p == q) return 0.0;
    if (kind() == SurfaceKind::euclidean) return geogasket::norm(q - p);
    return norm(p, log_map(p, q));
}

SurfacePoint Surface::midpoint(const SurfacePoint& p, const SurfacePoint& q) const {
    if (kind() == SurfaceKind::euclidean) return (p + q) * 0.5;
    return exp_map(p, log_map(p, q), 0.5);
}

SurfacePoint GeodesicSegment::at(const Surface& surface, double tau) const {
    if (tau == 0.0) return start;
    if (tau == 1.0) return end;
    return surface.exp_map(start, initial_velocity, tau);
}

JacobiSample jacobi_field(const Surface& surface, const SurfaceFamily& phi, double t, double s,
                          double h) {
    if (!(h > 0.0 && h <= 1e-4)) throw DomainError("jacobi_field step must lie in (0, 1e-4]");
    if (!(s - h > 0.0 && s + h <= 1.0)) throw DomainError("jacobi_field needs s +- h inside (0,1]");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("jacobi_field needs t in [0,1]");
    const SurfacePoint plus = phi(t, s + h);
    const SurfacePoint minus = phi(t, s - h);
    const TangentVector field = (plus - minus) * (1.0 / (2.0 * h));
    return {field, surface.norm(phi(t, s), field)};
}

}  // namespace geogasket
