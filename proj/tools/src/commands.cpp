#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "geogasket/dimension.hpp"
#include "geogasket/errors.hpp"
#include "geogasket/gasket.hpp"
#include "geogasket/io.hpp"
#include "geogasket/measure.hpp"
#include "geogasket/triangle.hpp"

namespace gasket_cli {

using namespace geogasket;
using json = nlohmann::ordered_json;

namespace {

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double x, const char* format = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!out) throw InputError("write to " + path + " failed");
}

// Maps library exceptions onto the tool's exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const DegenerateTriangleError& e) {
        err << "construction failed: " << e.what() << "\n";
        return construction_error;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const std::exception& e) {
        err << "construction failed: " << e.what() << "\n";
        return construction_error;
    }
}

TriangleSystem build_system(const SceneConfig& scene, int depth) {
    const GeodesicTriangle base = build_base(scene);
    BuildOptions opts;
    opts.delta = scene.delta;
    opts.branching = scene.branching;
    TriangleSystem sys = TriangleSystem::build(base, depth, opts);
    if (scene.gauge_constant) {
        sys.set_gauge_constant(*scene.gauge_constant);
    } else if (depth >= 1) {
        sys.set_gauge_constant(calibrate_gauge(sys, scene.audit_samples, scene.seed));
    } else {
        sys.set_gauge_constant(0.0);
    }
    return sys;
}

struct Loaded {
    SystemFile file;
    TriangleSystem sys;
};

// Rebuilds the system from the scene stored in the file and checks that the
// stored finest cells agree with the rebuild.
Loaded load_system(const std::string& path, std::optional<std::uint64_t> seed) {
    SystemFile file = parse_system(read_file(path));
    if (seed) file.scene.seed = *seed;
    file.scene.depth = file.depth;
    file.scene.branching = file.branching;
    if (file.gauge_constant && !file.scene.gauge_constant) file.scene.gauge_constant = file.gauge_constant;
    TriangleSystem sys = build_system(file.scene, file.depth);

    const auto& finest = sys.level(sys.depth());
    if (finest.size() != file.cells.size()) {
        throw InputError("system file lists " + std::to_string(file.cells.size()) +
                         " cells, its scene gives " + std::to_string(finest.size()));
    }
    const double tol = 1e-10 * std::max(1.0, sys.base().diameter());
    for (const auto& rec : file.cells) {
        if (rec.index.size() != static_cast<std::size_t>(sys.depth())) {
            throw InputError("cell " + rec.index.to_string() + " is not on the finest level");
        }
        const auto& cell = sys.cell(rec.index);
        for (int i = 0; i < 3; ++i) {
            if (norm(cell.vertex(i) - rec.vertices[static_cast<std::size_t>(i)]) > tol) {
                throw InputError("cell " + rec.index.to_string() +
                                 " does not match the rebuild from its scene");
            }
        }
    }
    return {std::move(file), std::move(sys)};
}

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
    json measured;
};

std::optional<std::pair<int, int>> parse_levels(const std::string& text) {
    static const std::regex re(R"(^\s*(\d+)\s*(?:\.\.|-|:)\s*(\d+)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) return std::nullopt;
    return std::make_pair(std::stoi(m[1]), std::stoi(m[2]));
}

}  // namespace

int cmd_moran(const std::vector<std::string>& ratios, std::ostream& out, std::ostream& err) {
    std::vector<double> lambdas;
    for (const auto& r : ratios) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(r, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != r.size() || !(x > 0.0 && x < 1.0)) {
            err << "error: ratio '" << r << "' is not a decimal in (0,1)\n";
            return input_error;
        }
        lambdas.push_back(x);
    }
    return guarded(err, [&] {
        const auto sol = solve_moran(lambdas);
        out << num(sol.s, "%.15f") << "\n";
        out << "residual " << num(sol.residual, "%.3e") << "\n";
        return static_cast<int>(ok);
    });
}

int cmd_build(const BuildArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        SceneConfig scene = parse_scene(read_file(args.scene));
        if (args.depth) {
            if (*args.depth < 0 || *args.depth > 14) throw InputError("depth must lie in 0..14");
            scene.depth = *args.depth;
        }
        if (args.seed) scene.seed = *args.seed;
        const TriangleSystem sys = build_system(scene, scene.depth);
        const auto audits = audit_levels(sys, std::min(scene.audit_levels, sys.depth()),
                                         scene.audit_samples, scene.seed);
        const auto passed = static_cast<std::size_t>(
            std::count_if(audits.begin(), audits.end(), [](const SimilarityAudit& a) { return a.pass; }));

        const std::string doc = system_to_json(sys, scene);
        std::ostream& summary = args.out.empty() ? err : out;
        if (args.out.empty()) {
            out << doc;
        } else {
            write_file(args.out, doc);
        }
        summary << "cells " << sys.level(sys.depth()).size() << " at depth " << sys.depth() << " ("
                << sys.cell_count() << " total)\n";
        summary << "diameter " << num(sys.base().diameter()) << "\n";
        summary << "nu " << num(sys.nu()) << "\n";
        summary << "gauge c " << num(sys.gauge_constant()) << "\n";
        summary << "similarity audits " << passed << "/" << audits.size() << " pass\n";
        return static_cast<int>(ok);
    });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded loaded = load_system(args.system, args.seed);
        const SceneConfig& scene = loaded.file.scene;
        const TriangleSystem& sys = loaded.sys;
        std::vector<Check> checks;

        {
            const auto r = check_nesting(sys, 300);
            checks.push_back({"nesting", r.violations == 0,
                              "checked=" + std::to_string(r.checked) +
                                  " violations=" + std::to_string(r.violations) +
                                  " max_residual=" + num(r.max_residual, "%.3e"),
                              {{"checked", r.checked}, {"violations", r.violations},
                               {"max_residual", r.max_residual}, {"failing", r.failing}}});
        }
        {
            const auto r = check_contraction(sys);
            checks.push_back({"contraction", r.pass,
                              "nu=" + num(r.nu, "%.6f") + " max_step_ratio=" + num(r.max_step_ratio, "%.6f") +
                                  " max_level_ratio=" + num(r.max_level_ratio, "%.6f"),
                              {{"nu", r.nu}, {"max_step_ratio", r.max_step_ratio},
                               {"max_level_ratio", r.max_level_ratio}, {"violations", r.violations}}});
        }
        {
            double delta = 0.0;
            if (scene.delta) {
                delta = *scene.delta;
            } else {
                const auto ang = planar_comparison_angles(sys.base().side_lengths());
                delta = (1.0 - 1e-9) * std::min({ang.alpha[0], ang.alpha[1], ang.alpha[2]});
            }
            const auto r = nondegeneracy_sweep(sys, delta);
            checks.push_back({"nondegeneracy", r.failures == 0,
                              "delta=" + num(delta, "%.6f") + " min_angle=" + num(r.min_angle, "%.6f") +
                                  " max_angle=" + num(r.max_angle, "%.6f") +
                                  " failures=" + std::to_string(r.failures),
                              {{"delta", delta}, {"min_angle", r.min_angle}, {"max_angle", r.max_angle},
                               {"checked", r.checked}, {"failures", r.failures}, {"failing", r.failing}}});
        }
        {
            const auto audits = audit_levels(sys, std::min(scene.audit_levels, sys.depth()),
                                             scene.audit_samples, scene.seed);
            std::size_t fails = 0;
            double worst = 0.0;
            std::vector<std::string> failing;
            for (const auto& a : audits) {
                if (!a.pass) {
                    ++fails;
                    failing.push_back(a.index.to_string());
                }
                if (a.envelope > 0.0) worst = std::max(worst, a.max_ratio_deviation / a.envelope);
            }
            checks.push_back({"similarity", fails == 0,
                              "c=" + num(sys.gauge_constant(), "%.6g") + " audits=" +
                                  std::to_string(audits.size()) + " failures=" + std::to_string(fails) +
                                  " max_deviation_over_envelope=" + num(worst, "%.4f"),
                              {{"c", sys.gauge_constant()}, {"audits", audits.size()},
                               {"failures", fails}, {"max_deviation_over_envelope", worst},
                               {"failing", failing}}});
        }
        {
            const auto r = check_ratio_products(sys);
            checks.push_back({"ratio_products", r.violations == 0,
                              "L=" + num(r.L, "%.6f") + " max_drift=" + num(r.max_drift, "%.6f") +
                                  " violations=" + std::to_string(r.violations),
                              {{"L", std::isfinite(r.L) ? json(r.L) : json(nullptr)},
                               {"max_drift", r.max_drift}, {"violations", r.violations},
                               {"failing", r.failing}}});
        }
        {
            const double D = scene.moran_band / sys.base().diameter();
            const auto r = controlled_moran_check(sys, D);
            checks.push_back({"controlled_moran", r.pass,
                              "D=" + num(r.D, "%.6f") + " min_ratio=" + num(r.min_ratio, "%.6f") +
                                  " max_ratio=" + num(r.max_ratio, "%.6f") +
                                  " pairs=" + std::to_string(r.pairs) +
                                  " small_level=" + std::to_string(r.small_level),
                              {{"D", r.D}, {"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio},
                               {"pairs", r.pairs}, {"small_level", r.small_level}}});
        }

        json failures = json::array();
        json report;
        report["system"] = args.system;
        report["depth"] = sys.depth();
        report["diameter"] = sys.base().diameter();
        json list = json::array();
        for (const auto& c : checks) {
            out << (c.pass ? "PASS " : "FAIL ") << c.name << " " << c.detail << "\n";
            if (!c.pass) failures.push_back(c.name);
            list.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}});
        }
        report["checks"] = list;
        report["failures"] = failures;
        out << "failures " << failures.dump() << "\n";
        if (!args.report.empty()) write_file(args.report, report.dump(2) + "\n");
        return static_cast<int>(failures.empty() ? ok : certification_failure);
    });
}

int cmd_dim(const DimArgs& args, std::ostream& out, std::ostream& err) {
    const auto levels = parse_levels(args.levels);
    if (!levels) {
        err << "error: --levels must look like n1..n2\n";
        return input_error;
    }
    return guarded(err, [&] {
        const Loaded loaded = load_system(args.system, std::nullopt);
        const TriangleSystem& sys = loaded.sys;
        const auto [n1, n2] = *levels;
        const auto rep = box_dimension_estimate(sys, n1, n2);
        const double target = std::log(3.0) / std::log(2.0);

        if (!args.csv.empty()) {
            std::ostringstream csv;
            write_box_csv(csv, rep);
            write_file(args.csv, csv.str());
        }
        if (!args.svg.empty()) {
            std::ostringstream svg;
            write_svg(svg, sys, n2);
            write_file(args.svg, svg.str());
        }
        out << "slope " << num(rep.slope, "%.15f") << "\n";
        out << "slope_stderr " << num(rep.slope_stderr, "%.3e") << "\n";
        out << "deviation_from_log3_log2 " << num(rep.slope - target, "%.3e") << "\n";
        out << "moran_s " << num(rep.moran_s, "%.15f") << "\n";
        out << "levels " << n1 << ".." << n2
            << (rep.discarded_coarsest ? " (coarsest level discarded)" : "") << "\n";

        if (!args.report.empty()) {
            json rows = json::array();
            for (const auto& lv : rep.levels) {
                rows.push_back({{"level", lv.level}, {"epsilon", lv.epsilon}, {"count", lv.count},
                                {"upper_sum", lv.upper_sum}, {"residual", lv.residual}, {"used", lv.used}});
            }
            json j;
            j["slope"] = rep.slope;
            j["intercept"] = rep.intercept;
            j["slope_stderr"] = rep.slope_stderr;
            j["band"] = {rep.slope - 2.0 * rep.slope_stderr, rep.slope + 2.0 * rep.slope_stderr};
            j["moran_s"] = rep.moran_s;
            j["discarded_coarsest"] = rep.discarded_coarsest;
            j["levels"] = rows;
            write_file(args.report, j.dump(2) + "\n");
        }
        return static_cast<int>(ok);
    });
}

int cmd_measure(const MeasureArgs& args, std::ostream& out, std::ostream& err) {
    std::vector<double> weights(args.weights);
    if (weights.empty()) weights.assign(3, 1.0 / 3.0);
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) {
            err << "error: weights must be positive\n";
            return input_error;
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        err << "error: weights must sum to 1 (got " << num(sum, "%.9g") << ")\n";
        return input_error;
    }
    for (auto& w : weights) w /= sum;

    return guarded(err, [&] {
        const Loaded loaded = load_system(args.system, std::nullopt);
        const TriangleSystem& sys = loaded.sys;
        if (weights.size() > 3) throw InputError("at most 3 weights (one per corner map)");
        FixpointOptions opts;
        opts.atom_budget = args.budget;
        const DiscreteMeasure seed = default_seed(sys);
        const auto res = pushforward_fixpoint(sys, weights, args.iters, seed, opts);

        json trace = json::array();
        if (args.iters == 0) {
            for (const auto& a : seed.atoms()) {
                out << "seed atom (" << num(a.point.u) << ", " << num(a.point.v) << ") weight "
                    << num(a.weight) << "\n";
            }
        }
        for (std::size_t m = 0; m < res.trace.size(); ++m) {
            const auto& k = res.trace[m];
            out << "iter " << (m + 1) << " kr " << num(k.value, "%.10e")
                << (k.exact ? " exact" : " bounds [" + num(k.lower, "%.4e") + ", " + num(k.upper, "%.4e") + "]");
            json row = {{"iteration", m + 1}, {"kr", k.value}, {"lower", k.lower},
                        {"upper", k.upper}, {"exact", k.exact}};
            if (m > 0 && res.trace[m - 1].value > 0.0) {
                const double ratio = k.value / res.trace[m - 1].value;
                out << " ratio " << num(ratio, "%.6f");
                row["ratio"] = ratio;
            }
            out << "\n";
            trace.push_back(row);
        }
        out << "atoms " << res.measure.size() << " resamples " << res.resamples << "\n";
        json inv = json::array();
        // After m steps every atom carries an address of length m; deeper
        // levels would bin the seed's position inside a hole.
        for (int n = 1; n <= std::min({4, sys.depth(), args.iters}); ++n) {
            const double r = invariance_residual(res.measure, sys, weights, n);
            out << "invariance level " << n << " max_residual " << num(r, "%.3e") << "\n";
            inv.push_back({{"level", n}, {"max_residual", r}});
        }
        if (!args.report.empty()) {
            json j;
            j["weights"] = weights;
            j["iterations"] = args.iters;
            j["trace"] = trace;
            j["atoms"] = res.measure.size();
            j["resamples"] = res.resamples;
            j["invariance"] = inv;
            write_file(args.report, j.dump(2) + "\n");
        }
        return static_cast<int>(ok);
    });
}

}  // namespace gasket_cli
