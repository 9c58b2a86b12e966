#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "geogasket/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Geodesic Sierpinski gaskets: build, certify, estimate dimensions."};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (overrides GEOGASKET_THREADS)")
        ->check(CLI::NonNegativeNumber);

    std::vector<std::string> ratios;
    auto* moran = app.add_subcommand("moran", "Solve sum lambda_i^s = 1");
    moran->add_option("ratios", ratios, "Ratios in (0,1)")->required();

    gasket_cli::BuildArgs build;
    auto* b = app.add_subcommand("build", "Build a system from a scene file");
    b->add_option("scene", build.scene, "Scene JSON")->required();
    b->add_option("--depth", build.depth, "Subdivision depth (overrides the scene)");
    b->add_option("--out", build.out, "Output system JSON (default stdout)");
    b->add_option("--seed", build.seed, "Audit seed (overrides the scene)");

    gasket_cli::VerifyArgs verify;
    auto* v = app.add_subcommand("verify", "Certify a system file");
    v->add_option("system", verify.system, "System JSON")->required();
    v->add_option("--seed", verify.seed, "Audit seed (overrides the scene)");
    v->add_option("--report", verify.report, "Write the certification report as JSON");

    gasket_cli::DimArgs dim;
    auto* d = app.add_subcommand("dim", "Box-dimension regression over a level range");
    d->add_option("system", dim.system, "System JSON")->required();
    d->add_option("--levels", dim.levels, "Level range n1..n2")->required();
    d->add_option("--csv", dim.csv, "Per-level CSV output");
    d->add_option("--svg", dim.svg, "SVG of the finest listed level");
    d->add_option("--report", dim.report, "Write the dimension report as JSON");

    gasket_cli::MeasureArgs measure;
    auto* m = app.add_subcommand("measure", "Iterate the measure push-forward");
    m->add_option("system", measure.system, "System JSON")->required();
    m->add_option("--weights", measure.weights,
                 "Map weights a_1..a_k, default equal thirds (one weight: single map)")
        ->delimiter(',');
    m->add_option("--iters", measure.iters, "Iterations")->check(CLI::NonNegativeNumber);
    m->add_option("--budget", measure.budget, "Atom budget before resampling");
    m->add_option("--report", measure.report, "Write the trace as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : gasket_cli::input_error;
    }
    if (threads > 0) geogasket::set_thread_count(threads);

    if (*moran) return gasket_cli::cmd_moran(ratios, std::cout, std::cerr);
    if (*b) return gasket_cli::cmd_build(build, std::cout, std::cerr);
    if (*v) return gasket_cli::cmd_verify(verify, std::cout, std::cerr);
    if (*d) return gasket_cli::cmd_dim(dim, std::cout, std::cerr);
    return gasket_cli::cmd_measure(measure, std::cout, std::cerr);
}
