#pragma once

// Subcommands of the gasket tool. Each returns the process exit code and
// writes its report to `out`; diagnostics go to `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gasket_cli {

enum ExitCode : int { ok = 0, input_error = 2, construction_error = 3, certification_failure = 4 };

int cmd_moran(const std::vector<std::string>& ratios, std::ostream& out, std::ostream& err);

struct BuildArgs {
    std::string scene;
    std::optional<int> depth;
    std::string out;  // empty: stdout
    std::optional<std::uint64_t> seed;
};
int cmd_build(const BuildArgs& args, std::ostream& out, std::ostream& err);

struct VerifyArgs {
    std::string system;
    std::optional<std::uint64_t> seed;
    std::string report;  // optional JSON report path
};
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

struct DimArgs {
    std::string system;
    std::string levels;  // "n1..n2"
    std::string csv;
    std::string svg;
    std::string report;
};
int cmd_dim(const DimArgs& args, std::ostream& out, std::ostream& err);

struct MeasureArgs {
    std::string system;
    std::vector<double> weights;
    int iters = 8;
    std::size_t budget = 20'000;
    std::string report;
};
int cmd_measure(const MeasureArgs& args, std::ostream& out, std::ostream& err);

}  // namespace gasket_cli
