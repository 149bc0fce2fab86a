#pragma once

#include "surreal/serialization.hpp"
#include "surreal/training.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Batch command-line surface: generate, preprocess, train, sweep, infer,
// evaluate and diagnose. Every command writes into an output directory and
// returns one of the exit codes below.
namespace surreal::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitArgument = 2,
    kExitData = 3,
    kExitConvergence = 4,
    kExitIo = 5,
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    // Dataset paths; empty means "not given".
    std::string cohort;
    std::string truth;
    std::string stats;

    // Synthetic cohort generation.
    std::string variant = "basic";
    int n_cn = 492;
    int n_pt = 900;
    int num_features = 139;

    // Replicated (M, lambda) grid.
    int replicas = 10;
    int workers = 1;
    std::vector<double> lambda_grid{0.1, 0.2, 0.4, 0.6, 0.8};
    std::vector<int> pattern_grid{2, 3, 4};

    std::size_t diagnostic_samples = 1000;

    TrainConfig train;
};

// Layout: {"seed", "output_dir", "data": {cohort, truth, stats},
// "synth": {variant, n_cn, n_pt, num_features},
// "sweep": {replicas, workers, lambda_grid, pattern_grid},
// "diagnostics": {samples}, "training": {...}}. Missing keys keep their
// defaults; unknown keys are rejected.
Json to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& j, RunConfig base = {});
RunConfig load_run_config(const std::string& path);
void validate(const RunConfig& config);

// Metrics of an R-index matrix against planted severities (when given) and
// across the R-indices of other models (when at least two are given).
Json evaluation_report(const std::vector<Matrix>& r_indices, const Matrix* truth);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace surreal::cli
