#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "incsub/analysis.hpp"
#include "incsub/config.hpp"
#include "incsub/markov.hpp"

namespace incsub {

FeasibleSet build_set(const SetSpec& spec);
ProblemInstance build_problem(const ProblemSpec& spec);
StepSchedule build_schedule(const ScheduleSpec& spec);
NoiseModel build_noise(const NoiseSpec& spec, std::size_t n);
Scheme build_scheme(const SchemeSpec& spec);

/// "ring:5", "path:5", "complete:5", "star:5" or "edges:4:1-2,3-4" (1-based agents).
Graph parse_graph(const std::string& text);
TopologySequence build_topology(const TopologySpec& spec);

struct Experiment {
    ExperimentConfig config;
    ProblemInstance problem;
    NoiseModel noise = NoiseModel::none();
    StepSchedule schedule = StepSchedule::constant(0.0);
    std::optional<TopologySequence> topology;
    std::optional<Scheme> scheme;
    DecisionPoint x0;
    InitialAgentPolicy policy;
};

/// Builds every runtime object the config names. Throws ConfigError for
/// inputs rejected by a constructor, ValidationError for failed assumption checks.
Experiment build_experiment(const ExperimentConfig& config);

struct LabeledBound {
    std::string label;           // "cyclic", "T=0", "T*", "delta", "T=<n>"
    std::optional<std::uint64_t> T;
    BoundReport report;
};

struct BoundsResult {
    std::vector<LabeledBound> bounds;
    std::optional<RateConstants> rate;     // markov only
    std::optional<OptimalT> optimal;
    ErrorMoments moments;
    double diameter = 0.0;
    std::vector<std::string> notes;        // why a bound was not produced
};

/// Analytic constant-step bounds for the experiment with step `alpha`
/// (defaults to the configured constant step; empty for diminishing steps).
BoundsResult compute_bounds(const Experiment& experiment, std::optional<double> alpha = std::nullopt);

/// Rate constants of the configured chain.
RateConstants experiment_rates(const Experiment& experiment);

struct ReplicationResult {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    RunTrace trace;  // rows are dropped after the trace file is written
    std::vector<BoundVerdict> verdicts;  // aligned with BoundsResult::bounds
};

struct ExperimentResult {
    std::string config_hash;
    BoundsResult bounds;
    std::vector<ReplicationResult> replications;
    bool aborted = false;

    bool bounds_hold() const;
};

/// Runs all replications (seeds base+0..base+R-1, `run.jobs` worker threads).
/// With an output directory, trace_<r>.csv, summary.json and bounds.csv are
/// written there and trace rows are released as soon as each file is out.
ExperimentResult run_experiment(const Experiment& experiment,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

RunTrace run_replication(const Experiment& experiment, std::uint64_t seed);

std::string trace_csv(const RunTrace& trace, Algorithm algorithm);
std::string summary_json(const Experiment& experiment, const ExperimentResult& result);
std::string bounds_csv(const BoundsResult& bounds);

struct CompareCell {
    double alpha = 0.0;
    std::string label;
    std::optional<std::uint64_t> T;
    double analytic_gap = 0.0;
    double mean_tail_min_gap = 0.0;
    double max_inf_gap = 0.0;
    double pass_fraction = 0.0;
};

/// Grid over compare.alphas (constant steps) and, for the Markov engine,
/// T in {0, T*, delta} plus compare.T.
std::vector<CompareCell> compare_bounds(const Experiment& experiment);
std::string compare_csv(const std::vector<CompareCell>& cells);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);

/// Directory used when run.out and --out are empty.
std::filesystem::path default_output_dir();

}  // namespace incsub
