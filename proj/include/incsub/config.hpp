#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "incsub/problems.hpp"

namespace incsub {

enum class Algorithm { Cyclic, Markov };

struct SetSpec {
    std::string kind = "box";  // box | ball | simplex | halfspaces
    std::vector<double> lower, upper, center;
    double radius = 1.0;
    double scale = 1.0;
    std::size_t dim = 0;
    std::vector<std::vector<double>> halfspaces;  // (normal..., offset)
};

struct ProblemSpec {
    std::string fixture = "quadratic";  // quadratic | regression | allocation
    // quadratic
    std::size_t m = 0;
    double spread = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> centers;
    // regression
    std::vector<double> locations;
    std::vector<int> powers;
    std::vector<std::vector<double>> samples;
    std::vector<double> true_x;
    double noise_sigma = 0.0;
    std::size_t samples_per_agent = 0;
    // allocation
    std::vector<Utility> utilities;

    double grid_resolution = 1e-4;
    SetSpec set;
};

struct ScheduleSpec {
    std::string kind = "powerlaw";  // constant | powerlaw
    double alpha = 0.01;
    double a = 1.0;
    double p = 1.0;
};

struct NoiseSpec {
    std::string kind = "none";  // none | gaussian | biased | uniform
    std::optional<double> nu;   // gaussian: sigma derived as nu / sqrt(n)
    double sigma = 0.0, sigma_decay = 0.0;
    double bias = 0.0, bias_decay = 0.0;
    double radius = 0.0, radius_decay = 0.0;
    std::vector<double> direction;
};

struct TopologySpec {
    std::string kind = "static";  // static | periodic | random
    std::string graph;               // static graph, or random base graph
    std::vector<std::string> graphs; // periodic
    double inclusion = 0.5;
    std::size_t window = 1;
    std::uint64_t seed = 0;
};

struct SchemeSpec {
    std::string kind = "equal";  // equal | min_equal | weighted_mh
    std::vector<double> weights;
};

struct RunSpec {
    std::uint64_t horizon = 1000;
    std::uint64_t reps = 1;
    std::uint64_t seed = 0;
    std::string out;  // empty: $INCSUB_OUT_DIR or "out"
    std::uint64_t stride = 1;
    std::vector<double> x0;  // empty: origin (projected)
    std::string s0 = "uniform";  // uniform | 1-based agent index
    std::uint64_t jobs = 1;
    double tail_fraction = 0.1;
};

struct VerifySpec {
    double relative_slack = 0.02;
    double absolute_slack = 0.0;
    bool assert_bounds = false;
    std::vector<std::uint64_t> extra_T;  // markov: fixed T values reported besides T* and delta
};

struct CompareSpec {
    std::vector<double> alphas;
    std::vector<std::uint64_t> T;
};

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::Cyclic;
    ProblemSpec problem;
    ScheduleSpec schedule;
    NoiseSpec noise;
    TopologySpec topology;  // markov only
    SchemeSpec scheme;      // markov only
    RunSpec run;
    VerifySpec verify;
    CompareSpec compare;
};

using FlatConfig = std::map<std::string, std::string>;

/// `key = value` lines with dotted keys; '#' starts a comment. Text whose
/// first non-blank character is '{' is read as the JSON mirror.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form: sorted keys, round-trip-safe numbers.
std::string serialize_config(const ExperimentConfig& config);

/// Flat key/value view of the JSON mirror.
FlatConfig flatten_json(std::string_view json_text);
FlatConfig parse_flat(std::string_view text);
ExperimentConfig config_from_flat(const FlatConfig& flat);

/// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::string format_double(double v);

}  // namespace incsub
