#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "incsub/point.hpp"
#include "incsub/problems.hpp"

namespace incsub {

inline constexpr const char* kEngineVersion = "1.0.0";

struct TraceRow {
    std::uint64_t k = 0;
    std::optional<std::size_t> agent;  // active agent (Markov engine), 0-based
    double f = 0.0;
    std::optional<double> dist;        // ||x_k - witness||
    double inf_f = 0.0;                // min_{j <= k} f(x_j)
    std::optional<double> alpha;       // step that produced x_k (absent at k = 0)
};

struct RunOptions {
    std::uint64_t stride = 1;
    /// Fraction of the final iterations over which tail_min_f is taken.
    double tail_fraction = 0.1;
    bool record_subiterates = false;
};

/// Observable sequence of one run. Running statistics cover every
/// iteration, rows only the thinned ones.
struct RunTrace {
    std::string engine;
    std::uint64_t seed = 0;
    std::uint64_t horizon = 0;
    std::uint64_t completed = 0;
    std::vector<TraceRow> rows;

    Vector final_x;
    double final_f = 0.0;
    Vector best_x;
    double best_f = 0.0;
    double tail_min_f = 0.0;

    std::vector<std::uint64_t> visits;  // Markov: updates performed per agent
    std::vector<std::vector<Vector>> subiterates;  // cyclic, when requested: z_0..z_m per cycle

    bool aborted = false;
    std::string diagnostic;
    std::vector<std::string> warnings;

    std::vector<double> visit_frequencies() const;
};

/// Shared bookkeeping of the two engines.
class TraceRecorder {
public:
    TraceRecorder(const ProblemInstance& problem, std::uint64_t horizon, const RunOptions& options,
                  RunTrace& trace);

    void record(std::uint64_t k, const Vector& x, std::optional<std::size_t> agent, std::optional<double> alpha);
    void finish();

private:
    const ProblemInstance& problem_;
    std::uint64_t horizon_;
    std::uint64_t stride_;
    std::uint64_t tail_start_;
    RunTrace& trace_;
    std::optional<TraceRow> pending_;
};

}  // namespace incsub
