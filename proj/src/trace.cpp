#include "incsub/trace.hpp"

#include <cmath>
#include <limits>

namespace incsub {

std::vector<double> RunTrace::visit_frequencies() const {
    std::uint64_t total = 0;
    for (auto v : visits) total += v;
    std::vector<double> freq(visits.size(), 0.0);
    if (total == 0) return freq;
    for (std::size_t i = 0; i < visits.size(); ++i)
        freq[i] = static_cast<double>(visits[i]) / static_cast<double>(total);
    return freq;
}

TraceRecorder::TraceRecorder(const ProblemInstance& problem, std::uint64_t horizon, const RunOptions& options,
                             RunTrace& trace)
    : problem_(problem), horizon_(horizon), stride_(options.stride == 0 ? 1 : options.stride), trace_(trace) {
    const auto tail = static_cast<std::uint64_t>(std::floor(options.tail_fraction * static_cast<double>(horizon)));
    tail_start_ = horizon - tail;
    trace_.horizon = horizon;
    trace_.best_f = std::numeric_limits<double>::infinity();
    trace_.tail_min_f = std::numeric_limits<double>::infinity();
}

void TraceRecorder::record(std::uint64_t k, const Vector& x, std::optional<std::size_t> agent,
                           std::optional<double> alpha) {
    const double f = problem_.value(x);
    if (f < trace_.best_f) {
        trace_.best_f = f;
        trace_.best_x = x;
    }
    if (k >= tail_start_) trace_.tail_min_f = std::min(trace_.tail_min_f, f);
    trace_.final_x = x;
    trace_.final_f = f;
    trace_.completed = k;

    TraceRow row{k, agent, f, std::nullopt, trace_.best_f, alpha};
    if (problem_.optimum.witness) row.dist = (x - problem_.optimum.witness->coords()).norm();
    if (k % stride_ == 0) {
        trace_.rows.push_back(row);
        pending_.reset();
    } else {
        pending_ = row;
    }
}

void TraceRecorder::finish() {
    if (pending_) trace_.rows.push_back(*pending_);
    pending_.reset();
}

}  // namespace incsub
