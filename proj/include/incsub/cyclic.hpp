#pragma once

#include <cstdint>
#include <vector>

#include "incsub/noise.hpp"
#include "incsub/problems.hpp"
#include "incsub/step_schedule.hpp"
#include "incsub/trace.hpp"

namespace incsub {

/// State after cycle k: x_k plus the sub-iterates z_{0..m,k} of that cycle.
struct CyclicState {
    std::uint64_t k = 0;
    DecisionPoint x;
    std::vector<DecisionPoint> subiterates;
};

CyclicState initial_cyclic_state(const ProblemInstance& problem, const DecisionPoint& x0);

/// One pass over agents 1..m:
///   z_{i,k+1} = P_X[z_{i-1,k+1} - alpha_{k+1} (grad f_i(z_{i-1,k+1}) + eps_{i,k+1})]
/// with z_{0,k+1} = x_k and x_{k+1} = z_{m,k+1}. Noise for agent i in cycle
/// k+1 comes from the stream keyed (seed, i, k+1).
/// Throws NonFiniteIterate when a sub-step leaves the finite range.
CyclicState cyclic_cycle(const CyclicState& state, const ProblemInstance& problem, const NoiseModel& noise,
                         const StepSchedule& schedule, std::uint64_t seed);

/// Runs `cycles` cycles from x0 (projected onto X if outside).
RunTrace run_cyclic(const ProblemInstance& problem, const NoiseModel& noise, const StepSchedule& schedule,
                    const DecisionPoint& x0, std::uint64_t cycles, std::uint64_t seed,
                    const RunOptions& options = {});

}  // namespace incsub
