#include "incsub/cyclic.hpp"

#include <string>

#include "incsub/errors.hpp"
#include "incsub/random.hpp"

namespace incsub {

namespace {

// Advances x from x_k to x_{k+1} in place; `subs`, when given, receives z_0..z_m.
void advance_cycle(Vector& x, std::uint64_t next_cycle, const ProblemInstance& problem, const NoiseModel& noise,
                   const StepSchedule& schedule, std::uint64_t seed, std::vector<Vector>* subs) {
    const double alpha = schedule.at(next_cycle);
    if (subs) subs->push_back(x);
    for (std::size_t i = 0; i < problem.agents(); ++i) {
        RandomStream rng(seed, StreamTag::Noise, i, next_cycle);
        const Vector g = noisy_subgradient(problem.components[i], noise, x, next_cycle, rng);
        Vector step = x - alpha * g;
        if (!step.allFinite())
            throw NonFiniteIterate("cyclic: non-finite step at cycle " + std::to_string(next_cycle) + ", agent " +
                                   std::to_string(i + 1));
        Vector z = problem.set.project(step);
        if (!z.allFinite())
            throw NonFiniteIterate("cyclic: non-finite sub-iterate at cycle " + std::to_string(next_cycle) +
                                   ", agent " + std::to_string(i + 1));
        x = std::move(z);
        if (subs) subs->push_back(x);
    }
}

}  // namespace

CyclicState initial_cyclic_state(const ProblemInstance& problem, const DecisionPoint& x0) {
    x0.require_dim(problem.dim());
    DecisionPoint start = problem.set.contains(x0.coords()) ? x0 : problem.set.project(x0);
    return CyclicState{0, start, {start}};
}

CyclicState cyclic_cycle(const CyclicState& state, const ProblemInstance& problem, const NoiseModel& noise,
                         const StepSchedule& schedule, std::uint64_t seed) {
    state.x.require_dim(problem.dim());
    Vector x = state.x.coords();
    std::vector<Vector> subs;
    subs.reserve(problem.agents() + 1);
    advance_cycle(x, state.k + 1, problem, noise, schedule, seed, &subs);
    CyclicState next{state.k + 1, DecisionPoint(x), {}};
    next.subiterates.reserve(subs.size());
    for (auto& z : subs) next.subiterates.emplace_back(std::move(z));
    return next;
}

RunTrace run_cyclic(const ProblemInstance& problem, const NoiseModel& noise, const StepSchedule& schedule,
                    const DecisionPoint& x0, std::uint64_t cycles, std::uint64_t seed, const RunOptions& options) {
    x0.require_dim(problem.dim());
    RunTrace trace;
    trace.engine = "cyclic";
    trace.seed = seed;
    TraceRecorder recorder(problem, cycles, options, trace);

    Vector x = x0.coords();
    if (!problem.set.contains(x)) {
        x = problem.set.project(x);
        trace.warnings.push_back("initial point outside the feasible set; projected");
    }
    recorder.record(0, x, std::nullopt, std::nullopt);

    std::vector<Vector> subs;
    for (std::uint64_t k = 1; k <= cycles; ++k) {
        subs.clear();
        try {
            advance_cycle(x, k, problem, noise, schedule, seed, options.record_subiterates ? &subs : nullptr);
        } catch (const NonFiniteIterate& e) {
            trace.aborted = true;
            trace.diagnostic = e.what();
            break;
        }
        if (options.record_subiterates) trace.subiterates.push_back(subs);
        recorder.record(k, x, std::nullopt, schedule.at(k));
    }
    recorder.finish();
    return trace;
}

}  // namespace incsub
