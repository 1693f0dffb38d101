#include "incsub/markov.hpp"

#include <string>
#include <unordered_map>

#include "incsub/errors.hpp"
#include "incsub/random.hpp"

namespace incsub {

namespace {

// x <- P_X[x - alpha (grad f_agent(x) + eps)]
void apply_update(Vector& x, std::size_t agent, std::uint64_t next_tick, const ProblemInstance& problem,
                  const NoiseModel& noise, const StepSchedule& schedule, std::uint64_t seed) {
    const double alpha = schedule.at(next_tick);
    RandomStream rng(seed, StreamTag::Noise, agent, next_tick);
    const Vector g = noisy_subgradient(problem.components[agent], noise, x, next_tick, rng);
    Vector step = x - alpha * g;
    if (!step.allFinite())
        throw NonFiniteIterate("markov: non-finite step at tick " + std::to_string(next_tick) + ", agent " +
                               std::to_string(agent + 1));
    x = problem.set.project(step);
    if (!x.allFinite())
        throw NonFiniteIterate("markov: non-finite iterate at tick " + std::to_string(next_tick));
}

std::size_t draw_next_agent(const TransitionMatrix& p, std::size_t current, std::uint64_t next_tick,
                            std::uint64_t seed) {
    RandomStream rng(seed, StreamTag::Chain, next_tick);
    return sample_next_agent(p, current, rng);
}

// P(k) cache for topologies with finitely many distinct graphs.
class TransitionCache {
public:
    TransitionCache(const TopologySequence& t, const Scheme& s) : topology_(t), scheme_(s) {}

    const TransitionMatrix& at(std::uint64_t k) {
        const auto key = topology_.graph_key(k);
        if (topology_.distinct_graphs() == 0) {
            scratch_ = build_transition(scheme_, topology_.graph_at(k));
            return scratch_;
        }
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, build_transition(scheme_, topology_.graph_at(k))).first;
        return it->second;
    }

private:
    const TopologySequence& topology_;
    const Scheme& scheme_;
    std::unordered_map<std::uint64_t, TransitionMatrix> cache_;
    TransitionMatrix scratch_;
};

}  // namespace

MarkovState initial_markov_state(const ProblemInstance& problem, const DecisionPoint& x0,
                                 const InitialAgentPolicy& policy, std::uint64_t seed) {
    x0.require_dim(problem.dim());
    const std::size_t m = problem.agents();
    std::size_t agent = 0;
    if (policy.fixed) {
        if (*policy.fixed >= m) throw InvalidArgument("initial agent index out of range");
        agent = *policy.fixed;
    } else {
        RandomStream rng(seed, StreamTag::InitialAgent);
        agent = static_cast<std::size_t>(rng.below(m));
    }
    DecisionPoint start = problem.set.contains(x0.coords()) ? x0 : problem.set.project(x0);
    return MarkovState{0, start, agent};
}

MarkovState markov_step(const MarkovState& state, const ProblemInstance& problem, const NoiseModel& noise,
                        const StepSchedule& schedule, const TransitionMatrix& p, std::uint64_t seed) {
    state.x.require_dim(problem.dim());
    if (p.size() != problem.agents()) throw DimensionMismatch(problem.agents(), p.size());
    const std::uint64_t next = state.k + 1;
    const std::size_t agent = draw_next_agent(p, state.agent, next, seed);
    Vector x = state.x.coords();
    apply_update(x, agent, next, problem, noise, schedule, seed);
    return MarkovState{next, DecisionPoint(std::move(x)), agent};
}

MarkovState markov_step(const MarkovState& state, const ProblemInstance& problem, const NoiseModel& noise,
                        const StepSchedule& schedule, const TopologySequence& topology, const Scheme& scheme,
                        std::uint64_t seed) {
    if (topology.agents() != problem.agents()) throw DimensionMismatch(problem.agents(), topology.agents());
    return markov_step(state, problem, noise, schedule, build_transition(scheme, topology.graph_at(state.k)), seed);
}

RunTrace run_markov(const ProblemInstance& problem, const NoiseModel& noise, const StepSchedule& schedule,
                    const TopologySequence& topology, const Scheme& scheme, const DecisionPoint& x0,
                    const InitialAgentPolicy& policy, std::uint64_t ticks, std::uint64_t seed,
                    const RunOptions& options) {
    x0.require_dim(problem.dim());
    if (topology.agents() != problem.agents())
        throw ValidationError("topology has " + std::to_string(topology.agents()) + " agents, problem has " +
                              std::to_string(problem.agents()));
    validate_markov_setup(topology, scheme, ticks);

    RunTrace trace;
    trace.engine = "markov";
    trace.seed = seed;
    trace.visits.assign(problem.agents(), 0);
    TraceRecorder recorder(problem, ticks, options, trace);

    MarkovState start = initial_markov_state(problem, x0, policy, seed);
    if (!problem.set.contains(x0.coords())) trace.warnings.push_back("initial point outside the feasible set; projected");
    Vector x = start.x.coords();
    std::size_t agent = start.agent;
    recorder.record(0, x, agent, std::nullopt);

    TransitionCache cache(topology, scheme);
    for (std::uint64_t k = 0; k < ticks; ++k) {
        const std::uint64_t next = k + 1;
        const std::size_t candidate = draw_next_agent(cache.at(k), agent, next, seed);
        try {
            apply_update(x, candidate, next, problem, noise, schedule, seed);
        } catch (const NonFiniteIterate& e) {
            trace.aborted = true;
            trace.diagnostic = e.what();
            break;
        }
        agent = candidate;
        ++trace.visits[agent];
        recorder.record(next, x, agent, schedule.at(next));
    }
    recorder.finish();
    return trace;
}

}  // namespace incsub
