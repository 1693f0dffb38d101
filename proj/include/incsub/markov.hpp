#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "incsub/graph.hpp"
#include "incsub/noise.hpp"
#include "incsub/point.hpp"
#include "incsub/problems.hpp"
#include "incsub/step_schedule.hpp"
#include "incsub/trace.hpp"

namespace incsub {

class RandomStream;

// ------------------------------------------------------------------ topology

struct StaticTopology {
    Graph graph;
};

struct PeriodicTopology {
    std::vector<Graph> graphs;  // graph at tick k is graphs[k % size]
};

/// Each base edge present independently with probability `inclusion`; the
/// ring edge (e, e+1 mod m) is forced at every tick k with k % window == e % window,
/// so every window of `window` ticks contains the whole ring.
struct RandomEdgeTopology {
    Graph base;
    double inclusion = 0.5;
    std::size_t window = 1;
    std::uint64_t seed = 0;
};

using TopologyKind = std::variant<StaticTopology, PeriodicTopology, RandomEdgeTopology>;

/// Time-varying neighbour structure N_i(k) with a validated connectivity
/// window Q: the union graph over every [k, k+Q-1] is connected.
class TopologySequence {
public:
    std::size_t agents() const { return agents_; }
    std::size_t window() const { return window_; }
    const TopologyKind& kind() const { return kind_; }

    Graph graph_at(std::uint64_t k) const;
    /// Equal keys imply equal graphs.
    std::uint64_t graph_key(std::uint64_t k) const;
    /// Number of distinct keys, or 0 when keys are unbounded.
    std::uint64_t distinct_graphs() const;
    /// Upper bound on any agent's degree at any tick.
    std::size_t max_degree() const;

    friend TopologySequence make_topology(TopologyKind kind);

private:
    TopologySequence(TopologyKind k, std::size_t m, std::size_t q, std::size_t max_deg)
        : kind_(std::move(k)), agents_(m), window_(q), max_degree_(max_deg) {}
    TopologyKind kind_;
    std::size_t agents_;
    std::size_t window_;
    std::size_t max_degree_;
};

/// Validates symmetry and window connectivity; throws ValidationError.
TopologySequence make_topology(TopologyKind kind);

/// Checks every window intersecting [0, horizon] (bounded by 10^4 ticks for
/// random topologies, whose ring construction makes the rest structural).
void validate_windows(const TopologySequence& topology, std::uint64_t horizon);

// ------------------------------------------------------------------- schemes

enum class SchemeKind { EqualProbability, MinEqualNeighbor, WeightedMetropolisHastings };

const char* to_string(SchemeKind k);

struct Scheme {
    SchemeKind kind = SchemeKind::EqualProbability;
    std::vector<double> agent_weights;  // eta_i in (0,1), weighted MH only

    static Scheme equal_probability() { return {SchemeKind::EqualProbability, {}}; }
    static Scheme min_equal_neighbor() { return {SchemeKind::MinEqualNeighbor, {}}; }
    static Scheme weighted_metropolis_hastings(std::vector<double> weights) {
        return {SchemeKind::WeightedMetropolisHastings, std::move(weights)};
    }
};

/// Row-stochastic convention: entries(i, j) = Prob{s(k+1) = j | s(k) = i}.
struct TransitionMatrix {
    Matrix entries;
    double eta = 0.0;  // analytic floor on positive entries

    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Analytic eta of a scheme for m agents whose degrees never exceed max_degree.
double scheme_eta(const Scheme& scheme, std::size_t m, std::size_t max_degree);

/// Builds P(k) from the neighbour sets at one tick. Throws InvalidArgument on
/// asymmetric neighbours or bad weights, ValidationError on a non-positive
/// diagonal (naming the agent).
TransitionMatrix build_transition(const Scheme& scheme, const Graph& graph);

struct TransitionCheck {
    bool doubly_stochastic = true;
    bool positive_diagonal = true;
    bool eta_floor = true;
    bool sparsity = true;
    bool entries_in_unit_interval = true;
    std::string detail;

    bool ok() const { return doubly_stochastic && positive_diagonal && eta_floor && sparsity && entries_in_unit_interval; }
};

/// Checks the stochasticity assumptions. Entries falling below eta in
/// floating point are recomputed exactly in rational arithmetic before they
/// count as a violation.
TransitionCheck check_transition(const TransitionMatrix& p, const Graph& graph, const Scheme& scheme,
                                 double tol = 1e-12);

/// Draws j with probability entries(current, j).
std::size_t sample_next_agent(const TransitionMatrix& p, std::size_t current, RandomStream& rng);

/// Floor eta over the whole sequence.
double topology_eta(const Scheme& scheme, const TopologySequence& topology);

/// Builds and checks every distinct P(k) intersecting [0, horizon] plus the
/// window connectivity; throws ValidationError on the first failure.
void validate_markov_setup(const TopologySequence& topology, const Scheme& scheme, std::uint64_t horizon);

// -------------------------------------------------------------------- engine

struct MarkovState {
    std::uint64_t k = 0;
    DecisionPoint x;
    std::size_t agent = 0;  // s(k), 0-based
};

struct InitialAgentPolicy {
    std::optional<std::size_t> fixed;  // uniform over agents when empty

    static InitialAgentPolicy uniform() { return {}; }
    static InitialAgentPolicy at(std::size_t i) { return {i}; }
};

MarkovState initial_markov_state(const ProblemInstance& problem, const DecisionPoint& x0,
                                 const InitialAgentPolicy& policy, std::uint64_t seed);

/// One tick: s(k+1) drawn from row s(k) of P(k), then
///   x_{k+1} = P_X[x_k - alpha_{k+1} (grad f_{s(k+1)}(x_k) + eps_{s(k+1),k+1})].
MarkovState markov_step(const MarkovState& state, const ProblemInstance& problem, const NoiseModel& noise,
                        const StepSchedule& schedule, const TopologySequence& topology, const Scheme& scheme,
                        std::uint64_t seed);

/// Same as markov_step with a caller-supplied P(k).
MarkovState markov_step(const MarkovState& state, const ProblemInstance& problem, const NoiseModel& noise,
                        const StepSchedule& schedule, const TransitionMatrix& p, std::uint64_t seed);

RunTrace run_markov(const ProblemInstance& problem, const NoiseModel& noise, const StepSchedule& schedule,
                    const TopologySequence& topology, const Scheme& scheme, const DecisionPoint& x0,
                    const InitialAgentPolicy& policy, std::uint64_t ticks, std::uint64_t seed,
                    const RunOptions& options = {});

}  // namespace incsub
