#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "incsub/errors.hpp"
#include "incsub/markov.hpp"
#include "incsub/random.hpp"

namespace incsub {

namespace {

using Rational = boost::multiprecision::cpp_rational;

std::size_t max_degree_of(const Graph& g) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, g.degree(i));
    return d;
}

void check_weights(const Scheme& scheme, std::size_t m) {
    if (scheme.kind != SchemeKind::WeightedMetropolisHastings) return;
    if (scheme.agent_weights.size() != m)
        throw InvalidArgument("weighted Metropolis-Hastings: need one weight per agent (" + std::to_string(m) +
                              "), got " + std::to_string(scheme.agent_weights.size()));
    for (std::size_t i = 0; i < m; ++i) {
        const double w = scheme.agent_weights[i];
        if (!(w > 0.0 && w < 1.0))
            throw InvalidArgument("weighted Metropolis-Hastings: weight of agent " + std::to_string(i + 1) +
                                  " must lie in (0, 1)");
    }
}

double off_diagonal(const Scheme& scheme, const Graph& g, std::size_t i, std::size_t j) {
    const double m = static_cast<double>(g.size());
    const double di = static_cast<double>(g.degree(i));
    const double dj = static_cast<double>(g.degree(j));
    switch (scheme.kind) {
        case SchemeKind::EqualProbability: return 1.0 / m;
        case SchemeKind::MinEqualNeighbor: return std::min(1.0 / (di + 1.0), 1.0 / (dj + 1.0));
        case SchemeKind::WeightedMetropolisHastings:
            // Pairwise weight min(eta_i, eta_j) keeps the matrix symmetric.
            return std::min(scheme.agent_weights[i], scheme.agent_weights[j]) * std::min(1.0 / di, 1.0 / dj);
    }
    return 0.0;
}

Rational exact_off_diagonal(const Scheme& scheme, const Graph& g, std::size_t i, std::size_t j) {
    const auto m = static_cast<long long>(g.size());
    const auto di = static_cast<long long>(g.degree(i));
    const auto dj = static_cast<long long>(g.degree(j));
    switch (scheme.kind) {
        case SchemeKind::EqualProbability: return Rational(1, m);
        case SchemeKind::MinEqualNeighbor: return Rational(1, std::max(di, dj) + 1);
        case SchemeKind::WeightedMetropolisHastings: {
            const Rational w(std::min(scheme.agent_weights[i], scheme.agent_weights[j]));
            return w * Rational(1, std::max(di, dj));
        }
    }
    return Rational(0);
}

Rational exact_entry(const Scheme& scheme, const Graph& g, std::size_t i, std::size_t j) {
    if (i != j) return g.has_edge(i, j) ? exact_off_diagonal(scheme, g, i, j) : Rational(0);
    Rational diag(1);
    for (auto l : g.neighbors(i)) diag -= exact_off_diagonal(scheme, g, i, l);
    return diag;
}

Rational exact_eta(const Scheme& scheme, std::size_t m, std::size_t max_degree) {
    switch (scheme.kind) {
        case SchemeKind::EqualProbability: return Rational(1, static_cast<long long>(m));
        case SchemeKind::MinEqualNeighbor: return Rational(1, static_cast<long long>(max_degree) + 1);
        case SchemeKind::WeightedMetropolisHastings: {
            Rational floor(1);
            for (double w : scheme.agent_weights) floor = std::min({floor, Rational(w), Rational(1) - Rational(w)});
            return max_degree == 0 ? floor : floor / static_cast<long long>(max_degree);
        }
    }
    return Rational(0);
}

}  // namespace

const char* to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::EqualProbability: return "equal";
        case SchemeKind::MinEqualNeighbor: return "min_equal";
        case SchemeKind::WeightedMetropolisHastings: return "weighted_mh";
    }
    return "equal";
}

double scheme_eta(const Scheme& scheme, std::size_t m, std::size_t max_degree) {
    if (m == 0) throw InvalidArgument("scheme eta: no agents");
    switch (scheme.kind) {
        case SchemeKind::EqualProbability: return 1.0 / static_cast<double>(m);
        case SchemeKind::MinEqualNeighbor: return 1.0 / (static_cast<double>(max_degree) + 1.0);
        case SchemeKind::WeightedMetropolisHastings: {
            check_weights(scheme, m);
            double floor = 1.0;
            for (double w : scheme.agent_weights) floor = std::min({floor, w, 1.0 - w});
            return max_degree == 0 ? floor : floor / static_cast<double>(max_degree);
        }
    }
    return 0.0;
}

TransitionMatrix build_transition(const Scheme& scheme, const Graph& graph) {
    const std::size_t m = graph.size();
    if (m == 0) throw InvalidArgument("transition matrix: no agents");
    if (!graph.symmetric()) throw InvalidArgument("transition matrix: neighbor sets are not symmetric");
    check_weights(scheme, m);

    const auto n = static_cast<Eigen::Index>(m);
    TransitionMatrix p{Matrix::Zero(n, n), scheme_eta(scheme, m, max_degree_of(graph))};
    for (std::size_t i = 0; i < m; ++i) {
        double off_sum = 0.0;
        for (auto j : graph.neighbors(i)) {
            const double v = off_diagonal(scheme, graph, i, j);
            p.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            off_sum += v;
        }
        const double diag = 1.0 - off_sum;
        if (!(diag > 0.0))
            throw ValidationError(std::string("scheme ") + to_string(scheme.kind) +
                                  " violates positive diagonal at agent " + std::to_string(i + 1));
        p.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag;
    }
    return p;
}

TransitionCheck check_transition(const TransitionMatrix& p, const Graph& graph, const Scheme& scheme, double tol) {
    TransitionCheck c;
    const std::size_t m = p.size();
    auto fail = [&](bool& flag, const std::string& what) {
        if (flag) c.detail += (c.detail.empty() ? "" : "; ") + what;
        flag = false;
    };
    if (graph.size() != m || static_cast<std::size_t>(p.entries.cols()) != m) {
        c.sparsity = false;
        c.detail = "matrix and graph sizes differ";
        return c;
    }
    const Matrix& e = p.entries;
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
        if (std::abs(e.row(i).sum() - 1.0) > tol) fail(c.doubly_stochastic, "row " + std::to_string(i + 1) + " sum");
        if (std::abs(e.col(i).sum() - 1.0) > tol) fail(c.doubly_stochastic, "column " + std::to_string(i + 1) + " sum");
        if (!(e(i, i) > 0.0)) fail(c.positive_diagonal, "diagonal " + std::to_string(i + 1));
    }
    const Rational eta_graph = exact_eta(scheme, m, max_degree_of(graph));
    const Rational eta_declared(p.eta);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const std::string where = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
            if (!(v >= 0.0 && v <= 1.0)) fail(c.entries_in_unit_interval, "entry " + where);
            if (i != j && !graph.has_edge(i, j) && v != 0.0) fail(c.sparsity, "entry " + where + " outside N_i");
            if (v > 0.0 && v < p.eta) {
                const Rational exact = exact_entry(scheme, graph, i, j);
                if (exact < eta_graph && exact < eta_declared) fail(c.eta_floor, "entry " + where + " below eta");
            }
        }
    }
    return c;
}

std::size_t sample_next_agent(const TransitionMatrix& p, std::size_t current, RandomStream& rng) {
    const auto row = p.entries.row(static_cast<Eigen::Index>(current));
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t last_positive = current;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double w = row[j];
        if (w <= 0.0) continue;
        last_positive = static_cast<std::size_t>(j);
        cumulative += w;
        if (u < cumulative) return last_positive;
    }
    return last_positive;
}

double topology_eta(const Scheme& scheme, const TopologySequence& topology) {
    return scheme_eta(scheme, topology.agents(), topology.max_degree());
}

void validate_markov_setup(const TopologySequence& topology, const Scheme& scheme, std::uint64_t horizon) {
    validate_windows(topology, horizon);
    std::uint64_t span = topology.distinct_graphs();
    if (span == 0 || span > horizon + 1) span = std::min<std::uint64_t>(horizon + 1, 10000);
    const double eta = topology_eta(scheme, topology);
    for (std::uint64_t k = 0; k < span; ++k) {
        const Graph g = topology.graph_at(k);
        TransitionMatrix p = build_transition(scheme, g);
        p.eta = std::min(p.eta, eta);
        const auto check = check_transition(p, g, scheme);
        if (!check.ok())
            throw ValidationError("transition matrix at tick " + std::to_string(k) + " fails: " + check.detail);
    }
}

}  // namespace incsub
