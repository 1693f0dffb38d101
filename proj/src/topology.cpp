#include <algorithm>
#include <string>

#include "incsub/errors.hpp"
#include "incsub/markov.hpp"
#include "incsub/random.hpp"

namespace incsub {

namespace {

constexpr std::uint64_t kRandomValidationTicks = 10000;

Graph random_graph_at(const RandomEdgeTopology& r, std::uint64_t k) {
    const std::size_t m = r.base.size();
    Graph g(m);
    RandomStream rng(r.seed, StreamTag::Topology, k);
    for (auto [i, j] : r.base.edges())
        if (rng.uniform() < r.inclusion) g.add_edge(i, j);
    const auto ring = Graph::ring(m).edges();
    for (std::size_t e = 0; e < ring.size(); ++e)
        if (k % r.window == e % r.window) g.add_edge(ring[e].first, ring[e].second);
    return g;
}

std::size_t max_degree_of(const Graph& g) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, g.degree(i));
    return d;
}

void require_symmetric(const Graph& g, const std::string& what) {
    if (!g.symmetric()) throw ValidationError(what + ": neighbor relation is not symmetric");
}

bool window_connected(const std::vector<Graph>& graphs, std::size_t start, std::size_t q) {
    Graph u = graphs[start % graphs.size()];
    for (std::size_t t = 1; t < q; ++t) u = graph_union(u, graphs[(start + t) % graphs.size()]);
    return u.connected();
}

}  // namespace

Graph TopologySequence::graph_at(std::uint64_t k) const {
    if (const auto* s = std::get_if<StaticTopology>(&kind_)) return s->graph;
    if (const auto* p = std::get_if<PeriodicTopology>(&kind_)) return p->graphs[k % p->graphs.size()];
    return random_graph_at(std::get<RandomEdgeTopology>(kind_), k);
}

std::uint64_t TopologySequence::graph_key(std::uint64_t k) const {
    if (std::holds_alternative<StaticTopology>(kind_)) return 0;
    if (const auto* p = std::get_if<PeriodicTopology>(&kind_)) return k % p->graphs.size();
    return k;
}

std::uint64_t TopologySequence::distinct_graphs() const {
    if (std::holds_alternative<StaticTopology>(kind_)) return 1;
    if (const auto* p = std::get_if<PeriodicTopology>(&kind_)) return p->graphs.size();
    return 0;
}

std::size_t TopologySequence::max_degree() const { return max_degree_; }

TopologySequence make_topology(TopologyKind kind) {
    if (auto* s = std::get_if<StaticTopology>(&kind)) {
        require_symmetric(s->graph, "static topology");
        if (s->graph.size() == 0) throw ValidationError("static topology: no agents");
        if (!s->graph.connected()) throw ValidationError("static topology: graph is not connected");
        const std::size_t m = s->graph.size();
        const std::size_t d = max_degree_of(s->graph);
        return TopologySequence(std::move(kind), m, 1, d);
    }
    if (auto* p = std::get_if<PeriodicTopology>(&kind)) {
        if (p->graphs.empty()) throw ValidationError("periodic topology: empty graph list");
        const std::size_t m = p->graphs.front().size();
        if (m == 0) throw ValidationError("periodic topology: no agents");
        std::size_t d = 0;
        for (std::size_t t = 0; t < p->graphs.size(); ++t) {
            if (p->graphs[t].size() != m) throw ValidationError("periodic topology: graphs differ in agent count");
            require_symmetric(p->graphs[t], "periodic topology graph " + std::to_string(t));
            d = std::max(d, max_degree_of(p->graphs[t]));
        }
        const std::size_t period = p->graphs.size();
        for (std::size_t q = 1; q <= period; ++q) {
            bool all = true;
            for (std::size_t o = 0; o < period && all; ++o) all = window_connected(p->graphs, o, q);
            if (all) return TopologySequence(std::move(kind), m, q, d);
        }
        throw ValidationError("periodic topology: union over one period is not connected");
    }
    auto& r = std::get<RandomEdgeTopology>(kind);
    require_symmetric(r.base, "random topology base graph");
    if (r.base.size() == 0) throw ValidationError("random topology: no agents");
    if (!(r.inclusion >= 0.0 && r.inclusion <= 1.0))
        throw ValidationError("random topology: inclusion probability outside [0, 1]");
    if (r.window == 0) throw ValidationError("random topology: window must be >= 1");
    const std::size_t m = r.base.size();
    const std::size_t d = max_degree_of(graph_union(r.base, Graph::ring(m)));
    const std::size_t q = r.window;
    return TopologySequence(std::move(kind), m, q, d);
}

void validate_windows(const TopologySequence& topology, std::uint64_t horizon) {
    const std::size_t q = topology.window();
    std::uint64_t span = horizon + 1;
    if (const auto distinct = topology.distinct_graphs(); distinct > 0) {
        span = std::min<std::uint64_t>(span, distinct);
    } else {
        span = std::min<std::uint64_t>(span, kRandomValidationTicks);
    }
    std::vector<Graph> graphs;
    graphs.reserve(span + q);
    for (std::uint64_t k = 0; k < span + q - 1; ++k) graphs.push_back(topology.graph_at(k));
    for (std::uint64_t start = 0; start < span; ++start) {
        Graph u = graphs[start];
        for (std::size_t t = 1; t < q; ++t) u = graph_union(u, graphs[start + t]);
        if (!u.connected())
            throw ValidationError("connectivity window [" + std::to_string(start) + ", " +
                                  std::to_string(start + q - 1) + "] is not connected");
    }
}

}  // namespace incsub
