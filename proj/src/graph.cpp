#include "incsub/graph.hpp"

#include <algorithm>
#include <iterator>

#include "incsub/errors.hpp"

namespace incsub {

Graph Graph::from_edges(std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    Graph g(m);
    for (auto [i, j] : edges) g.add_edge(i, j);
    return g;
}

Graph Graph::from_neighbor_lists(std::vector<std::vector<std::size_t>> lists) {
    Graph g;
    const std::size_t m = lists.size();
    for (std::size_t i = 0; i < m; ++i) {
        auto& l = lists[i];
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        for (auto j : l) {
            if (j >= m) throw InvalidArgument("neighbor index out of range");
            if (j == i) throw InvalidArgument("agent " + std::to_string(i + 1) + " lists itself as a neighbor");
        }
    }
    g.adjacency_ = std::move(lists);
    return g;
}

void Graph::add_edge(std::size_t i, std::size_t j) {
    const std::size_t m = size();
    if (i >= m || j >= m) throw InvalidArgument("edge endpoint out of range");
    if (i == j) throw InvalidArgument("self loops are not neighbor relations");
    auto insert = [](std::vector<std::size_t>& l, std::size_t v) {
        auto it = std::lower_bound(l.begin(), l.end(), v);
        if (it == l.end() || *it != v) l.insert(it, v);
    };
    insert(adjacency_[i], j);
    insert(adjacency_[j], i);
}

Graph Graph::ring(std::size_t m) {
    Graph g(m);
    if (m < 2) return g;
    for (std::size_t i = 0; i + 1 < m; ++i) g.add_edge(i, i + 1);
    if (m > 2) g.add_edge(m - 1, 0);
    return g;
}

Graph Graph::path(std::size_t m) {
    Graph g(m);
    for (std::size_t i = 0; i + 1 < m; ++i) g.add_edge(i, i + 1);
    return g;
}

Graph Graph::complete(std::size_t m) {
    Graph g(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) g.add_edge(i, j);
    return g;
}

Graph Graph::star(std::size_t m) {
    Graph g(m);
    for (std::size_t j = 1; j < m; ++j) g.add_edge(0, j);
    return g;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
    const auto& l = adjacency_[i];
    return std::binary_search(l.begin(), l.end(), j);
}

std::size_t Graph::edge_count() const {
    std::size_t total = 0;
    for (const auto& l : adjacency_) total += l.size();
    return total / 2;
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < size(); ++i)
        for (auto j : adjacency_[i])
            if (i < j) out.emplace_back(i, j);
    return out;
}

bool Graph::symmetric() const {
    for (std::size_t i = 0; i < size(); ++i)
        for (auto j : adjacency_[i])
            if (!has_edge(j, i)) return false;
    return true;
}

bool Graph::connected() const {
    const std::size_t m = size();
    if (m <= 1) return true;
    // Strong connectivity of the directed edge set: reach everything from 0
    // forwards and backwards.
    auto reach_all = [&](bool reverse) {
        std::vector<std::vector<std::size_t>> rev;
        if (reverse) {
            rev.resize(m);
            for (std::size_t i = 0; i < m; ++i)
                for (auto j : adjacency_[i]) rev[j].push_back(i);
        }
        const auto& adj = reverse ? rev : adjacency_;
        std::vector<char> seen(m, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (auto w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == m;
    };
    return reach_all(false) && reach_all(true);
}

Graph graph_union(const Graph& a, const Graph& b) {
    if (a.size() != b.size()) throw InvalidArgument("graph union: size mismatch");
    Graph g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto& out = g.adjacency_[i];
        std::set_union(a.adjacency_[i].begin(), a.adjacency_[i].end(), b.adjacency_[i].begin(),
                       b.adjacency_[i].end(), std::back_inserter(out));
    }
    return g;
}

std::string Graph::describe() const {
    std::string s;
    for (auto [i, j] : edges()) {
        if (!s.empty()) s += ',';
        s += std::to_string(i + 1) + "-" + std::to_string(j + 1);
    }
    return s;
}

}  // namespace incsub
