#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace incsub {

/// Undirected simple graph over agents 0..m-1 stored as sorted neighbour lists.
/// Neighbour lists never contain the agent itself.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t m) : adjacency_(m) {}

    static Graph from_edges(std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
    /// Directed neighbour lists as given, validated only for range and self loops.
    static Graph from_neighbor_lists(std::vector<std::vector<std::size_t>> lists);

    static Graph ring(std::size_t m);
    static Graph path(std::size_t m);
    static Graph complete(std::size_t m);
    static Graph star(std::size_t m);

    void add_edge(std::size_t i, std::size_t j);

    std::size_t size() const { return adjacency_.size(); }
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
    std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
    bool has_edge(std::size_t i, std::size_t j) const;
    std::size_t edge_count() const;
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;  // i < j

    bool symmetric() const;
    bool connected() const;

    /// Edge union of a and b.
    friend Graph graph_union(const Graph& a, const Graph& b);
    friend bool operator==(const Graph& a, const Graph& b) { return a.adjacency_ == b.adjacency_; }

    std::string describe() const;  // "1-2,2-3" with 1-based agents

private:
    std::vector<std::vector<std::size_t>> adjacency_;
};

}  // namespace incsub
