#pragma once

// Anti-edge filtered ego-graph around a target word.
//
// 1. N = top-N neighbors of the ego word w.
// 2. For every w_i in N, delta_i = w - w_i.
// 3. The anti-pair of w_i is the nearest word to delta_i (excluding w and w_i).
// 4. V keeps w_i and its anti-pair only when the anti-pair is itself in N.
// 5. E links each vertex to those of its K nearest neighbors that are also
//    vertices, except across an anti-edge.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "egvi/vectorstore.hpp"

namespace egvi {

struct AntiEdge {
    WordId member;
    WordId anti;

    friend bool operator==(const AntiEdge&, const AntiEdge&) = default;
};

// Undirected, stored with a < b.
struct Edge {
    WordId a;
    WordId b;
    double weight;  // max(cosine, 0)

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct EgoGraph {
    WordId ego = 0;
    std::size_t n_param = 0;
    std::size_t k_param = 0;
    std::vector<Neighbor> neighbors;  // top-N list of the ego word
    std::vector<WordId> vertices;     // in neighbor-rank order
    std::vector<Edge> edges;          // sorted by (a, b)
    std::vector<AntiEdge> anti_edges; // one per kept neighbor, duplicates allowed

    // No neighbor had its anti-pair inside the neighbor list.
    bool empty() const noexcept { return vertices.empty(); }

    friend bool operator==(const EgoGraph&, const EgoGraph&) = default;
};

struct EgoGraphOptions {
    // How many nearest neighbors of delta_i are considered for the anti-pair;
    // the best-ranked one inside N is taken. 1 = plain top-1.
    std::size_t anti_pair_depth = 1;
    SearchOptions search{};
};

// Top-1 neighbor of vector(ego) - vector(member), excluding both words.
// Throws DegenerateDelta when the two rows are identical.
WordId anti_pair(const EmbeddingMatrix& matrix, WordId ego, WordId member,
                 const SearchOptions& search = {});

// Requires n >= 2, k >= 1. An empty result (no vertices) is a valid outcome.
EgoGraph build_ego_graph(const EmbeddingMatrix& matrix, WordId ego, std::size_t n,
                         std::size_t k, const EgoGraphOptions& options = {});

// Graphviz dump. Anti-edges are drawn dashed red. When `cluster_of` is given
// (one entry per vertex, in vertex order) vertices are filled by cluster.
void write_dot(const EgoGraph& graph, const EmbeddingMatrix& matrix, std::ostream& out,
               std::span<const std::size_t> cluster_of = {});

}  // namespace egvi
