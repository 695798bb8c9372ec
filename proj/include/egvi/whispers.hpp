#pragma once

// Chinese Whispers label propagation (Biemann 2006) with seeded visit order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace egvi {

inline constexpr std::size_t kDefaultMaxIterations = 20;

class WeightedGraph {
  public:
    explicit WeightedGraph(std::size_t n = 0) : adjacency_(n) {}

    std::size_t size() const noexcept { return adjacency_.size(); }

    // Undirected. Throws std::invalid_argument on negative weight, self-loop or
    // out-of-range vertex.
    void add_edge(std::size_t u, std::size_t v, double weight);

    const std::vector<std::pair<std::size_t, double>>& adjacent(std::size_t v) const {
        return adjacency_[v];
    }

  private:
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

struct Clustering {
    // Disjoint, covering all vertices. Ordered by smallest member; members
    // ascending.
    std::vector<std::vector<std::size_t>> clusters;
    std::size_t iterations_run = 0;
    bool converged = false;

    friend bool operator==(const Clustering&, const Clustering&) = default;
};

// One sweep in `order`: every visited vertex with at least one neighbor takes
// the label of maximal summed incident weight; ties go to the smallest label.
// Updates are applied immediately. Returns true if any label changed.
bool propagate_labels(const WeightedGraph& graph, std::span<std::size_t> labels,
                      std::span<const std::size_t> order);

// Vertex v starts with label v. Each iteration visits vertices in a fresh
// seeded shuffle; stops after an iteration with no change or max_iter.
Clustering chinese_whispers(const WeightedGraph& graph, std::uint64_t seed,
                            std::size_t max_iter = kDefaultMaxIterations);

// Groups vertices by label into the canonical Clustering order.
std::vector<std::vector<std::size_t>> clusters_from_labels(std::span<const std::size_t> labels);

}  // namespace egvi
