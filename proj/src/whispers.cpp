#include "egvi/whispers.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "egvi/random.hpp"

namespace egvi {

void WeightedGraph::add_edge(std::size_t u, std::size_t v, double weight) {
    if (u >= size() || v >= size()) throw std::invalid_argument("add_edge: vertex out of range");
    if (u == v) throw std::invalid_argument("add_edge: self-loop");
    if (!(weight >= 0.0)) throw std::invalid_argument("add_edge: negative weight");
    adjacency_[u].emplace_back(v, weight);
    adjacency_[v].emplace_back(u, weight);
}

bool propagate_labels(const WeightedGraph& graph, std::span<std::size_t> labels,
                      std::span<const std::size_t> order) {
    // Labels are vertex ids, so a dense score table indexed by label works.
    std::vector<double> score(graph.size(), 0.0);
    std::vector<std::size_t> touched;
    bool changed = false;
    for (std::size_t v : order) {
        const auto& adj = graph.adjacent(v);
        if (adj.empty()) continue;
        touched.clear();
        for (auto [u, w] : adj) {
            const std::size_t label = labels[u];
            if (score[label] == 0.0 &&
                std::find(touched.begin(), touched.end(), label) == touched.end()) {
                touched.push_back(label);
            }
            score[label] += w;
        }
        std::size_t best = touched.front();
        for (std::size_t label : touched) {
            if (score[label] > score[best] || (score[label] == score[best] && label < best)) {
                best = label;
            }
        }
        for (std::size_t label : touched) score[label] = 0.0;
        if (labels[v] != best) {
            labels[v] = best;
            changed = true;
        }
    }
    return changed;
}

std::vector<std::vector<std::size_t>> clusters_from_labels(std::span<const std::size_t> labels) {
    std::map<std::size_t, std::size_t> slot_of_label;
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t v = 0; v < labels.size(); ++v) {
        auto [it, inserted] = slot_of_label.emplace(labels[v], clusters.size());
        if (inserted) clusters.emplace_back();
        clusters[it->second].push_back(v);
    }
    return clusters;
}

Clustering chinese_whispers(const WeightedGraph& graph, std::uint64_t seed,
                            std::size_t max_iter) {
    Clustering result;
    const std::size_t n = graph.size();
    if (n == 0) {
        result.converged = true;
        return result;
    }
    std::vector<std::size_t> labels(n);
    std::iota(labels.begin(), labels.end(), 0);
    std::vector<std::size_t> order(n);
    std::mt19937_64 rng(seed);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        shuffle(std::span(order), rng);
        ++result.iterations_run;
        if (!propagate_labels(graph, labels, order)) {
            result.converged = true;
            break;
        }
    }
    result.clusters = clusters_from_labels(labels);
    return result;
}

}  // namespace egvi
