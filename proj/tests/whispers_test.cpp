#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <map>
#include <set>

#include "egvi/whispers.hpp"

using namespace egvi;

namespace {

WeightedGraph two_cliques_with_bridge() {
    WeightedGraph g(10);
    for (std::size_t base : {0u, 5u}) {
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j) g.add_edge(base + i, base + j, 1.0);
    }
    g.add_edge(4, 5, 0.1);
    return g;
}

WeightedGraph random_graph(std::mt19937_64& rng, std::size_t n, double density) {
    WeightedGraph g(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < density) g.add_edge(i, j, u(rng));
    return g;
}

void expect_partition(const Clustering& c, std::size_t n) {
    std::vector<int> seen(n, 0);
    for (const auto& cluster : c.clusters) {
        EXPECT_FALSE(cluster.empty());
        for (std::size_t v : cluster) {
            ASSERT_LT(v, n);
            ++seen[v];
        }
    }
    for (std::size_t v = 0; v < n; ++v) EXPECT_EQ(seen[v], 1) << "vertex " << v;
    EXPECT_LE(c.clusters.size(), n);
}

// Brute-force sweep over a dense weight matrix (0 = no edge).
std::vector<std::size_t> oracle_sweep(const std::vector<std::vector<double>>& w,
                                      std::vector<std::size_t> labels,
                                      const std::vector<std::size_t>& order) {
    const std::size_t n = w.size();
    for (std::size_t v : order) {
        std::vector<double> sum(n, 0.0);
        bool any = false;
        for (std::size_t u = 0; u < n; ++u) {
            if (w[v][u] > 0) {
                sum[labels[u]] += w[v][u];
                any = true;
            }
        }
        if (!any) continue;
        std::size_t best = n;
        for (std::size_t l = 0; l < n; ++l) {
            bool present = false;
            for (std::size_t u = 0; u < n; ++u) present |= w[v][u] > 0 && labels[u] == l;
            if (present && (best == n || sum[l] > sum[best])) best = l;
        }
        labels[v] = best;
    }
    return labels;
}

std::set<std::set<std::size_t>> as_partition(const std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::set<std::size_t>> groups;
    for (std::size_t v = 0; v < labels.size(); ++v) groups[labels[v]].insert(v);
    std::set<std::set<std::size_t>> out;
    for (auto& [l, g] : groups) out.insert(g);
    return out;
}

}  // namespace

TEST(ChineseWhispers, EmptyGraph) {
    auto c = chinese_whispers(WeightedGraph(0), 0);
    EXPECT_TRUE(c.clusters.empty());
    EXPECT_TRUE(c.converged);
}

TEST(ChineseWhispers, SingleVertex) {
    auto c = chinese_whispers(WeightedGraph(1), 0);
    ASSERT_EQ(c.clusters.size(), 1u);
    EXPECT_EQ(c.clusters[0], std::vector<std::size_t>{0});
    EXPECT_TRUE(c.converged);
}

TEST(ChineseWhispers, NoEdgesGivesSingletons) {
    auto c = chinese_whispers(WeightedGraph(7), 3);
    EXPECT_EQ(c.clusters.size(), 7u);
    EXPECT_EQ(c.iterations_run, 1u);
}

// Every visit order of a-b-c ends with one label: whichever endpoint moves
// first copies b, and b then sees a single label.
TEST(ChineseWhispers, PathCollapsesToOneCluster) {
    WeightedGraph g(3);
    g.add_edge(0, 1, 1.0);
    g.add_edge(1, 2, 1.0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto c = chinese_whispers(g, seed);
        ASSERT_EQ(c.clusters.size(), 1u) << "seed " << seed;
        EXPECT_TRUE(c.converged);
    }
}

TEST(ChineseWhispers, TwoCliquesSplitAtTheBridge) {
    const auto g = two_cliques_with_bridge();
    const std::vector<std::vector<std::size_t>> expected{{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto c = chinese_whispers(g, seed, 20);
        if (c.converged && c.clusters == expected) ++good;
    }
    EXPECT_GE(good, 95);
}

TEST(ChineseWhispers, PartitionOnRandomGraphs) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        auto g = random_graph(rng, n, (rng() % 100) / 100.0);
        expect_partition(chinese_whispers(g, rng(), 1 + rng() % 30), n);
    }
}

TEST(ChineseWhispers, DeterministicForFixedSeed) {
    std::mt19937_64 rng(8);
    auto g = random_graph(rng, 80, 0.1);
    const auto first = chinese_whispers(g, 1234);
    for (int run = 0; run < 10; ++run) EXPECT_EQ(chinese_whispers(g, 1234), first);
}

TEST(WeightedGraph, RejectsInvalidEdges) {
    WeightedGraph g(3);
    EXPECT_THROW(g.add_edge(0, 1, -0.5), std::invalid_argument);
    EXPECT_THROW(g.add_edge(1, 1, 1.0), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 3, 1.0), std::invalid_argument);
}

// One sweep under every visit order, checked against the brute-force sweep;
// then relabeling the vertices and permuting the order the same way must give
// the same partition under the relabeling. Weights are distinct random reals
// so no tie-break is ever exercised.
TEST(PropagateLabels, MatchesOracleAndIsRepresentationIndependent) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (std::size_t n = 2; n <= 6; ++n) {
        std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
        WeightedGraph g(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng() % 3 != 0) {
                    w[i][j] = w[j][i] = u(rng);
                    g.add_edge(i, j, w[i][j]);
                }
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);  // vertex v -> perm[v]
        std::vector<std::vector<double>> pw(n, std::vector<double>(n, 0.0));
        WeightedGraph pg(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (w[i][j] > 0) {
                    pw[perm[i]][perm[j]] = pw[perm[j]][perm[i]] = w[i][j];
                    pg.add_edge(perm[i], perm[j], w[i][j]);
                }

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        do {
            std::vector<std::size_t> labels(n);
            std::iota(labels.begin(), labels.end(), 0);
            propagate_labels(g, labels, order);
            std::vector<std::size_t> init(n);
            std::iota(init.begin(), init.end(), 0);
            ASSERT_EQ(labels, oracle_sweep(w, init, order));

            std::vector<std::size_t> plabels(n), porder(n);
            std::iota(plabels.begin(), plabels.end(), 0);
            for (std::size_t i = 0; i < n; ++i) porder[i] = perm[order[i]];
            propagate_labels(pg, plabels, porder);
            std::vector<std::size_t> pulled(n);
            for (std::size_t v = 0; v < n; ++v) pulled[v] = plabels[perm[v]];
            EXPECT_EQ(as_partition(pulled), as_partition(labels));
        } while (std::next_permutation(order.begin(), order.end()));
    }
}
