#pragma once

// Word-similarity evaluation, inventory statistics and the synthetic
// planted-sense fixture used throughout the tests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egvi/inventory.hpp"
#include "egvi/vectorstore.hpp"

namespace egvi {

struct BenchmarkPair {
    std::string word1;
    std::string word2;
    double gold;

    friend bool operator==(const BenchmarkPair&, const BenchmarkPair&) = default;
};

struct Benchmark {
    std::string name;
    std::vector<BenchmarkPair> pairs;
};

// "word1\tword2\tscore" rows; '#' comments and blank lines skipped.
Benchmark load_benchmark(std::istream& in, std::string name);
Benchmark load_benchmark(const std::filesystem::path& path);
void save_benchmark(const Benchmark& benchmark, std::ostream& out);

// Throws DegenerateVariance when either side is constant, Error on size
// mismatch or fewer than two points.
double pearson(std::span<const double> xs, std::span<const double> ys);
// Pearson over average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct EvalReport {
    std::string benchmark;
    std::string mode;  // "senses" or "baseline"
    double pearson = 0.0;
    double spearman = 0.0;
    std::size_t n_pairs_used = 0;
    std::size_t n_pairs_total = 0;
    double coverage = 0.0;
};

// `inventory == nullptr` selects baseline mode (plain word-vector cosine).
// Pairs with an unresolvable word are dropped and lower the coverage.
EvalReport evaluate_similarity(const EmbeddingMatrix& matrix, const SenseInventory* inventory,
                               const Benchmark& benchmark);

nlohmann::json to_json(const EvalReport& report);
std::string to_table(const EvalReport& report);

struct InventoryStats {
    std::size_t words = 0;
    double mean = 0.0;
    double median = 0.0;
    std::size_t max = 0;
    std::map<std::size_t, std::size_t> histogram;  // senses per word -> words
};

// Over all entries, or only those listed in `restrict_to` (lookup rule applies;
// absent words are ignored). Throws Error when no entry is counted.
InventoryStats inventory_stats(const SenseInventory& inventory,
                               std::span<const std::string> restrict_to = {});

nlohmann::json to_json(const InventoryStats& stats);

// 16-dim embeddings: three orthogonal prototypes (e0, e1, e2), 20 members per
// prototype at normalize(prototype + 0.05 * p) where p has components uniform
// in [-1, 1] drawn from a SplitMix64 stream, and one ego word at
// normalize(e0 + e1 + e2). Word order: ego, then clusters 1, 2, 3.
struct PlantedFixture {
    static constexpr std::size_t kDim = 16;
    static constexpr std::size_t kClusters = 3;
    static constexpr std::size_t kMembersPerCluster = 20;
    static constexpr double kNoise = 0.05;

    EmbeddingMatrix matrix;
    std::string ego;
    // members[c] are the words of planted cluster c (0-based).
    std::vector<std::vector<std::string>> members;
    // Planted cluster per word id; -1 for the ego word.
    std::vector<int> label;
};

// Deterministic; throws if the intra/inter cluster separation check fails.
PlantedFixture make_planted_fixture(std::uint64_t stream_seed = 0x5eed);

// `n_pairs` distinct word pairs drawn from `matrix` with gold scores in
// [0, 10]; deterministic in `seed`.
Benchmark synthetic_benchmark(const EmbeddingMatrix& matrix, std::size_t n_pairs,
                              std::uint64_t seed);

}  // namespace egvi
