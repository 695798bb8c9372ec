#pragma once

// Sense induction over ego-graphs and the persisted sense inventory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "egvi/egograph.hpp"
#include "egvi/vectorstore.hpp"
#include "egvi/whispers.hpp"

namespace egvi {

inline constexpr std::size_t kDefaultNeighbors = 200;
inline constexpr double kDefaultLambda = 0.5;

struct InduceParams {
    std::size_t n = kDefaultNeighbors;
    std::size_t k = kDefaultNeighbors;
    std::uint64_t seed = 0;
    std::size_t min_size = 1;
    std::size_t max_iter = kDefaultMaxIterations;
    EgoGraphOptions graph{};
};

// One induced sense, in matrix ids.
struct SenseCluster {
    std::size_t sense_id = 0;
    WordId keyword = 0;
    // (word, cosine(ego, word)), weight descending then id ascending.
    std::vector<std::pair<WordId, double>> members;

    friend bool operator==(const SenseCluster&, const SenseCluster&) = default;
};

// Number of anti-edge entries (with multiplicity) touching v.
std::size_t count_anti_edges(std::span<const AntiEdge> anti_edges, WordId v);

// Member with the most anti-edges; ties by higher cosine to the ego word, then
// smaller id. `members` must be non-empty.
WordId select_keyword(std::span<const WordId> members, std::span<const AntiEdge> anti_edges,
                      const EmbeddingMatrix& matrix, WordId ego);

// s = lambda * w + (1 - lambda) / n * sum_u cos(w, u) * u, not re-normalized.
std::vector<double> sense_vector(const EmbeddingMatrix& matrix, WordId ego,
                                 std::span<const WordId> members, double lambda);

// Clusters an already built ego-graph into senses; applies min_size and the
// single-sense fallback.
std::vector<SenseCluster> senses_from_graph(const EmbeddingMatrix& matrix, const EgoGraph& graph,
                                            std::uint64_t seed, std::size_t min_size,
                                            std::size_t max_iter = kDefaultMaxIterations);

// build_ego_graph + chinese_whispers + keyword selection. `params.seed` is used
// as given. Never returns an empty list.
std::vector<SenseCluster> induce_senses(const EmbeddingMatrix& matrix, WordId ego,
                                        const InduceParams& params);

// ---------------------------------------------------------------------------
// Persisted inventory (words as strings, independent of matrix ids).

struct InventoryParams {
    std::string lang = "und";
    std::size_t n = kDefaultNeighbors;
    std::size_t k = kDefaultNeighbors;
    double lambda = kDefaultLambda;
    std::size_t vocab = kDefaultVocabLimit;
    std::uint64_t seed = 0;
    std::string source;

    friend bool operator==(const InventoryParams&, const InventoryParams&) = default;
};

struct SenseMember {
    std::string word;
    double weight;

    friend bool operator==(const SenseMember&, const SenseMember&) = default;
};

struct InventorySense {
    std::size_t sense_id = 0;
    std::string keyword;
    std::vector<SenseMember> members;

    friend bool operator==(const InventorySense&, const InventorySense&) = default;
};

struct InventoryEntry {
    std::string word;
    std::vector<InventorySense> senses;

    friend bool operator==(const InventoryEntry&, const InventoryEntry&) = default;
};

class SenseInventory {
  public:
    SenseInventory() = default;
    explicit SenseInventory(InventoryParams params) : params_(std::move(params)) {}

    const InventoryParams& params() const noexcept { return params_; }
    const std::vector<InventoryEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    // Throws on duplicates, empty sense lists, or gaps in sense ids.
    void add(InventoryEntry entry);

    // Exact match, then lowercase retry (the vocabulary lookup rule).
    const InventoryEntry* find(std::string_view word) const;

    friend bool operator==(const SenseInventory& a, const SenseInventory& b) {
        return a.params_ == b.params_ && a.entries_ == b.entries_;
    }

  private:
    InventoryParams params_;
    std::vector<InventoryEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Converts matrix-id senses to an entry. Weights are rounded to the 6 decimals
// the file keeps, so a saved and reloaded inventory compares equal. Throws
// Error if any word contains a tab, comma, colon or newline.
InventoryEntry to_entry(const EmbeddingMatrix& matrix, WordId ego,
                        std::span<const SenseCluster> senses);

// Sense vector of a persisted sense against `matrix`. Throws OutOfVocabulary
// when the inventory does not match the matrix.
std::vector<double> sense_vector(const EmbeddingMatrix& matrix, std::string_view word,
                                 const InventorySense& sense, double lambda);

void save_inventory(const SenseInventory& inventory, std::ostream& out);
void save_inventory(const SenseInventory& inventory, const std::filesystem::path& path);
SenseInventory load_inventory(std::istream& in);
SenseInventory load_inventory(const std::filesystem::path& path);

struct BuildOptions {
    unsigned jobs = 0;  // 0 = hardware concurrency
    // Empty disables checkpointing. An existing checkpoint with matching params
    // is resumed from; it is removed after a successful build.
    std::filesystem::path checkpoint;
    std::size_t checkpoint_every = 1000;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

struct BuildFailure {
    std::string word;
    std::string message;
};

struct BuildReport {
    SenseInventory inventory;
    std::vector<BuildFailure> failures;
    std::size_t resumed = 0;
};

// Induces senses for every word in `words` (empty span = whole vocabulary).
// Word i uses seed mix_seed(params.seed, id). Per-word errors are collected.
BuildReport build_inventory(const EmbeddingMatrix& matrix, std::span<const std::string> words,
                            const InventoryParams& meta, const InduceParams& params,
                            const BuildOptions& options = {});

}  // namespace egvi
