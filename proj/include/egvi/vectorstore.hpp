#pragma once

// Pre-trained word embeddings: loading, lookup and exact cosine k-NN search.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "egvi/simd/kernels.hpp"

namespace egvi {

using WordId = std::uint32_t;

inline constexpr std::size_t kDefaultVocabLimit = 100'000;

struct Neighbor {
    WordId word_id;
    double score;  // cosine

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Total order used for every neighbor list: score descending, then word id
// ascending.
inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word_id < b.word_id;
}

// Frequency-ordered vocabulary with unit-normalized float rows. Immutable once
// constructed; safe to share across threads.
class EmbeddingMatrix {
  public:
    EmbeddingMatrix() = default;

    // `data` holds words.size() * dim components, row-major. Rows are
    // normalized here. Throws ParseError on duplicate words and ZeroVector on
    // zero rows.
    EmbeddingMatrix(std::vector<std::string> words, std::size_t dim, std::vector<float> data);

    std::size_t size() const noexcept { return words_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return words_.empty(); }

    const std::string& word(WordId id) const { return words_.at(id); }
    const std::vector<std::string>& words() const noexcept { return words_; }

    std::span<const float> row(WordId id) const {
        return {data_.data() + static_cast<std::size_t>(id) * dim_, dim_};
    }
    std::span<const float> data() const noexcept { return data_; }
    // L2 norm of the stored (float) row, evaluated in double.
    double row_norm(WordId id) const { return row_norms_.at(id); }

    // Exact match only.
    std::optional<WordId> find_exact(std::string_view word) const;
    // Exact match, then one retry with the lowercased word.
    std::optional<WordId> find(std::string_view word) const;
    // As find(), throwing OutOfVocabulary on a miss.
    WordId id(std::string_view word) const;
    std::span<const float> vector(std::string_view word) const { return row(id(word)); }

  private:
    std::vector<std::string> words_;
    std::size_t dim_ = 0;
    std::vector<float> data_;
    std::vector<double> row_norms_;
    std::unordered_map<std::string, WordId> index_;
};

// word2vec text format: "<count> <dim>" header, then "<word> <v1> ... <vdim>".
// Keeps the first `limit` rows. LF or CRLF.
EmbeddingMatrix load_embeddings(std::istream& in, std::size_t limit = kDefaultVocabLimit);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                std::size_t limit = kDefaultVocabLimit);
void save_embeddings(const EmbeddingMatrix& matrix, std::ostream& out);

// Scales v to unit L2 norm. Vectors already within 5e-7 of unit norm are left
// untouched, which makes the operation idempotent bit-for-bit.
void normalize(std::span<float> v);

double norm(std::span<const float> v);
double norm(std::span<const double> v);

// Throws ZeroVector if either argument is zero.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

struct SearchOptions {
    // nullptr selects simd::active().
    const simd::Kernels* kernels = nullptr;
    // Row shards scanned concurrently; 0 = hardware concurrency.
    unsigned threads = 1;
};

struct KnnQuery {
    std::vector<float> vector;
    std::vector<WordId> exclude;
};

// Exact brute-force search. Returns min(k, |V| - |exclude ∩ V|) neighbors
// ordered by ranks_before. Throws ZeroVector for a zero query.
std::vector<Neighbor> top_k(const EmbeddingMatrix& matrix, std::span<const float> query,
                            std::size_t k, std::span<const WordId> exclude = {},
                            const SearchOptions& options = {});

// Same result as calling top_k per query; scans the matrix once, tile by tile.
std::vector<std::vector<Neighbor>> top_k_batch(const EmbeddingMatrix& matrix,
                                               std::span<const KnnQuery> queries, std::size_t k,
                                               const SearchOptions& options = {});

}  // namespace egvi
