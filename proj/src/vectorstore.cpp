#include "egvi/vectorstore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "egvi/errors.hpp"
#include "egvi/parallel.hpp"
#include "egvi/text.hpp"

namespace egvi {
namespace {

constexpr double kUnitTolerance = 5e-7;
constexpr std::size_t kTileRows = 256;

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

// Splits on single spaces; a single trailing space (common in word2vec dumps)
// is tolerated.
std::vector<std::string_view> split_spaces(std::string_view line) {
    if (!line.empty() && line.back() == ' ') line.remove_suffix(1);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t pos = line.find(' ', start);
        if (pos == std::string_view::npos) pos = line.size();
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

void push_candidate(std::vector<Neighbor>& heap, std::size_t k, const Neighbor& candidate) {
    if (heap.size() < k) {
        heap.push_back(candidate);
        std::push_heap(heap.begin(), heap.end(), ranks_before);
    } else if (ranks_before(candidate, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), ranks_before);
        heap.back() = candidate;
        std::push_heap(heap.begin(), heap.end(), ranks_before);
    }
}

// Scans rows [begin, end) for every query; heaps[q] collects query q's best k.
void scan_shard(const EmbeddingMatrix& matrix, std::span<const KnnQuery> queries,
                std::span<const double> query_norms,
                std::span<const std::vector<WordId>> sorted_excludes, std::size_t k,
                const simd::Kernels& kernels, std::size_t begin, std::size_t end,
                std::vector<std::vector<Neighbor>>& heaps) {
    const std::size_t dim = matrix.dim();
    const float* base = matrix.data().data();
    std::vector<double> dots(kTileRows);
    for (std::size_t tile = begin; tile < end; tile += kTileRows) {
        const std::size_t rows = std::min(kTileRows, end - tile);
        for (std::size_t q = 0; q < queries.size(); ++q) {
            kernels.dot_rows(base + tile * dim, rows, dim, queries[q].vector.data(), dots.data());
            auto& heap = heaps[q];
            const auto& excluded = sorted_excludes[q];
            for (std::size_t r = 0; r < rows; ++r) {
                const auto id = static_cast<WordId>(tile + r);
                Neighbor candidate{id, dots[r] / (query_norms[q] * matrix.row_norm(id))};
                if (heap.size() == k && !ranks_before(candidate, heap.front())) continue;
                if (std::binary_search(excluded.begin(), excluded.end(), id)) continue;
                push_candidate(heap, k, candidate);
            }
        }
    }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> words, std::size_t dim,
                                 std::vector<float> data)
    : words_(std::move(words)), dim_(dim), data_(std::move(data)) {
    if (dim_ == 0) throw Error("embedding dimension must be positive");
    if (data_.size() != words_.size() * dim_) {
        throw Error("embedding data size does not match words x dim");
    }
    index_.reserve(words_.size());
    row_norms_.resize(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        auto [it, inserted] = index_.emplace(words_[i], static_cast<WordId>(i));
        if (!inserted) throw ParseError("duplicate word '" + words_[i] + "'", 0);
        std::span<float> r(data_.data() + i * dim_, dim_);
        if (norm(r) == 0.0) throw ZeroVector("zero vector for word '" + words_[i] + "'");
        normalize(r);
        row_norms_[i] = norm(std::span<const float>(r));
    }
}

std::optional<WordId> EmbeddingMatrix::find_exact(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<WordId> EmbeddingMatrix::find(std::string_view word) const {
    if (auto id = find_exact(word)) return id;
    return find_exact(text::to_lower(word));
}

WordId EmbeddingMatrix::id(std::string_view word) const {
    if (auto found = find(word)) return *found;
    throw OutOfVocabulary(std::string(word));
}

EmbeddingMatrix load_embeddings(std::istream& in, std::size_t limit) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    strip_cr(line);
    auto header = split_spaces(line);
    std::size_t count = 0;
    std::size_t dim = 0;
    if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
        dim == 0) {
        throw ParseError("malformed header, expected '<count> <dim>'", 1);
    }
    const std::size_t wanted = std::min(count, limit);
    std::vector<std::string> words;
    std::vector<float> data;
    words.reserve(wanted);
    data.reserve(wanted * dim);
    std::unordered_map<std::string, std::size_t> seen;
    std::size_t line_no = 1;
    while (words.size() < wanted && std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        auto fields = split_spaces(line);
        if (fields.size() != dim + 1) {
            throw ParseError("expected " + std::to_string(dim) + " components, found " +
                                 std::to_string(fields.size() - 1),
                             line_no);
        }
        std::string word(fields[0]);
        if (word.empty()) throw ParseError("empty word", line_no);
        if (auto [it, inserted] = seen.emplace(word, line_no); !inserted) {
            throw ParseError("duplicate word '" + word + "' (first seen on line " +
                                 std::to_string(it->second) + ")",
                             line_no);
        }
        double sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            float value = 0.0f;
            if (!parse_number(fields[j + 1], value) || !std::isfinite(value)) {
                throw ParseError("bad component '" + std::string(fields[j + 1]) + "'", line_no);
            }
            sq += static_cast<double>(value) * value;
            data.push_back(value);
        }
        if (sq == 0.0) throw ZeroVector("zero vector for word '" + word + "'");
        words.push_back(std::move(word));
    }
    if (words.size() < wanted) {
        throw ParseError("header announces " + std::to_string(count) + " vectors, file has " +
                             std::to_string(words.size()),
                         line_no);
    }
    return EmbeddingMatrix(std::move(words), dim, std::move(data));
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::size_t limit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open embeddings file " + path.string());
    return load_embeddings(in, limit);
}

void save_embeddings(const EmbeddingMatrix& matrix, std::ostream& out) {
    out << matrix.size() << ' ' << matrix.dim() << '\n';
    char buf[64];
    for (WordId id = 0; id < matrix.size(); ++id) {
        out << matrix.word(id);
        for (float v : matrix.row(id)) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        out << '\n';
    }
}

double norm(std::span<const float> v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    return std::sqrt(sq);
}

double norm(std::span<const double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

void normalize(std::span<float> v) {
    const double n = norm(std::span<const float>(v));
    if (n == 0.0) throw ZeroVector("cannot normalize a zero vector");
    if (std::abs(n - 1.0) <= kUnitTolerance) return;
    for (float& x : v) x = static_cast<float>(x / n);
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine of a zero vector");
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine of a zero vector");
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

std::vector<Neighbor> top_k(const EmbeddingMatrix& matrix, std::span<const float> query,
                            std::size_t k, std::span<const WordId> exclude,
                            const SearchOptions& options) {
    KnnQuery q{{query.begin(), query.end()}, {exclude.begin(), exclude.end()}};
    return std::move(top_k_batch(matrix, std::span(&q, 1), k, options).front());
}

std::vector<std::vector<Neighbor>> top_k_batch(const EmbeddingMatrix& matrix,
                                               std::span<const KnnQuery> queries, std::size_t k,
                                               const SearchOptions& options) {
    if (k == 0) throw Error("top_k: k must be positive");
    std::vector<double> query_norms(queries.size());
    std::vector<std::vector<WordId>> excludes(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        if (queries[q].vector.size() != matrix.dim()) throw Error("top_k: dimension mismatch");
        query_norms[q] = norm(std::span<const float>(queries[q].vector));
        if (query_norms[q] == 0.0) throw ZeroVector("top_k: zero query vector");
        excludes[q] = queries[q].exclude;
        std::sort(excludes[q].begin(), excludes[q].end());
    }
    const simd::Kernels& kernels = options.kernels ? *options.kernels : simd::active();

    const std::size_t n = matrix.size();
    const std::size_t shards =
        std::max<std::size_t>(1, std::min<std::size_t>(resolve_jobs(options.threads),
                                                       (n + kTileRows - 1) / kTileRows));
    std::vector<std::vector<std::vector<Neighbor>>> partial(
        shards, std::vector<std::vector<Neighbor>>(queries.size()));
    // Shard boundaries are tile-aligned; the merged result does not depend on
    // them because ranks_before is a strict total order.
    const std::size_t tiles = (n + kTileRows - 1) / kTileRows;
    parallel_for(shards, static_cast<unsigned>(shards), [&](std::size_t s) {
        const std::size_t begin = std::min(n, (tiles * s / shards) * kTileRows);
        const std::size_t end = std::min(n, (tiles * (s + 1) / shards) * kTileRows);
        scan_shard(matrix, queries, query_norms, excludes, k, kernels, begin, end, partial[s]);
    });

    std::vector<std::vector<Neighbor>> result(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        auto& out = result[q];
        for (auto& shard : partial) {
            out.insert(out.end(), shard[q].begin(), shard[q].end());
        }
        std::sort(out.begin(), out.end(), ranks_before);
        if (out.size() > k) out.resize(k);
    }
    return result;
}

}  // namespace egvi
