#include "egvi/disambig.hpp"

#include <algorithm>
#include <limits>

#include "egvi/errors.hpp"
#include "egvi/text.hpp"

namespace egvi {
namespace {

struct CodePoint {
    char32_t value;
    std::size_t byte_start;
    std::size_t byte_end;
};

Token make_token(std::string_view text, std::span<const CodePoint> cps, std::size_t first,
                 std::size_t last) {
    Token t;
    t.start = first;
    t.end = last;
    t.byte_start = cps[first].byte_start;
    t.byte_end = cps[last - 1].byte_end;
    t.surface = std::string(text.substr(t.byte_start, t.byte_end - t.byte_start));
    return t;
}

std::vector<std::vector<double>> word_as_senses(const EmbeddingMatrix& matrix,
                                                std::string_view word) {
    auto row = matrix.vector(word);
    return {std::vector<double>(row.begin(), row.end())};
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<CodePoint> cps;
    for (std::size_t pos = 0; pos < text.size();) {
        const std::size_t begin = pos;
        const char32_t cp = text::next_code_point(text, pos);
        cps.push_back({cp, begin, pos});
    }
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < cps.size()) {
        if (text::is_whitespace(cps[i].value)) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < cps.size() && !text::is_whitespace(cps[end].value)) ++end;
        std::size_t lo = i;
        std::size_t hi = end;
        while (lo < hi && text::is_punctuation(cps[lo].value)) {
            tokens.push_back(make_token(text, cps, lo, lo + 1));
            ++lo;
        }
        std::size_t trail = hi;
        while (trail > lo && text::is_punctuation(cps[trail - 1].value)) --trail;
        if (lo < trail) tokens.push_back(make_token(text, cps, lo, trail));
        for (std::size_t p = trail; p < hi; ++p) tokens.push_back(make_token(text, cps, p, p + 1));
        i = end;
    }
    return tokens;
}

std::vector<Token> tokenize(std::string_view text, const EmbeddingMatrix& matrix) {
    auto tokens = tokenize(text);
    for (auto& t : tokens) t.word_id = matrix.find(t.surface);
    return tokens;
}

std::vector<double> context_vector(const EmbeddingMatrix& matrix, std::span<const Token> tokens,
                                   std::size_t target, Window window) {
    if (target >= tokens.size()) throw Error("context_vector: target index out of range");
    std::size_t first = 0;
    std::size_t last = tokens.size();
    if (window) {
        first = target > *window ? target - *window : 0;
        last = std::min(tokens.size(), target + *window + 1);
    }
    std::vector<double> sum(matrix.dim(), 0.0);
    std::size_t n = 0;
    for (std::size_t j = first; j < last; ++j) {
        if (j == target || !tokens[j].word_id) continue;
        const auto row = matrix.row(*tokens[j].word_id);
        for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += row[d];
        ++n;
    }
    if (n == 0) throw NoContext("no in-vocabulary context for '" + tokens[target].surface + "'");
    for (double& x : sum) x /= static_cast<double>(n);
    return sum;
}

std::vector<std::vector<double>> sense_vectors(const EmbeddingMatrix& matrix,
                                               const SenseInventory& inventory,
                                               const InventoryEntry& entry,
                                               SenseRepresentation representation) {
    std::vector<std::vector<double>> out;
    out.reserve(entry.senses.size());
    for (const auto& sense : entry.senses) {
        if (representation == SenseRepresentation::kKeyword) {
            auto row = matrix.vector(sense.keyword);
            out.emplace_back(row.begin(), row.end());
        } else {
            out.push_back(sense_vector(matrix, entry.word, sense, inventory.params().lambda));
        }
    }
    return out;
}

DisambiguationResult disambiguate(const EmbeddingMatrix& matrix, const SenseInventory& inventory,
                                  std::string_view word, std::span<const double> context,
                                  SenseRepresentation representation) {
    const InventoryEntry* entry = inventory.find(word);
    if (!entry) throw OutOfInventory(std::string(word));
    const auto vectors = sense_vectors(matrix, inventory, *entry, representation);

    DisambiguationResult result;
    result.n_senses = vectors.size();
    double best = -std::numeric_limits<double>::infinity();
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const double score = cosine(context, std::span<const double>(vectors[i]));
        if (score > best) {
            runner_up = best;
            best = score;
            result.sense_id = i;
        } else if (score > runner_up) {
            runner_up = score;
        }
    }
    result.score = best;
    result.margin = vectors.size() > 1 ? best - runner_up : 0.0;
    result.keyword = entry->senses[result.sense_id].keyword;
    return result;
}

std::vector<TokenAnalysis> disambiguate_text(const EmbeddingMatrix& matrix,
                                             const SenseInventory& inventory,
                                             std::string_view text,
                                             const DisambiguateOptions& options) {
    auto tokens = tokenize(text, matrix);
    std::vector<TokenAnalysis> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        TokenAnalysis analysis;
        analysis.token = tokens[i];
        const InventoryEntry* entry = inventory.find(tokens[i].surface);
        if (entry) {
            analysis.n_senses = entry->senses.size();
            analysis.ambiguous = analysis.n_senses >= 2;
        }
        if (analysis.ambiguous) {
            DisambiguationResult r;
            try {
                const auto context = context_vector(matrix, tokens, i, options.window);
                r = disambiguate(matrix, inventory, tokens[i].surface, context,
                                 options.representation);
            } catch (const Error& e) {
                // NoContext, or a context that averages to zero.
                if (!dynamic_cast<const NoContext*>(&e) && !dynamic_cast<const ZeroVector*>(&e)) {
                    throw;
                }
                r = DisambiguationResult{};
                r.sense_id = 0;
                r.keyword = entry->senses.front().keyword;
                r.n_senses = entry->senses.size();
                r.low_confidence = true;
            }
            r.token_index = i;
            analysis.sense = std::move(r);
        }
        out.push_back(std::move(analysis));
    }
    return out;
}

double relatedness(const EmbeddingMatrix& matrix, const SenseInventory& inventory,
                   std::string_view w1, std::string_view w2) {
    auto senses_of = [&](std::string_view w) {
        if (const auto* entry = inventory.find(w)) return sense_vectors(matrix, inventory, *entry);
        return word_as_senses(matrix, w);
    };
    const auto a = senses_of(w1);
    const auto b = senses_of(w2);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& sa : a) {
        for (const auto& sb : b) {
            best = std::max(best, cosine(std::span<const double>(sa), std::span<const double>(sb)));
        }
    }
    return best;
}

}  // namespace egvi
