#pragma once

// Tokenization, context vectors, sense selection and max-sim relatedness.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egvi/inventory.hpp"
#include "egvi/vectorstore.hpp"

namespace egvi {

struct Token {
    std::string surface;
    // Code point offsets into the input, [start, end).
    std::size_t start = 0;
    std::size_t end = 0;
    // Byte offsets into the UTF-8 input, [byte_start, byte_end).
    std::size_t byte_start = 0;
    std::size_t byte_end = 0;
    std::optional<WordId> word_id;

    friend bool operator==(const Token&, const Token&) = default;
};

// Splits on Unicode whitespace; leading and trailing punctuation code points
// become one-character tokens. Inner punctuation ("state-of-the-art") stays.
std::vector<Token> tokenize(std::string_view text);
// Also resolves word ids with the vocabulary lookup rule.
std::vector<Token> tokenize(std::string_view text, const EmbeddingMatrix& matrix);

// nullopt = the whole input; otherwise +/- radius tokens around the target.
using Window = std::optional<std::size_t>;

// Mean of the unit rows of in-vocabulary tokens in the window, target
// excluded. Throws NoContext when nothing is averaged.
std::vector<double> context_vector(const EmbeddingMatrix& matrix, std::span<const Token> tokens,
                                   std::size_t target, Window window = std::nullopt);

enum class SenseRepresentation {
    kShifted,  // lambda-shifted cluster centroid (inventory lambda)
    kKeyword,  // the keyword's own embedding
};

struct DisambiguationResult {
    std::size_t token_index = 0;
    std::size_t sense_id = 0;
    std::string keyword;
    double score = 0.0;   // cosine(context, sense)
    double margin = 0.0;  // score - runner-up, 0 for a single sense
    std::size_t n_senses = 0;
    // Set when no context was available and sense 0 was chosen by default.
    bool low_confidence = false;
};

// One vector per sense of `entry`, in sense-id order.
std::vector<std::vector<double>> sense_vectors(
    const EmbeddingMatrix& matrix, const SenseInventory& inventory, const InventoryEntry& entry,
    SenseRepresentation representation = SenseRepresentation::kShifted);

// Argmax of cosine(context, s_i); ties go to the smaller sense id.
DisambiguationResult disambiguate(const EmbeddingMatrix& matrix, const SenseInventory& inventory,
                                  std::string_view word, std::span<const double> context,
                                  SenseRepresentation representation = SenseRepresentation::kShifted);

struct TokenAnalysis {
    Token token;
    std::size_t n_senses = 0;  // 0 = no inventory entry
    bool ambiguous = false;    // n_senses >= 2
    std::optional<DisambiguationResult> sense;
};

struct DisambiguateOptions {
    Window window = std::nullopt;
    SenseRepresentation representation = SenseRepresentation::kShifted;
};

std::vector<TokenAnalysis> disambiguate_text(const EmbeddingMatrix& matrix,
                                             const SenseInventory& inventory,
                                             std::string_view text,
                                             const DisambiguateOptions& options = {});

// Maximum cosine over all pairs of sense vectors. A word without an inventory
// entry contributes its word vector as its only sense. Throws OutOfVocabulary
// if a word is in neither.
double relatedness(const EmbeddingMatrix& matrix, const SenseInventory& inventory,
                   std::string_view w1, std::string_view w2);

}  // namespace egvi
