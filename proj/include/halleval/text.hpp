#pragma once

#include <cstddef>
#include <cstdint>
#include <compare>
#include <string>
#include <unordered_map>
#include <vector>

namespace halleval::text {

/// Raw UTF-8 text as it arrives from a corpus or an endpoint. May still
/// contain markup; run strip_html before tokenizing.
struct RawText {
    std::string content;

    bool operator==(const RawText&) const = default;
};

/// One normalized word. Produced only by tokenize(); never empty, never
/// contains whitespace.
struct Token {
    std::string surface;

    auto operator<=>(const Token&) const = default;
};

using TokenSequence = std::vector<Token>;

/// Controls the normalization applied during tokenization. Same config +
/// same input always yields the same output.
struct NormalizationConfig {
    bool lowercase = true;
    bool strip_punctuation = true;
    bool apply_stemming = false;

    bool operator==(const NormalizationConfig&) const = default;
};

/// Byte range [begin, end) of a token inside its source string.
struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const CharSpan&) const = default;
};

struct TokenizedText {
    TokenSequence tokens;
    std::vector<CharSpan> spans;  // one per token, byte offsets into the input
};

/// An n-gram over token surfaces.
using NGram = std::vector<std::string>;

struct NGramHash {
    std::size_t operator()(const NGram& g) const noexcept;
};

/// Multiset of n-grams of one fixed arity. Counts are always >= 1.
class NGramMultiset {
public:
    explicit NGramMultiset(std::size_t arity);

    std::size_t arity() const { return arity_; }
    /// Sum of all counts (multiset cardinality).
    std::size_t total() const { return total_; }
    bool empty() const { return total_ == 0; }
    std::size_t count(const NGram& g) const;

    void add(NGram g, std::size_t count = 1);

    /// Clipped intersection: each n-gram counted min(this, other) times.
    NGramMultiset clipped_intersection(const NGramMultiset& other) const;
    /// Multiset difference: counts saturate at zero.
    NGramMultiset minus(const NGramMultiset& other) const;

    const std::unordered_map<NGram, std::size_t, NGramHash>& entries() const {
        return entries_;
    }

private:
    std::size_t arity_;
    std::size_t total_ = 0;
    std::unordered_map<NGram, std::size_t, NGramHash> entries_;
};

/// Removes markup from text: tag spans (quote-aware), comments, script/style
/// bodies, and decodes common character entities. Best effort on malformed
/// input; text content and its order are preserved.
RawText strip_html(const RawText& raw);

/// Unicode-aware word segmentation on whitespace and punctuation boundaries,
/// with normalization per cfg. Empty input gives an empty sequence.
TokenSequence tokenize(const RawText& raw, const NormalizationConfig& cfg);

/// Same segmentation, but also reports the byte span of each token in the
/// input. Spans cover the original (pre-normalization) surface.
TokenizedText tokenize_with_spans(const RawText& raw, const NormalizationConfig& cfg);

/// All |seq| - n + 1 contiguous windows as a multiset; empty when |seq| < n.
/// Throws std::invalid_argument for n = 0.
NGramMultiset ngrams(const TokenSequence& seq, std::size_t n);

/// Light suffix-stripping stemmer for Italian-like inflection. Folds accented
/// vowels, then strips final a/e/i/o (with ch/gh digraph handling) while the
/// word stays >= 6 characters. Identity when no rule fires; idempotent.
Token stem(const Token& token);

/// Surfaces joined with single spaces.
std::string join_tokens(const TokenSequence& seq);

/// Number of Unicode code points in a UTF-8 string (invalid bytes count as
/// one code point each).
std::size_t codepoint_count(const std::string& utf8);

}  // namespace halleval::text
