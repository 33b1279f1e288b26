#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "halleval/text.hpp"

namespace halleval::embedding {

/// Fixed-dimension dense vector. Providers hand these out L2-normalized.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

double dot(const EmbeddingVector& a, const EmbeddingVector& b);
double norm(const EmbeddingVector& v);
/// Cosine similarity; 0 when either vector has zero norm.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);
/// Scales to unit L2 norm in place; zero vectors are left untouched.
void normalize(EmbeddingVector& v);

/// Source of dense vectors for token sequences. Implementations must return
/// unit-norm vectors and be safe for concurrent calls, or serialize them
/// internally.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::size_t dimension() const = 0;

    /// One unit-norm vector per token; output length equals input length.
    virtual std::vector<EmbeddingVector> embed_tokens(const text::TokenSequence& seq) = 0;

    /// Single unit-norm vector for the whole sequence.
    virtual EmbeddingVector embed_sequence(const text::TokenSequence& seq) = 0;
};

/// Deterministic offline baseline: hashed term-frequency vectors. Each token
/// surface hashes to a bucket; sequence vectors accumulate counts and are
/// L2-normalized, so they are invariant under token reordering.
class HashedTfProvider : public EmbeddingProvider {
public:
    explicit HashedTfProvider(std::size_t dimension = 256);

    std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_tokens(const text::TokenSequence& seq) override;
    EmbeddingVector embed_sequence(const text::TokenSequence& seq) override;

    std::size_t bucket(const std::string& surface) const;

private:
    std::size_t dimension_;
};

/// Test double: explicit per-surface vectors. Unknown surfaces throw.
class FixedVectorProvider : public EmbeddingProvider {
public:
    FixedVectorProvider(std::size_t dimension,
                        std::unordered_map<std::string, EmbeddingVector> vectors);

    std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_tokens(const text::TokenSequence& seq) override;
    EmbeddingVector embed_sequence(const text::TokenSequence& seq) override;

private:
    std::size_t dimension_;
    std::unordered_map<std::string, EmbeddingVector> vectors_;
};

}  // namespace halleval::embedding
