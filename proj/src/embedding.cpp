#include "halleval/embedding.hpp"

#include <cmath>
#include <stdexcept>

namespace halleval::embedding {

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw std::invalid_argument("embedding dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        acc += a.values[i] * b.values[i];
    }
    return acc;
}

double norm(const EmbeddingVector& v) {
    double acc = 0.0;
    for (const double x : v.values) acc += x * x;
    return std::sqrt(acc);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

void normalize(EmbeddingVector& v) {
    const double n = norm(v);
    if (n == 0.0) return;
    for (double& x : v.values) x /= n;
}

// ---------------------------------------------------------------------------
// HashedTfProvider
// ---------------------------------------------------------------------------

HashedTfProvider::HashedTfProvider(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) {
        throw std::invalid_argument("embedding dimension must be > 0");
    }
}

std::size_t HashedTfProvider::bucket(const std::string& surface) const {
    // FNV-1a, platform independent
    std::uint64_t h = 1469598103934665603ull;
    for (const char c : surface) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h % dimension_);
}

std::vector<EmbeddingVector> HashedTfProvider::embed_tokens(const text::TokenSequence& seq) {
    std::vector<EmbeddingVector> out;
    out.reserve(seq.size());
    for (const auto& tok : seq) {
        EmbeddingVector v{std::vector<double>(dimension_, 0.0)};
        v.values[bucket(tok.surface)] = 1.0;
        out.push_back(std::move(v));
    }
    return out;
}

EmbeddingVector HashedTfProvider::embed_sequence(const text::TokenSequence& seq) {
    EmbeddingVector v{std::vector<double>(dimension_, 0.0)};
    for (const auto& tok : seq) {
        v.values[bucket(tok.surface)] += 1.0;
    }
    normalize(v);
    return v;
}

// ---------------------------------------------------------------------------
// FixedVectorProvider
// ---------------------------------------------------------------------------

FixedVectorProvider::FixedVectorProvider(
    std::size_t dimension, std::unordered_map<std::string, EmbeddingVector> vectors)
    : dimension_(dimension), vectors_(std::move(vectors)) {
    for (auto& [surface, vec] : vectors_) {
        if (vec.dimension() != dimension_) {
            throw std::invalid_argument("fixed vector dimension mismatch for '" +
                                        surface + "'");
        }
        normalize(vec);
    }
}

std::vector<EmbeddingVector> FixedVectorProvider::embed_tokens(
    const text::TokenSequence& seq) {
    std::vector<EmbeddingVector> out;
    out.reserve(seq.size());
    for (const auto& tok : seq) {
        const auto it = vectors_.find(tok.surface);
        if (it == vectors_.end()) {
            throw std::out_of_range("no fixed vector for token '" + tok.surface + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

EmbeddingVector FixedVectorProvider::embed_sequence(const text::TokenSequence& seq) {
    EmbeddingVector acc{std::vector<double>(dimension_, 0.0)};
    for (const auto& v : embed_tokens(seq)) {
        for (std::size_t i = 0; i < dimension_; ++i) acc.values[i] += v.values[i];
    }
    normalize(acc);
    return acc;
}

}  // namespace halleval::embedding
