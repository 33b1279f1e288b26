#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include "halleval/embedding.hpp"
#include "halleval/text.hpp"

namespace halleval::rag {

/// One retrievable slice of a document. token_begin/token_end index into the
/// document's token stream; char_span is the byte range in the source text
/// when known, (0,0) otherwise.
struct Chunk {
    std::string doc_id;
    std::size_t seq_no = 0;
    std::size_t token_begin = 0;
    std::size_t token_end = 0;
    text::CharSpan char_span;
    text::TokenSequence tokens;
    std::string content;
};

/// Sliding windows with stride = chunk_size - overlap. Every token lands in
/// at least one chunk; consecutive chunks share exactly `overlap` tokens; the
/// final chunk may be shorter. Empty documents produce no chunks.
/// Throws std::invalid_argument unless 0 <= overlap < chunk_size.
std::vector<Chunk> chunk_document(const std::string& doc_id,
                                  const text::TokenSequence& doc,
                                  std::size_t chunk_size = 512,
                                  std::size_t overlap = 64);

/// Same splitting, but chunk content is sliced out of the original text via
/// the token spans, so source punctuation and spacing survive.
std::vector<Chunk> chunk_document(const std::string& doc_id, const std::string& source,
                                  const text::TokenizedText& doc,
                                  std::size_t chunk_size = 512,
                                  std::size_t overlap = 64);

struct RetrievalResult {
    Chunk chunk;
    double score = 0.0;  // cosine similarity, in [-1, 1]
    std::size_t rank = 0;  // 1-based, consecutive
};

struct StoredChunk {
    Chunk chunk;
    embedding::EmbeddingVector vector;
};

/// In-memory dense index over chunks. Single writer while indexing; readers
/// may share it freely afterwards. Keys (doc_id, seq_no) are unique.
class VectorStore {
public:
    explicit VectorStore(std::size_t dimension);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }
    const StoredChunk& at(std::size_t i) const { return entries_.at(i); }
    const std::vector<StoredChunk>& entries() const { return entries_; }

    /// Throws std::invalid_argument on dimension mismatch or duplicate
    /// (doc_id, seq_no) key.
    void add(Chunk chunk, embedding::EmbeddingVector vector);

    /// Persists as JSON lines: a header line with format name, version and
    /// dimension, then one entry per line. Stable across runs.
    void save(const std::filesystem::path& path) const;
    /// Rejects unknown format names or versions and malformed lines, naming
    /// the offending line number.
    static VectorStore load(const std::filesystem::path& path);

private:
    std::size_t dimension_;
    std::vector<StoredChunk> entries_;
    std::unordered_set<std::string> keys_;
};

/// Exact top-k by cosine similarity over a full linear scan. Ties order by
/// (doc_id, seq_no). Returns min(k, store size) results ranked from 1.
/// Throws std::invalid_argument for k = 0 or dimension mismatch.
std::vector<RetrievalResult> retrieve_top_k(const VectorStore& store,
                                            const embedding::EmbeddingVector& query,
                                            std::size_t k);

struct PromptTemplate {
    std::string system_instruction;
    std::string refusal_string;
};

/// The stock Italian-news QA template: a grounding instruction that tells the
/// model to answer only from the provided context and to fall back to the
/// refusal sentence verbatim when the context does not contain the answer.
PromptTemplate default_prompt_template();

/// Lays the prompt out as instruction, question, numbered context snippets
/// ("[1] ... [2] ...") in rank order, and a trailing answer cue. Byte
/// deterministic. Throws std::invalid_argument when results is empty.
text::RawText assemble_prompt(const PromptTemplate& tmpl, const text::RawText& question,
                              const std::vector<RetrievalResult>& results);

}  // namespace halleval::rag
