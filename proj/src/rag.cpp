#include "halleval/rag.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include "json.hpp"

namespace halleval::rag {

namespace {

constexpr const char* kStoreFormat = "halleval.vector_store";
constexpr int kStoreVersion = 1;

void check_chunking_args(std::size_t chunk_size, std::size_t overlap) {
    if (chunk_size == 0) throw std::invalid_argument("chunk_document: chunk_size must be positive");
    if (overlap >= chunk_size) {
        throw std::invalid_argument("chunk_document: overlap must be smaller than chunk_size");
    }
}

template <typename MakeChunk>
std::vector<Chunk> windows(std::size_t n, std::size_t chunk_size, std::size_t overlap,
                           MakeChunk make) {
    std::vector<Chunk> out;
    if (n == 0) return out;
    const std::size_t stride = chunk_size - overlap;
    std::size_t start = 0;
    std::size_t seq = 0;
    while (true) {
        const std::size_t end = std::min(start + chunk_size, n);
        out.push_back(make(seq++, start, end));
        if (end == n) break;
        start += stride;
    }
    return out;
}

}  // namespace

std::vector<Chunk> chunk_document(const std::string& doc_id,
                                  const text::TokenSequence& doc,
                                  std::size_t chunk_size, std::size_t overlap) {
    check_chunking_args(chunk_size, overlap);
    return windows(doc.size(), chunk_size, overlap,
                   [&](std::size_t seq, std::size_t b, std::size_t e) {
                       Chunk c;
                       c.doc_id = doc_id;
                       c.seq_no = seq;
                       c.token_begin = b;
                       c.token_end = e;
                       c.tokens.assign(doc.begin() + b, doc.begin() + e);
                       c.content = text::join_tokens(c.tokens);
                       return c;
                   });
}

std::vector<Chunk> chunk_document(const std::string& doc_id, const std::string& source,
                                  const text::TokenizedText& doc,
                                  std::size_t chunk_size, std::size_t overlap) {
    check_chunking_args(chunk_size, overlap);
    if (doc.tokens.size() != doc.spans.size()) {
        throw std::invalid_argument("chunk_document: tokens and spans disagree");
    }
    return windows(doc.tokens.size(), chunk_size, overlap,
                   [&](std::size_t seq, std::size_t b, std::size_t e) {
                       Chunk c;
                       c.doc_id = doc_id;
                       c.seq_no = seq;
                       c.token_begin = b;
                       c.token_end = e;
                       c.tokens.assign(doc.tokens.begin() + b, doc.tokens.begin() + e);
                       c.char_span = text::CharSpan{doc.spans[b].begin, doc.spans[e - 1].end};
                       c.content = source.substr(c.char_span.begin,
                                                 c.char_span.end - c.char_span.begin);
                       return c;
                   });
}

// ---------------------------------------------------------------------------
// VectorStore
// ---------------------------------------------------------------------------

VectorStore::VectorStore(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw std::invalid_argument("VectorStore: dimension must be positive");
}

void VectorStore::add(Chunk chunk, embedding::EmbeddingVector vector) {
    if (vector.dimension() != dimension_) {
        throw std::invalid_argument("VectorStore::add: vector dimension mismatch");
    }
    std::string key = chunk.doc_id + '\x1f' + std::to_string(chunk.seq_no);
    if (!keys_.insert(std::move(key)).second) {
        throw std::invalid_argument("VectorStore::add: duplicate chunk key " +
                                    chunk.doc_id + ":" + std::to_string(chunk.seq_no));
    }
    entries_.push_back(StoredChunk{std::move(chunk), std::move(vector)});
}

void VectorStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("VectorStore::save: cannot open " + path.string());

    nlohmann::json header;
    header["format"] = kStoreFormat;
    header["version"] = kStoreVersion;
    header["dimension"] = dimension_;
    header["count"] = entries_.size();
    out << header.dump() << '\n';

    for (const auto& e : entries_) {
        nlohmann::json row;
        row["doc_id"] = e.chunk.doc_id;
        row["seq_no"] = e.chunk.seq_no;
        row["token_begin"] = e.chunk.token_begin;
        row["token_end"] = e.chunk.token_end;
        row["char_begin"] = e.chunk.char_span.begin;
        row["char_end"] = e.chunk.char_span.end;
        row["content"] = e.chunk.content;
        nlohmann::json toks = nlohmann::json::array();
        for (const auto& t : e.chunk.tokens) toks.push_back(t.surface);
        row["tokens"] = std::move(toks);
        row["vector"] = e.vector.values;
        out << row.dump() << '\n';
    }
    if (!out) throw std::runtime_error("VectorStore::save: write failed for " + path.string());
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("VectorStore::load: cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    auto parse = [&](const std::string& s) {
        nlohmann::json j = nlohmann::json::parse(s, nullptr, false);
        if (j.is_discarded()) {
            throw std::runtime_error("VectorStore::load: malformed JSON at line " +
                                     std::to_string(line_no));
        }
        return j;
    };

    if (!std::getline(in, line)) {
        throw std::runtime_error("VectorStore::load: empty file " + path.string());
    }
    ++line_no;
    const nlohmann::json header = parse(line);
    if (header.value("format", "") != kStoreFormat) {
        throw std::runtime_error("VectorStore::load: unrecognized format");
    }
    if (header.value("version", -1) != kStoreVersion) {
        throw std::runtime_error("VectorStore::load: unsupported version");
    }
    VectorStore store(header.at("dimension").get<std::size_t>());

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const nlohmann::json row = parse(line);
        try {
            Chunk c;
            c.doc_id = row.at("doc_id").get<std::string>();
            c.seq_no = row.at("seq_no").get<std::size_t>();
            c.token_begin = row.at("token_begin").get<std::size_t>();
            c.token_end = row.at("token_end").get<std::size_t>();
            c.char_span.begin = row.at("char_begin").get<std::size_t>();
            c.char_span.end = row.at("char_end").get<std::size_t>();
            c.content = row.at("content").get<std::string>();
            for (const auto& t : row.at("tokens")) {
                c.tokens.push_back(text::Token{t.get<std::string>()});
            }
            embedding::EmbeddingVector v;
            v.values = row.at("vector").get<std::vector<double>>();
            store.add(std::move(c), std::move(v));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("VectorStore::load: bad entry at line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
    }
    return store;
}

// ---------------------------------------------------------------------------
// Retrieval
// ---------------------------------------------------------------------------

std::vector<RetrievalResult> retrieve_top_k(const VectorStore& store,
                                            const embedding::EmbeddingVector& query,
                                            std::size_t k) {
    if (k == 0) throw std::invalid_argument("retrieve_top_k: k must be positive");
    if (query.dimension() != store.dimension()) {
        throw std::invalid_argument("retrieve_top_k: query dimension mismatch");
    }

    std::vector<RetrievalResult> scored;
    scored.reserve(store.size());
    for (const auto& e : store.entries()) {
        RetrievalResult r;
        r.chunk = e.chunk;
        r.score = embedding::cosine(query, e.vector);
        scored.push_back(std::move(r));
    }
    std::sort(scored.begin(), scored.end(), [](const RetrievalResult& a, const RetrievalResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.chunk.doc_id, a.chunk.seq_no) <
               std::tie(b.chunk.doc_id, b.chunk.seq_no);
    });
    if (scored.size() > k) scored.resize(k);
    for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
    return scored;
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

PromptTemplate default_prompt_template() {
    PromptTemplate t;
    t.system_instruction =
        "You are a chatbot that loves helping people! Given the following context "
        "section, answer the question using only the provided context. If you are "
        "unsure and the answer is not explicitly written in the documentation, "
        "respond by saying, 'I'm sorry, I can't help you based on the information "
        "I have.'";
    t.refusal_string = "I'm sorry, I can't help you based on the information I have.";
    return t;
}

text::RawText assemble_prompt(const PromptTemplate& tmpl, const text::RawText& question,
                              const std::vector<RetrievalResult>& results) {
    if (results.empty()) {
        throw std::invalid_argument("assemble_prompt: at least one retrieved chunk required");
    }
    std::string out = tmpl.system_instruction;
    out += "\n\nQuestion: ";
    out += question.content;
    out += "\n\nContext: ";
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (i > 0) out += ' ';
        out += '[';
        out += std::to_string(i + 1);
        out += "] ";
        out += results[i].chunk.content;
    }
    out += "\n\nAnswer:";
    return text::RawText{std::move(out)};
}

}  // namespace halleval::rag
