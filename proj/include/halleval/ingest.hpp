#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "halleval/text.hpp"

namespace halleval::ingest {

// ---------------------------------------------------------------------------
// Question difficulty levels
// ---------------------------------------------------------------------------

enum class Level { kLow, kMid, kHigh };

std::string to_string(Level level);
/// Accepts "LOW"/"MID"/"HIGH" in any case; throws std::invalid_argument
/// otherwise.
Level level_from_string(const std::string& name);

/// Character-count anchors for the three bands. A question is assigned to
/// the band whose anchor is nearest: boundaries sit at the midpoints.
struct LevelThresholds {
    double low = 30.0;
    double mid = 40.0;
    double high = 50.0;
};

/// Classifies by Unicode character count: below midpoint(low, mid) is LOW,
/// below midpoint(mid, high) is MID, otherwise HIGH. Monotone in question
/// length. Throws std::invalid_argument unless low < mid < high.
Level classify_level(const text::RawText& question, const LevelThresholds& t = {});

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct NewsDocument {
    std::string doc_id;
    std::string published_date;  // as found in the source, typically ISO-8601
    std::string source;
    text::RawText body;  // markup-free after loading
};

enum class CorpusFormat { kJsonl, kPlainDir };

struct LoadReport {
    std::size_t loaded = 0;
    std::size_t dropped_empty = 0;   // records whose body was empty after cleanup
    std::size_t skipped_bad = 0;     // malformed records skipped (permissive only)
    std::vector<std::string> warnings;
};

/// Loads and cleans a corpus. JSONL records need doc_id and body (optional
/// published_date, source, schema_version); PLAIN_DIR reads every regular
/// file in the directory in filename order, doc_id = file stem. Bodies pass
/// through strip_html; records left empty are dropped and counted.
/// Malformed records throw with their line number, or are skipped and
/// counted when permissive is set.
std::vector<NewsDocument> load_corpus(const std::filesystem::path& path,
                                      CorpusFormat format, bool permissive = false,
                                      LoadReport* report = nullptr);

// ---------------------------------------------------------------------------
// Token statistics
// ---------------------------------------------------------------------------

struct TokenStats {
    std::size_t total_tokens = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // population standard deviation
    std::size_t min = 0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    std::size_t max = 0;
};

/// Per-document token counts under cfg, reduced to summary statistics.
/// Quartiles use linear interpolation between closest ranks. Throws
/// std::invalid_argument on an empty corpus.
TokenStats compute_token_stats(const std::vector<NewsDocument>& docs,
                               const text::NormalizationConfig& cfg = {});

// ---------------------------------------------------------------------------
// Evaluation dataset
// ---------------------------------------------------------------------------

/// One scored QA exchange: a question with its reference answer, the answer
/// one model produced, and the retrieval context that model saw.
struct EvalRecord {
    std::string id;
    std::string model;
    Level level = Level::kLow;
    text::RawText question;
    text::RawText reference;
    text::RawText system;
    text::RawText context;
    text::TokenSequence question_tokens;
    text::TokenSequence reference_tokens;
    text::TokenSequence system_tokens;
    text::TokenSequence context_tokens;
};

/// Loads a JSONL evaluation dataset. Every record needs the fields id,
/// question, level, reference, system, context, and model; a missing field
/// raises an error naming the field and line. Text fields are tokenized
/// under cfg. Level tags that disagree with classify_level are kept but
/// reported through warnings.
std::vector<EvalRecord> load_eval_dataset(const std::filesystem::path& path,
                                          const text::NormalizationConfig& cfg = {},
                                          std::vector<std::string>* warnings = nullptr);

}  // namespace halleval::ingest
