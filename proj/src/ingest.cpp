#include "halleval/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace halleval::ingest {

// ---------------------------------------------------------------------------
// Levels
// ---------------------------------------------------------------------------

std::string to_string(Level level) {
    switch (level) {
        case Level::kLow: return "LOW";
        case Level::kMid: return "MID";
        case Level::kHigh: return "HIGH";
    }
    return "LOW";
}

Level level_from_string(const std::string& name) {
    std::string up;
    up.reserve(name.size());
    for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "LOW") return Level::kLow;
    if (up == "MID") return Level::kMid;
    if (up == "HIGH") return Level::kHigh;
    throw std::invalid_argument("unknown level name: " + name);
}

Level classify_level(const text::RawText& question, const LevelThresholds& t) {
    if (!(t.low < t.mid && t.mid < t.high)) {
        throw std::invalid_argument("classify_level: thresholds must be strictly increasing");
    }
    const double len = static_cast<double>(text::codepoint_count(question.content));
    if (len < (t.low + t.mid) / 2.0) return Level::kLow;
    if (len < (t.mid + t.high) / 2.0) return Level::kMid;
    return Level::kHigh;
}

// ---------------------------------------------------------------------------
// Corpus loading
// ---------------------------------------------------------------------------

namespace {

constexpr int kCorpusSchemaVersion = 1;

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::vector<NewsDocument> load_corpus_jsonl(const std::filesystem::path& path,
                                            bool permissive, LoadReport& report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_corpus: cannot open " + path.string());

    std::vector<NewsDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fail = [&](const std::string& what) {
            const std::string msg = "load_corpus: " + what + " at line " + std::to_string(line_no);
            if (!permissive) throw std::runtime_error(msg);
            ++report.skipped_bad;
            report.warnings.push_back(msg);
        };
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            fail("malformed JSON");
            continue;
        }
        if (j.contains("schema_version") &&
            j["schema_version"].get<int>() != kCorpusSchemaVersion) {
            fail("unsupported schema_version");
            continue;
        }
        if (!j.contains("doc_id") || !j["doc_id"].is_string()) {
            fail("missing field \"doc_id\"");
            continue;
        }
        if (!j.contains("body") || !j["body"].is_string()) {
            fail("missing field \"body\"");
            continue;
        }
        NewsDocument d;
        d.doc_id = j["doc_id"].get<std::string>();
        d.published_date = j.value("published_date", "");
        d.source = j.value("source", "");
        d.body = text::strip_html(text::RawText{j["body"].get<std::string>()});
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<NewsDocument> load_corpus_dir(const std::filesystem::path& path,
                                          LoadReport& /*report*/) {
    if (!std::filesystem::is_directory(path)) {
        throw std::runtime_error("load_corpus: not a directory: " + path.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<NewsDocument> docs;
    for (const auto& f : files) {
        NewsDocument d;
        d.doc_id = f.stem().string();
        d.source = f.filename().string();
        d.body = text::strip_html(text::RawText{read_file(f)});
        docs.push_back(std::move(d));
    }
    return docs;
}

bool body_is_blank(const std::string& s) {
    return text::tokenize(text::RawText{s}, {}).empty();
}

}  // namespace

std::vector<NewsDocument> load_corpus(const std::filesystem::path& path,
                                      CorpusFormat format, bool permissive,
                                      LoadReport* report) {
    LoadReport local;
    LoadReport& rep = report != nullptr ? *report : local;
    rep = LoadReport{};

    std::vector<NewsDocument> docs = format == CorpusFormat::kJsonl
                                         ? load_corpus_jsonl(path, permissive, rep)
                                         : load_corpus_dir(path, rep);

    std::vector<NewsDocument> kept;
    kept.reserve(docs.size());
    for (auto& d : docs) {
        if (body_is_blank(d.body.content)) {
            ++rep.dropped_empty;
            rep.warnings.push_back("load_corpus: empty body dropped: " + d.doc_id);
            continue;
        }
        kept.push_back(std::move(d));
    }
    rep.loaded = kept.size();
    return kept;
}

// ---------------------------------------------------------------------------
// Token statistics
// ---------------------------------------------------------------------------

namespace {

/// Quantile by linear interpolation between closest ranks: position
/// (n - 1) * q splits into whole and fractional parts.
double quantile_sorted(const std::vector<std::size_t>& sorted, double q) {
    const double pos = static_cast<double>(sorted.size() - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return static_cast<double>(sorted.back());
    return static_cast<double>(sorted[lo]) +
           frac * (static_cast<double>(sorted[lo + 1]) - static_cast<double>(sorted[lo]));
}

}  // namespace

TokenStats compute_token_stats(const std::vector<NewsDocument>& docs,
                               const text::NormalizationConfig& cfg) {
    if (docs.empty()) {
        throw std::invalid_argument("compute_token_stats: corpus is empty");
    }
    std::vector<std::size_t> counts;
    counts.reserve(docs.size());
    for (const auto& d : docs) {
        counts.push_back(text::tokenize(d.body, cfg).size());
    }

    TokenStats s;
    for (std::size_t c : counts) s.total_tokens += c;
    const double n = static_cast<double>(counts.size());
    s.mean = static_cast<double>(s.total_tokens) / n;

    double sq = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - s.mean;
        sq += d * d;
    }
    s.std_dev = std::sqrt(sq / n);

    std::sort(counts.begin(), counts.end());
    s.min = counts.front();
    s.max = counts.back();
    s.q25 = quantile_sorted(counts, 0.25);
    s.median = quantile_sorted(counts, 0.50);
    s.q75 = quantile_sorted(counts, 0.75);
    return s;
}

// ---------------------------------------------------------------------------
// Evaluation dataset
// ---------------------------------------------------------------------------

std::vector<EvalRecord> load_eval_dataset(const std::filesystem::path& path,
                                          const text::NormalizationConfig& cfg,
                                          std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_eval_dataset: cannot open " + path.string());

    std::vector<EvalRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw std::runtime_error("load_eval_dataset: malformed JSON at line " +
                                     std::to_string(line_no));
        }
        auto field = [&](const char* name) -> std::string {
            if (!j.contains(name) || !j[name].is_string()) {
                throw std::runtime_error("load_eval_dataset: missing field \"" +
                                         std::string(name) + "\" at line " +
                                         std::to_string(line_no));
            }
            return j[name].get<std::string>();
        };

        EvalRecord r;
        r.id = field("id");
        r.model = field("model");
        r.level = level_from_string(field("level"));
        r.question = text::RawText{field("question")};
        r.reference = text::RawText{field("reference")};
        r.system = text::RawText{field("system")};
        r.context = text::RawText{field("context")};
        r.question_tokens = text::tokenize(r.question, cfg);
        r.reference_tokens = text::tokenize(r.reference, cfg);
        r.system_tokens = text::tokenize(r.system, cfg);
        r.context_tokens = text::tokenize(r.context, cfg);

        if (warnings != nullptr) {
            const Level derived = classify_level(r.question);
            if (derived != r.level) {
                warnings->push_back("load_eval_dataset: record " + r.id + " tagged " +
                                    to_string(r.level) + " but question length suggests " +
                                    to_string(derived));
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace halleval::ingest
