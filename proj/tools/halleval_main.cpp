// Command-line driver: ingest -> index -> ask -> evaluate.
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "halleval/config.hpp"
#include "halleval/embedding.hpp"
#include "halleval/http_clients.hpp"
#include "halleval/ingest.hpp"
#include "halleval/metrics.hpp"
#include "halleval/nmiss.hpp"
#include "halleval/rag.hpp"
#include "halleval/report.hpp"
#include "halleval/text.hpp"

namespace fs = std::filesystem;
using namespace halleval;

namespace {

// Flags shared by every subcommand; -1 / empty means "not given".
struct CommonFlags {
    std::string config_path;
    std::string metrics_csv;
    int top_k = -1;
    int chunk_size = -1;
    int overlap = -1;
    bool show_config = false;
};

std::vector<metrics::MetricId> parse_metric_list(const std::string& csv) {
    std::vector<metrics::MetricId> ids;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) {
            throw std::invalid_argument("empty entry in --metrics list");
        }
        const auto last = item.find_last_not_of(" \t");
        ids.push_back(metrics::metric_from_string(item.substr(first, last - first + 1)));
    }
    if (ids.empty()) throw std::invalid_argument("--metrics list is empty");
    return ids;
}

config::RunConfig effective_config(const CommonFlags& flags) {
    config::RunConfig cfg = flags.config_path.empty()
                                ? config::default_run_config()
                                : config::load_run_config(flags.config_path);
    if (!flags.metrics_csv.empty()) cfg.metric_ids = parse_metric_list(flags.metrics_csv);
    if (flags.top_k >= 0) cfg.top_k = flags.top_k;
    if (flags.chunk_size >= 0) cfg.chunk_size = flags.chunk_size;
    if (flags.overlap >= 0) cfg.overlap = flags.overlap;
    config::validate(cfg);
    return cfg;
}

void require_input(const std::string& path, const char* what) {
    if (path.empty()) throw std::invalid_argument(std::string(what) + " argument is required");
    if (!fs::exists(path)) {
        throw std::invalid_argument(std::string(what) + " not found: " + path);
    }
}

// Input-file problems are usage-class failures (exit 2), unlike runtime
// failures such as network or write errors (exit 1).
template <typename Fn>
auto load_or_usage(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());
    }
}

ingest::CorpusFormat format_from_name(const std::string& name) {
    return name == "dir" ? ingest::CorpusFormat::kPlainDir : ingest::CorpusFormat::kJsonl;
}

void fill_api_key(net::EndpointConfig& endpoint, const std::string& env_name) {
    if (env_name.empty()) return;
    if (const char* value = std::getenv(env_name.c_str())) endpoint.api_key = value;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

int cmd_ingest(const config::RunConfig& cfg, const std::string& corpus_path,
               const std::string& format, bool permissive, const std::string& out_path) {
    require_input(corpus_path, "corpus path");
    ingest::LoadReport rep;
    auto docs = load_or_usage([&] {
        return ingest::load_corpus(corpus_path, format_from_name(format), permissive, &rep);
    });
    print_warnings(rep.warnings);
    if (docs.empty()) throw std::invalid_argument("corpus is empty after cleanup");

    const ingest::TokenStats s = ingest::compute_token_stats(docs, cfg.normalization);
    std::printf("%-12s %-10s %-10s %-8s %-8s %-8s %-8s %-8s\n", "N. Tokens", "Mean",
                "Std", "Min", "25%", "Median", "75%", "Max");
    std::printf("%-12zu %-10.2f %-10.2f %-8zu %-8.2f %-8.2f %-8.2f %-8zu\n",
                s.total_tokens, s.mean, s.std_dev, s.min, s.q25, s.median, s.q75, s.max);

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    for (const ingest::NewsDocument& d : docs) {
        nlohmann::json line{{"doc_id", d.doc_id},
                            {"published_date", d.published_date},
                            {"source", d.source},
                            {"body", d.body.content}};
        out << line.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write to " + out_path + " failed");
    std::cout << "ingested " << docs.size() << " documents -> " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

int cmd_index(const config::RunConfig& cfg, const std::string& corpus_path,
              const std::string& store_path, const std::string& format,
              bool use_endpoint) {
    require_input(corpus_path, "corpus path");
    if (store_path.empty()) throw std::invalid_argument("store path argument is required");
    if (fs::exists(store_path)) {
        auto existing = load_or_usage([&] { return rag::VectorStore::load(store_path); });
        if (existing.dimension() != static_cast<std::size_t>(cfg.embedding_dimension)) {
            throw std::invalid_argument(
                "existing store has dimension " + std::to_string(existing.dimension()) +
                " but the config asks for " + std::to_string(cfg.embedding_dimension));
        }
    }

    auto docs = load_or_usage(
        [&] { return ingest::load_corpus(corpus_path, format_from_name(format)); });

    embedding::HashedTfProvider hashed(static_cast<std::size_t>(cfg.embedding_dimension));
    std::optional<net::HttpEmbeddingProvider> remote;
    if (use_endpoint) {
        net::EndpointConfig endpoint = cfg.embedding.endpoint;
        fill_api_key(endpoint, cfg.embedding.api_key_env);
        remote.emplace(endpoint, static_cast<std::size_t>(cfg.embedding_dimension));
    }
    embedding::EmbeddingProvider& provider =
        use_endpoint ? static_cast<embedding::EmbeddingProvider&>(*remote) : hashed;

    rag::VectorStore store(static_cast<std::size_t>(cfg.embedding_dimension));
    std::size_t chunk_count = 0;
    for (const ingest::NewsDocument& d : docs) {
        const text::TokenizedText toks =
            text::tokenize_with_spans(d.body, cfg.normalization);
        auto chunks = rag::chunk_document(d.doc_id, d.body.content, toks,
                                          static_cast<std::size_t>(cfg.chunk_size),
                                          static_cast<std::size_t>(cfg.overlap));
        for (rag::Chunk& c : chunks) {
            embedding::EmbeddingVector vec = provider.embed_sequence(c.tokens);
            store.add(std::move(c), std::move(vec));
            ++chunk_count;
        }
    }
    store.save(store_path);
    std::cout << "indexed " << chunk_count << " chunks from " << docs.size()
              << " documents -> " << store_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// ask
// ---------------------------------------------------------------------------

int cmd_ask(const config::RunConfig& cfg, const std::string& store_path,
            const std::string& question, bool dry_run, const std::string& replay_path,
            const std::string& run_log_path, bool use_endpoint,
            const net::GenerationOptions& gen_opts) {
    require_input(store_path, "store path");
    if (question.empty()) throw std::invalid_argument("question argument is required");
    auto store = load_or_usage([&] { return rag::VectorStore::load(store_path); });
    if (store.size() == 0) throw std::invalid_argument("store is empty");

    embedding::HashedTfProvider hashed(store.dimension());
    std::optional<net::HttpEmbeddingProvider> remote;
    if (use_endpoint) {
        net::EndpointConfig endpoint = cfg.embedding.endpoint;
        fill_api_key(endpoint, cfg.embedding.api_key_env);
        remote.emplace(endpoint, store.dimension());
    }
    embedding::EmbeddingProvider& provider =
        use_endpoint ? static_cast<embedding::EmbeddingProvider&>(*remote) : hashed;

    const text::RawText raw_question{question};
    const text::TokenSequence q_tokens = text::tokenize(raw_question, cfg.normalization);
    const embedding::EmbeddingVector q_vec = provider.embed_sequence(q_tokens);

    std::size_t k = static_cast<std::size_t>(cfg.top_k);
    if (k > store.size()) {
        std::cerr << "warning: top_k=" << k << " exceeds store size " << store.size()
                  << "; using every chunk\n";
        k = store.size();
    }
    const auto results = rag::retrieve_top_k(store, q_vec, k);
    const text::RawText prompt =
        rag::assemble_prompt(rag::default_prompt_template(), raw_question, results);

    if (dry_run) {
        std::cout << prompt.content << "\n";
        return 0;
    }

    for (const rag::RetrievalResult& r : results) {
        std::printf("[%zu] %s#%zu score=%.6f\n", r.rank, r.chunk.doc_id.c_str(),
                    r.chunk.seq_no, r.score);
    }

    std::string answer;
    if (!replay_path.empty()) {
        require_input(replay_path, "replay log");
        auto client = load_or_usage([&] { return net::ReplayGenerationClient(replay_path); });
        answer = generate_answer(client, prompt, gen_opts).content;
    } else {
        net::EndpointConfig endpoint = cfg.generation.endpoint;
        fill_api_key(endpoint, cfg.generation.api_key_env);
        std::optional<net::RunLog> log;
        if (!run_log_path.empty()) log.emplace(run_log_path);
        net::HttpGenerationClient client(endpoint, log ? &*log : nullptr);
        answer = generate_answer(client, prompt, gen_opts).content;
    }
    std::cout << "\n" << answer << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int cmd_evaluate(const config::RunConfig& cfg, const std::string& dataset_path,
                 const std::string& out_dir, int jobs) {
    require_input(dataset_path, "dataset path");
    if (out_dir.empty()) throw std::invalid_argument("output directory argument is required");
    fs::create_directories(out_dir);

    std::vector<std::string> warnings;
    auto records = load_or_usage(
        [&] { return ingest::load_eval_dataset(dataset_path, cfg.normalization, &warnings); });
    print_warnings(warnings);
    if (records.empty()) throw std::invalid_argument("dataset is empty");

    report::EvaluationOptions opts;
    opts.metric_ids = cfg.metric_ids;
    const auto results = report::score_records(records, opts, jobs);

    // Fixed number of score rows per record lets the flat list be re-sliced.
    const std::size_t per_record = results.size() / records.size();
    const fs::path dir(out_dir);
    {
        std::ofstream out(dir / "per_record.jsonl", std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write per_record.jsonl");
        for (std::size_t i = 0; i < records.size(); ++i) {
            nlohmann::json scores = nlohmann::json::array();
            for (std::size_t j = i * per_record; j < (i + 1) * per_record; ++j) {
                const nmiss::NmissBreakdown& b = results[j].breakdown;
                scores.push_back({{"metric", metrics::to_string(b.metric)},
                                  {"component", metrics::to_string(b.component)},
                                  {"base", b.f_ref},
                                  {"context_score", b.f_cxt},
                                  {"lambda1", b.lambda1},
                                  {"lambda2", b.lambda2},
                                  {"weighted", b.weighted},
                                  {"rescued", b.final_score}});
            }
            nlohmann::json line{{"id", records[i].id},
                                {"model", records[i].model},
                                {"level", ingest::to_string(records[i].level)},
                                {"scores", scores}};
            out << line.dump() << "\n";
        }
        if (!out) throw std::runtime_error("write to per_record.jsonl failed");
    }

    const auto agg = report::aggregate(results);
    const auto outp = report::outperformance(results);
    report::emit(agg, report::EmitFormat::kCsv, dir / "aggregate.csv");
    report::emit(agg, report::EmitFormat::kMarkdown, dir / "aggregate.md");
    report::emit(agg, report::EmitFormat::kPlotJson, dir / "aggregate_plot.json");
    report::emit(outp, report::EmitFormat::kCsv, dir / "outperformance.csv");
    report::emit(outp, report::EmitFormat::kMarkdown, dir / "outperformance.md");
    report::emit(outp, report::EmitFormat::kPlotJson, dir / "outperformance_plot.json");

    std::cout << "evaluated " << records.size() << " records (" << results.size()
              << " scores) -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Context-aware hallucination scoring for retrieval-augmented QA"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    CommonFlags flags;
    app.add_option("--config", flags.config_path, "JSON run configuration file");
    app.add_option("--metrics", flags.metrics_csv,
                   "Comma-separated metric list (rouge1,rouge2,rougeL,bleu,meteor)");
    app.add_option("--top-k", flags.top_k, "Chunks to retrieve per question");
    app.add_option("--chunk-size", flags.chunk_size, "Chunk length in tokens");
    app.add_option("--overlap", flags.overlap, "Token overlap between chunks");
    app.add_flag("--show-config", flags.show_config,
                 "Print the effective configuration and exit");

    auto* ingest_cmd =
        app.add_subcommand("ingest", "Load and clean a corpus, print token statistics");
    std::string corpus_path, corpus_format = "jsonl", ingest_out = "ingested.jsonl";
    bool permissive = false;
    ingest_cmd->add_option("corpus", corpus_path, "Corpus file or directory");
    ingest_cmd->add_option("--format", corpus_format, "Corpus layout")
        ->check(CLI::IsMember({"jsonl", "dir"}));
    ingest_cmd->add_flag("--permissive", permissive, "Skip malformed records instead of failing");
    ingest_cmd->add_option("--out", ingest_out, "Cleaned corpus output path");

    auto* index_cmd =
        app.add_subcommand("index", "Chunk, embed and persist a corpus as a vector store");
    std::string index_corpus, index_store, index_format = "jsonl";
    bool index_endpoint = false;
    index_cmd->add_option("corpus", index_corpus, "Corpus file or directory");
    index_cmd->add_option("store", index_store, "Vector store output path");
    index_cmd->add_option("--format", index_format, "Corpus layout")
        ->check(CLI::IsMember({"jsonl", "dir"}));
    index_cmd->add_flag("--use-endpoint", index_endpoint,
                        "Embed through the configured HTTP endpoint instead of hashed TF");

    auto* ask_cmd =
        app.add_subcommand("ask", "Retrieve context for a question and generate an answer");
    std::string ask_store, ask_question, ask_replay, ask_run_log = "run_log.jsonl";
    bool ask_dry_run = false, ask_endpoint = false;
    net::GenerationOptions gen_opts;
    ask_cmd->add_option("store", ask_store, "Vector store path");
    ask_cmd->add_option("question", ask_question, "Question text");
    ask_cmd->add_flag("--dry-run", ask_dry_run,
                      "Print the assembled prompt without calling generation");
    ask_cmd->add_option("--replay", ask_replay,
                        "Answer from a recorded run log instead of the network");
    ask_cmd->add_option("--run-log", ask_run_log, "Where live calls are journaled");
    ask_cmd->add_flag("--use-endpoint", ask_endpoint,
                      "Embed the question through the configured HTTP endpoint");
    ask_cmd->add_option("--max-tokens", gen_opts.max_tokens, "Generation budget");
    ask_cmd->add_option("--temperature", gen_opts.temperature, "Sampling temperature");

    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Score a model-answer dataset and write aggregate reports");
    std::string eval_dataset, eval_out_dir;
    int jobs = 1;
    eval_cmd->add_option("dataset", eval_dataset, "Evaluation dataset (JSONL)");
    eval_cmd->add_option("out_dir", eval_out_dir, "Report output directory");
    eval_cmd->add_option("--jobs", jobs, "Worker threads for record scoring")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const config::RunConfig cfg = effective_config(flags);
        if (flags.show_config) {
            std::cout << config::render_run_config(cfg);
            return 0;
        }
        if (*ingest_cmd) {
            return cmd_ingest(cfg, corpus_path, corpus_format, permissive, ingest_out);
        }
        if (*index_cmd) {
            return cmd_index(cfg, index_corpus, index_store, index_format, index_endpoint);
        }
        if (*ask_cmd) {
            return cmd_ask(cfg, ask_store, ask_question, ask_dry_run, ask_replay,
                           ask_run_log, ask_endpoint, gen_opts);
        }
        if (*eval_cmd) {
            return cmd_evaluate(cfg, eval_dataset, eval_out_dir, jobs);
        }
        std::cerr << app.help();
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
