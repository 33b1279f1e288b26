#include "halleval/http_clients.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace halleval::net {

namespace {

nlohmann::json post_json_once(const EndpointConfig& cfg, const nlohmann::json& body) {
    httplib::Client cli(cfg.host, cfg.port);
    cli.set_connection_timeout(cfg.timeout_seconds, 0);
    cli.set_read_timeout(cfg.timeout_seconds, 0);
    cli.set_write_timeout(cfg.timeout_seconds, 0);
    if (!cfg.api_key.empty()) cli.set_bearer_token_auth(cfg.api_key);

    auto res = cli.Post(cfg.path, body.dump(), "application/json");
    if (!res) {
        throw std::runtime_error("transport error: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw std::runtime_error("HTTP status " + std::to_string(res->status));
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
        throw std::runtime_error("malformed JSON in response body");
    }
    return parsed;
}

/// Runs the request up to cfg.max_attempts times, sleeping
/// initial_backoff_ms * 2^(attempt-1) between tries.
nlohmann::json post_json_with_retry(const EndpointConfig& cfg, const nlohmann::json& body) {
    const int attempts = std::max(1, cfg.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            return post_json_once(cfg, body);
        } catch (const std::runtime_error& e) {
            last_error = e.what();
            if (attempt < attempts) {
                const auto delay = std::chrono::milliseconds(
                    static_cast<long long>(cfg.initial_backoff_ms) << (attempt - 1));
                std::this_thread::sleep_for(delay);
            }
        }
    }
    throw std::runtime_error("request to " + cfg.host + ":" + std::to_string(cfg.port) +
                             cfg.path + " failed after " + std::to_string(attempts) +
                             " attempts: " + last_error);
}

}  // namespace

// ---------------------------------------------------------------------------
// Run log
// ---------------------------------------------------------------------------

RunLog::RunLog(std::filesystem::path path) : path_(std::move(path)) {}

void RunLog::record_generation(const std::string& prompt, const GenerationOptions& opts,
                               const std::string& response_text) {
    nlohmann::json line;
    line["kind"] = "generation";
    line["request"] = {{"prompt", prompt},
                       {"max_tokens", opts.max_tokens},
                       {"temperature", opts.temperature}};
    line["response"] = {{"text", response_text}};

    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("RunLog: cannot open " + path_.string());
    out << line.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

HttpGenerationClient::HttpGenerationClient(EndpointConfig cfg, RunLog* log)
    : cfg_(std::move(cfg)), log_(log), gate_(std::max(1, cfg_.max_in_flight)) {}

std::string HttpGenerationClient::generate(const std::string& prompt,
                                           const GenerationOptions& opts) {
    nlohmann::json body;
    body["prompt"] = prompt;
    body["max_tokens"] = opts.max_tokens;
    body["temperature"] = opts.temperature;

    gate_.acquire();
    nlohmann::json reply;
    try {
        reply = post_json_with_retry(cfg_, body);
    } catch (...) {
        gate_.release();
        throw;
    }
    gate_.release();

    if (!reply.contains("text") || !reply["text"].is_string()) {
        throw std::runtime_error("generation response lacks a \"text\" string");
    }
    std::string text = reply["text"].get<std::string>();
    if (log_ != nullptr) log_->record_generation(prompt, opts, text);
    return text;
}

ReplayGenerationClient::ReplayGenerationClient(const std::filesystem::path& log_path) {
    std::ifstream in(log_path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("ReplayGenerationClient: cannot open " + log_path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw std::runtime_error("ReplayGenerationClient: malformed JSON at line " +
                                     std::to_string(line_no));
        }
        if (j.value("kind", "") != "generation") continue;
        try {
            // Later entries for the same prompt win.
            responses_[j.at("request").at("prompt").get<std::string>()] =
                j.at("response").at("text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("ReplayGenerationClient: bad entry at line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::string ReplayGenerationClient::generate(const std::string& prompt,
                                             const GenerationOptions&) {
    auto it = responses_.find(prompt);
    if (it == responses_.end()) {
        throw std::out_of_range("ReplayGenerationClient: no archived completion for prompt");
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

HttpEmbeddingProvider::HttpEmbeddingProvider(EndpointConfig cfg, std::size_t dimension)
    : cfg_(std::move(cfg)), dimension_(dimension),
      gate_(std::max(1, cfg_.max_in_flight)) {
    if (dimension == 0) {
        throw std::invalid_argument("HttpEmbeddingProvider: dimension must be positive");
    }
}

std::vector<embedding::EmbeddingVector> HttpEmbeddingProvider::embed_texts(
    const std::vector<std::string>& texts) {
    nlohmann::json body;
    body["texts"] = texts;

    gate_.acquire();
    nlohmann::json reply;
    try {
        reply = post_json_with_retry(cfg_, body);
    } catch (...) {
        gate_.release();
        throw;
    }
    gate_.release();

    if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
        throw std::runtime_error("embedding response lacks a \"vectors\" array");
    }
    const auto& rows = reply["vectors"];
    if (rows.size() != texts.size()) {
        throw std::runtime_error("embedding response has " + std::to_string(rows.size()) +
                                 " vectors for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<embedding::EmbeddingVector> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        embedding::EmbeddingVector v;
        v.values = row.get<std::vector<double>>();
        if (v.dimension() != dimension_) {
            throw std::runtime_error("embedding response dimension " +
                                     std::to_string(v.dimension()) + ", expected " +
                                     std::to_string(dimension_));
        }
        embedding::normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<embedding::EmbeddingVector> HttpEmbeddingProvider::embed_tokens(
    const text::TokenSequence& seq) {
    if (seq.empty()) return {};
    std::vector<std::string> texts;
    texts.reserve(seq.size());
    for (const auto& t : seq) texts.push_back(t.surface);
    return embed_texts(texts);
}

embedding::EmbeddingVector HttpEmbeddingProvider::embed_sequence(
    const text::TokenSequence& seq) {
    if (seq.empty()) {
        embedding::EmbeddingVector zero;
        zero.values.assign(dimension_, 0.0);
        return zero;
    }
    return embed_texts({text::join_tokens(seq)}).front();
}

text::RawText generate_answer(GenerationClient& client, const text::RawText& prompt,
                              const GenerationOptions& opts) {
    return text::RawText{client.generate(prompt.content, opts)};
}

}  // namespace halleval::net
