#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <vector>

#include "halleval/embedding.hpp"
#include "halleval/text.hpp"

namespace halleval::net {

struct EndpointConfig {
    std::string host = "127.0.0.1";
    int port = 0;
    std::string path = "/";
    int timeout_seconds = 30;
    /// Total tries per request, first attempt included.
    int max_attempts = 3;
    /// Delay before the second attempt; doubles for each further retry.
    int initial_backoff_ms = 100;
    /// Upper bound on simultaneous requests through one client.
    int max_in_flight = 4;
    /// Sent as a bearer token when non-empty. Filled in at runtime from the
    /// environment; never persisted.
    std::string api_key;
};

struct GenerationOptions {
    int max_tokens = 512;
    double temperature = 0.0;
};

/// Append-only JSON-lines journal of service calls, one object per line with
/// the request and the verbatim response. Safe for concurrent record calls.
class RunLog {
public:
    explicit RunLog(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }
    void record_generation(const std::string& prompt, const GenerationOptions& opts,
                           const std::string& response_text);

private:
    std::filesystem::path path_;
    std::mutex mu_;
};

class GenerationClient {
public:
    virtual ~GenerationClient() = default;
    /// Returns the completion text. Throws std::runtime_error after all
    /// attempts fail.
    virtual std::string generate(const std::string& prompt,
                                 const GenerationOptions& opts) = 0;
};

/// Talks to a chat-completion endpoint: POST {"prompt", "max_tokens",
/// "temperature"} expecting {"text"}. Retries transport and HTTP failures
/// with exponential backoff. Optionally journals every exchange.
class HttpGenerationClient : public GenerationClient {
public:
    explicit HttpGenerationClient(EndpointConfig cfg, RunLog* log = nullptr);

    std::string generate(const std::string& prompt, const GenerationOptions& opts) override;

private:
    EndpointConfig cfg_;
    RunLog* log_;
    std::counting_semaphore<> gate_;  // bounds in-flight requests
};

/// Replays completions archived in a run log. Lookup is by exact prompt
/// bytes; unknown prompts throw std::out_of_range.
class ReplayGenerationClient : public GenerationClient {
public:
    explicit ReplayGenerationClient(const std::filesystem::path& log_path);

    std::size_t size() const { return responses_.size(); }
    std::string generate(const std::string& prompt, const GenerationOptions& opts) override;

private:
    std::unordered_map<std::string, std::string> responses_;
};

/// Embedding endpoint adapter: POST {"texts": [...]} expecting {"vectors":
/// [[...], ...]}. Vectors are L2-normalized on the way in, so downstream code
/// can rely on unit norm even if the service does not normalize.
class HttpEmbeddingProvider : public embedding::EmbeddingProvider {
public:
    HttpEmbeddingProvider(EndpointConfig cfg, std::size_t dimension);

    std::size_t dimension() const override { return dimension_; }
    std::vector<embedding::EmbeddingVector> embed_tokens(const text::TokenSequence& seq) override;
    embedding::EmbeddingVector embed_sequence(const text::TokenSequence& seq) override;

private:
    std::vector<embedding::EmbeddingVector> embed_texts(const std::vector<std::string>& texts);

    EndpointConfig cfg_;
    std::size_t dimension_;
    std::counting_semaphore<> gate_;  // bounds in-flight requests
};

/// Convenience wrapper matching the pipeline vocabulary.
text::RawText generate_answer(GenerationClient& client, const text::RawText& prompt,
                              const GenerationOptions& opts = {});

}  // namespace halleval::net
