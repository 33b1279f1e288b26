#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "halleval/http_clients.hpp"
#include "halleval/metrics.hpp"
#include "halleval/text.hpp"

namespace halleval::config {

/// Where a service lives plus the NAME of the environment variable holding
/// its credential. The credential value itself never appears in config files.
struct EndpointSettings {
    net::EndpointConfig endpoint;
    std::string api_key_env;

    bool operator==(const EndpointSettings& other) const {
        return endpoint.host == other.endpoint.host && endpoint.port == other.endpoint.port &&
               endpoint.path == other.endpoint.path &&
               endpoint.timeout_seconds == other.endpoint.timeout_seconds &&
               endpoint.max_attempts == other.endpoint.max_attempts &&
               endpoint.initial_backoff_ms == other.endpoint.initial_backoff_ms &&
               endpoint.max_in_flight == other.endpoint.max_in_flight &&
               api_key_env == other.api_key_env;
    }
};

/// Everything a run needs, with the published defaults baked in:
/// 512-token chunks, 64-token overlap, top-4 retrieval.
struct RunConfig {
    text::NormalizationConfig normalization;
    int chunk_size = 512;
    int overlap = 64;
    int top_k = 4;
    /// Metrics to evaluate; empty means every context-aware metric.
    std::vector<metrics::MetricId> metric_ids;
    int embedding_dimension = 256;
    /// Reserved for randomized tie-breaking; all current code paths are
    /// deterministic, so the seed only pins future extensions.
    std::uint64_t seed = 0;
    EndpointSettings embedding;
    EndpointSettings generation;

    bool operator==(const RunConfig&) const = default;
};

RunConfig default_run_config();

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const RunConfig& cfg);

/// Reads a JSON config. Absent keys keep their defaults; unknown keys are
/// rejected. The result is validated before being returned.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON text (sorted keys, two-space indent, trailing newline).
/// load(render(cfg)) == cfg.
std::string render_run_config(const RunConfig& cfg);

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace halleval::config
