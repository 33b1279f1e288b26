#include "halleval/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace halleval::config {

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value for \"" + std::string(key) +
                                    "\" in " + where);
    }
}

json endpoint_to_json(const EndpointSettings& s) {
    return json{{"host", s.endpoint.host},
                {"port", s.endpoint.port},
                {"path", s.endpoint.path},
                {"timeout_seconds", s.endpoint.timeout_seconds},
                {"max_attempts", s.endpoint.max_attempts},
                {"initial_backoff_ms", s.endpoint.initial_backoff_ms},
                {"max_in_flight", s.endpoint.max_in_flight},
                {"api_key_env", s.api_key_env}};
}

void endpoint_from_json(const json& obj, EndpointSettings& s, const std::string& where) {
    if (!obj.is_object()) {
        throw std::invalid_argument("config: " + where + " must be an object");
    }
    reject_unknown_keys(obj,
                        {"host", "port", "path", "timeout_seconds", "max_attempts",
                         "initial_backoff_ms", "max_in_flight", "api_key_env"},
                        where);
    read_into(obj, "host", s.endpoint.host, where);
    read_into(obj, "port", s.endpoint.port, where);
    read_into(obj, "path", s.endpoint.path, where);
    read_into(obj, "timeout_seconds", s.endpoint.timeout_seconds, where);
    read_into(obj, "max_attempts", s.endpoint.max_attempts, where);
    read_into(obj, "initial_backoff_ms", s.endpoint.initial_backoff_ms, where);
    read_into(obj, "max_in_flight", s.endpoint.max_in_flight, where);
    read_into(obj, "api_key_env", s.api_key_env, where);
}

}  // namespace

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.embedding.endpoint.path = "/embed";
    cfg.embedding.api_key_env = "HALLEVAL_EMBEDDING_API_KEY";
    cfg.generation.endpoint.path = "/generate";
    cfg.generation.api_key_env = "HALLEVAL_GENERATION_API_KEY";
    return cfg;
}

void validate(const RunConfig& cfg) {
    if (cfg.chunk_size <= 0) {
        throw std::invalid_argument("config: chunk_size must be positive");
    }
    if (cfg.overlap < 0 || cfg.overlap >= cfg.chunk_size) {
        throw std::invalid_argument("config: overlap must satisfy 0 <= overlap < chunk_size");
    }
    if (cfg.top_k <= 0) throw std::invalid_argument("config: top_k must be positive");
    if (cfg.embedding_dimension <= 0) {
        throw std::invalid_argument("config: embedding_dimension must be positive");
    }
    for (const auto* s : {&cfg.embedding, &cfg.generation}) {
        if (s->endpoint.port < 0 || s->endpoint.port > 65535) {
            throw std::invalid_argument("config: endpoint port out of range");
        }
        if (s->endpoint.timeout_seconds <= 0 || s->endpoint.max_attempts <= 0 ||
            s->endpoint.initial_backoff_ms < 0 || s->endpoint.max_in_flight <= 0) {
            throw std::invalid_argument("config: endpoint limits must be positive");
        }
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("config: cannot open " + path.string());
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw std::invalid_argument("config: " + path.string() + " is not a JSON object");
    }
    const std::string where = path.filename().string();
    reject_unknown_keys(doc,
                        {"normalization", "chunk_size", "overlap", "top_k", "metrics",
                         "embedding_dimension", "seed", "endpoints"},
                        where);

    RunConfig cfg = default_run_config();
    if (doc.contains("normalization")) {
        const json& n = doc.at("normalization");
        if (!n.is_object()) {
            throw std::invalid_argument("config: normalization must be an object");
        }
        reject_unknown_keys(n, {"lowercase", "strip_punctuation", "apply_stemming"},
                            where + ".normalization");
        read_into(n, "lowercase", cfg.normalization.lowercase, where);
        read_into(n, "strip_punctuation", cfg.normalization.strip_punctuation, where);
        read_into(n, "apply_stemming", cfg.normalization.apply_stemming, where);
    }
    read_into(doc, "chunk_size", cfg.chunk_size, where);
    read_into(doc, "overlap", cfg.overlap, where);
    read_into(doc, "top_k", cfg.top_k, where);
    read_into(doc, "embedding_dimension", cfg.embedding_dimension, where);
    read_into(doc, "seed", cfg.seed, where);
    if (doc.contains("metrics")) {
        const json& m = doc.at("metrics");
        if (!m.is_array()) throw std::invalid_argument("config: metrics must be an array");
        cfg.metric_ids.clear();
        for (const json& name : m) {
            if (!name.is_string()) {
                throw std::invalid_argument("config: metrics entries must be strings");
            }
            cfg.metric_ids.push_back(metrics::metric_from_string(name.get<std::string>()));
        }
    }
    if (doc.contains("endpoints")) {
        const json& e = doc.at("endpoints");
        if (!e.is_object()) {
            throw std::invalid_argument("config: endpoints must be an object");
        }
        reject_unknown_keys(e, {"embedding", "generation"}, where + ".endpoints");
        if (e.contains("embedding")) {
            endpoint_from_json(e.at("embedding"), cfg.embedding, where + ".endpoints.embedding");
        }
        if (e.contains("generation")) {
            endpoint_from_json(e.at("generation"), cfg.generation,
                               where + ".endpoints.generation");
        }
    }
    validate(cfg);
    return cfg;
}

std::string render_run_config(const RunConfig& cfg) {
    json metric_names = json::array();
    for (metrics::MetricId id : cfg.metric_ids) {
        metric_names.push_back(metrics::to_string(id));
    }
    json doc{{"normalization",
              {{"lowercase", cfg.normalization.lowercase},
               {"strip_punctuation", cfg.normalization.strip_punctuation},
               {"apply_stemming", cfg.normalization.apply_stemming}}},
             {"chunk_size", cfg.chunk_size},
             {"overlap", cfg.overlap},
             {"top_k", cfg.top_k},
             {"metrics", metric_names},
             {"embedding_dimension", cfg.embedding_dimension},
             {"seed", cfg.seed},
             {"endpoints",
              {{"embedding", endpoint_to_json(cfg.embedding)},
               {"generation", endpoint_to_json(cfg.generation)}}}};
    return doc.dump(2) + "\n";
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("config: cannot open " + path.string() + " for writing");
    }
    out << render_run_config(cfg);
    if (!out) throw std::runtime_error("config: write to " + path.string() + " failed");
}

}  // namespace halleval::config
