#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "halleval/ingest.hpp"
#include "halleval/nmiss.hpp"

namespace halleval::report {

// ---------------------------------------------------------------------------
// Scoring records
// ---------------------------------------------------------------------------

/// One scored (record, metric, component) outcome, tagged with the grouping
/// keys the tables aggregate over.
struct ScoredResult {
    std::string record_id;
    std::string model;
    ingest::Level level = ingest::Level::kLow;
    nmiss::NmissBreakdown breakdown;
};

struct EvaluationOptions {
    /// Metrics to score; empty means default_metrics().
    std::vector<metrics::MetricId> metric_ids;
    nmiss::NmissOptions nmiss;
};

/// The metrics with a context-aware form, in canonical order:
/// ROUGE-1, ROUGE-2, ROUGE-L, BLEU, METEOR.
std::vector<metrics::MetricId> default_metrics();

/// Scores every record under every requested metric. jobs > 1 spreads the
/// records over that many threads; the result order is always
/// (input record, metric, component), independent of scheduling.
/// Throws std::invalid_argument for metrics without a context-aware form.
std::vector<ScoredResult> score_records(const std::vector<ingest::EvalRecord>& records,
                                        const EvaluationOptions& opts = {},
                                        int jobs = 1);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct AggregateRow {
    std::string model;
    ingest::Level level = ingest::Level::kLow;
    metrics::MetricId metric = metrics::MetricId::kRouge1;
    metrics::Component component = metrics::Component::kScalar;
    double base_mean = 0.0;
    double nmiss_mean = 0.0;
    std::size_t n_records = 0;

    bool operator==(const AggregateRow&) const = default;
};

struct OutperformanceRow {
    std::string model;
    ingest::Level level = ingest::Level::kLow;
    metrics::MetricId metric = metrics::MetricId::kRouge1;
    metrics::Component component = metrics::Component::kScalar;
    /// Share of records whose rescued score strictly exceeds the base score,
    /// in percent.
    double pct_nmiss_greater = 0.0;

    bool operator==(const OutperformanceRow&) const = default;
};

/// Arithmetic means per (model, level, metric, component) group, rows sorted
/// by that key. Throws std::invalid_argument on empty input.
std::vector<AggregateRow> aggregate(const std::vector<ScoredResult>& results);

/// Strict-gain share per group, same grouping, ordering and emptiness rules
/// as aggregate(). Ties count as no gain.
std::vector<OutperformanceRow> outperformance(const std::vector<ScoredResult>& results);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

enum class EmitFormat { kCsv, kMarkdown, kPlotJson };

/// Renders rows to text. CSV uses RFC 4180 quoting and shortest round-trip
/// number formatting; Markdown groups rows into one table per (model, level)
/// and bolds the rescued value iff it strictly exceeds the base; PLOT_JSON is
/// {"schema_version", "series": [{model, level, metric, points}]}.
std::string render(const std::vector<AggregateRow>& rows, EmitFormat format);
std::string render(const std::vector<OutperformanceRow>& rows, EmitFormat format);

/// render() to a file. Throws std::invalid_argument on empty rows and
/// std::runtime_error on unwritable paths.
void emit(const std::vector<AggregateRow>& rows, EmitFormat format,
          const std::filesystem::path& path);
void emit(const std::vector<OutperformanceRow>& rows, EmitFormat format,
          const std::filesystem::path& path);

/// Inverse of the CSV rendering of aggregate rows; exact round-trip.
/// Throws std::runtime_error on malformed input, naming the line.
std::vector<AggregateRow> parse_aggregate_csv(const std::filesystem::path& path);

}  // namespace halleval::report
