#include "halleval/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace halleval::report {

namespace {

using json = nlohmann::json;

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("parse_aggregate_csv: bad number \"" + s +
                                 "\" at line " + std::to_string(line_no));
    }
    return v;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// RFC 4180 field splitter; quoted fields may hold commas, quotes, newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty() && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            rows.push_back(std::move(row));
            row.clear();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (field_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Grouping key; tuple ordering gives the canonical row order.
using GroupKey = std::tuple<std::string, int, int, int>;

GroupKey key_of(const ScoredResult& r) {
    return {r.model, static_cast<int>(r.level), static_cast<int>(r.breakdown.metric),
            static_cast<int>(r.breakdown.component)};
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("emit: cannot open " + path.string() + " for writing");
    }
    out << body;
    if (!out) throw std::runtime_error("emit: write to " + path.string() + " failed");
}

std::string level_name(ingest::Level l) { return ingest::to_string(l); }

// Markdown and PLOT_JSON share the (model, level [, metric]) walk; rows must
// already be in canonical order.
template <typename Row, typename CellFn>
std::string render_markdown(const std::vector<Row>& rows, const std::string& value_header,
                            CellFn&& cell) {
    std::string out;
    std::string open_model;
    ingest::Level open_level = ingest::Level::kLow;
    bool first = true;
    for (const Row& r : rows) {
        if (first || r.model != open_model || r.level != open_level) {
            if (!first) out += "\n";
            open_model = r.model;
            open_level = r.level;
            first = false;
            out += "## " + r.model + " (" + level_name(r.level) + ")\n\n";
            out += "| metric | component | " + value_header + " |\n";
            out += "| --- | --- | " + std::string("--- |\n");
        }
        out += "| " + metrics::to_string(r.metric) + " | " +
               metrics::to_string(r.component) + " | " + cell(r) + " |\n";
    }
    return out;
}

template <typename Row, typename PointFn>
std::string render_plot_json(const std::vector<Row>& rows, PointFn&& point) {
    json series = json::array();
    json* open = nullptr;
    std::tuple<std::string, int, int> open_key{"", -1, -1};
    for (const Row& r : rows) {
        std::tuple<std::string, int, int> k{r.model, static_cast<int>(r.level),
                                            static_cast<int>(r.metric)};
        if (open == nullptr || k != open_key) {
            series.push_back(json{{"model", r.model},
                                  {"level", level_name(r.level)},
                                  {"metric", metrics::to_string(r.metric)},
                                  {"points", json::array()}});
            open = &series.back();
            open_key = k;
        }
        (*open)["points"].push_back(point(r));
    }
    json doc{{"schema_version", 1}, {"series", series}};
    return doc.dump(2) + "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// Scoring records
// ---------------------------------------------------------------------------

std::vector<metrics::MetricId> default_metrics() {
    return {metrics::MetricId::kRouge1, metrics::MetricId::kRouge2,
            metrics::MetricId::kRougeL, metrics::MetricId::kBleu,
            metrics::MetricId::kMeteor};
}

std::vector<ScoredResult> score_records(const std::vector<ingest::EvalRecord>& records,
                                        const EvaluationOptions& opts, int jobs) {
    const std::vector<metrics::MetricId> ids =
        opts.metric_ids.empty() ? default_metrics() : opts.metric_ids;
    for (metrics::MetricId id : ids) {
        if (id == metrics::MetricId::kExactMatch || id == metrics::MetricId::kBertScore) {
            throw std::invalid_argument("score_records: " + metrics::to_string(id) +
                                        " has no context-aware form");
        }
    }

    // Per-record slots keep the output order fixed under any thread schedule.
    std::vector<std::vector<ScoredResult>> slots(records.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        try {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= records.size()) break;
                const ingest::EvalRecord& rec = records[i];
                for (metrics::MetricId id : ids) {
                    auto parts = nmiss::evaluate_nmiss(rec.system_tokens,
                                                       rec.reference_tokens,
                                                       rec.context_tokens, id, opts.nmiss);
                    for (nmiss::NmissBreakdown& b : parts) {
                        slots[i].push_back(ScoredResult{rec.id, rec.model, rec.level, b});
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    const int workers = std::max(1, jobs);
    if (workers == 1 || records.size() <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        const int spawned = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(workers), records.size()));
        pool.reserve(static_cast<std::size_t>(spawned) - 1);
        for (int t = 1; t < spawned; ++t) pool.emplace_back(work);
        work();
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<ScoredResult> out;
    for (std::vector<ScoredResult>& s : slots) {
        out.insert(out.end(), std::make_move_iterator(s.begin()),
                   std::make_move_iterator(s.end()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

namespace {

struct Accum {
    double base_sum = 0.0;
    double nmiss_sum = 0.0;
    std::size_t n = 0;
    std::size_t strictly_greater = 0;
};

std::map<GroupKey, Accum> group(const std::vector<ScoredResult>& results,
                                const char* op_name) {
    if (results.empty()) {
        throw std::invalid_argument(std::string(op_name) + ": no results to aggregate");
    }
    std::map<GroupKey, Accum> groups;
    for (const ScoredResult& r : results) {
        Accum& a = groups[key_of(r)];
        a.base_sum += r.breakdown.f_ref;
        a.nmiss_sum += r.breakdown.final_score;
        a.n += 1;
        if (r.breakdown.final_score > r.breakdown.f_ref) a.strictly_greater += 1;
    }
    return groups;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<ScoredResult>& results) {
    std::vector<AggregateRow> rows;
    for (const auto& [key, a] : group(results, "aggregate")) {
        AggregateRow row;
        row.model = std::get<0>(key);
        row.level = static_cast<ingest::Level>(std::get<1>(key));
        row.metric = static_cast<metrics::MetricId>(std::get<2>(key));
        row.component = static_cast<metrics::Component>(std::get<3>(key));
        row.base_mean = a.base_sum / static_cast<double>(a.n);
        row.nmiss_mean = a.nmiss_sum / static_cast<double>(a.n);
        row.n_records = a.n;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<OutperformanceRow> outperformance(const std::vector<ScoredResult>& results) {
    std::vector<OutperformanceRow> rows;
    for (const auto& [key, a] : group(results, "outperformance")) {
        OutperformanceRow row;
        row.model = std::get<0>(key);
        row.level = static_cast<ingest::Level>(std::get<1>(key));
        row.metric = static_cast<metrics::MetricId>(std::get<2>(key));
        row.component = static_cast<metrics::Component>(std::get<3>(key));
        row.pct_nmiss_greater =
            100.0 * static_cast<double>(a.strictly_greater) / static_cast<double>(a.n);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string render(const std::vector<AggregateRow>& rows, EmitFormat format) {
    if (rows.empty()) throw std::invalid_argument("render: no rows");
    switch (format) {
        case EmitFormat::kCsv: {
            std::string out = "model,level,metric,component,base_mean,nmiss_mean,n_records\n";
            for (const AggregateRow& r : rows) {
                out += csv_escape(r.model) + ',' + level_name(r.level) + ',' +
                       metrics::to_string(r.metric) + ',' +
                       metrics::to_string(r.component) + ',' +
                       format_double(r.base_mean) + ',' + format_double(r.nmiss_mean) +
                       ',' + std::to_string(r.n_records) + '\n';
            }
            return out;
        }
        case EmitFormat::kMarkdown:
            return render_markdown(rows, "base | nmiss", [](const AggregateRow& r) {
                const std::string base = format_fixed(r.base_mean);
                std::string nmiss = format_fixed(r.nmiss_mean);
                if (r.nmiss_mean > r.base_mean) nmiss = "**" + nmiss + "**";
                return base + " | " + nmiss;
            });
        case EmitFormat::kPlotJson:
            return render_plot_json(rows, [](const AggregateRow& r) {
                return json{{"component", metrics::to_string(r.component)},
                            {"base", r.base_mean},
                            {"nmiss", r.nmiss_mean},
                            {"n_records", r.n_records}};
            });
    }
    throw std::invalid_argument("render: unknown format");
}

std::string render(const std::vector<OutperformanceRow>& rows, EmitFormat format) {
    if (rows.empty()) throw std::invalid_argument("render: no rows");
    switch (format) {
        case EmitFormat::kCsv: {
            std::string out = "model,level,metric,component,pct_nmiss_greater\n";
            for (const OutperformanceRow& r : rows) {
                out += csv_escape(r.model) + ',' + level_name(r.level) + ',' +
                       metrics::to_string(r.metric) + ',' +
                       metrics::to_string(r.component) + ',' +
                       format_double(r.pct_nmiss_greater) + '\n';
            }
            return out;
        }
        case EmitFormat::kMarkdown:
            return render_markdown(rows, "% rescued above base",
                                   [](const OutperformanceRow& r) {
                                       return format_fixed(r.pct_nmiss_greater);
                                   });
        case EmitFormat::kPlotJson:
            return render_plot_json(rows, [](const OutperformanceRow& r) {
                return json{{"component", metrics::to_string(r.component)},
                            {"pct_nmiss_greater", r.pct_nmiss_greater}};
            });
    }
    throw std::invalid_argument("render: unknown format");
}

void emit(const std::vector<AggregateRow>& rows, EmitFormat format,
          const std::filesystem::path& path) {
    write_text(path, render(rows, format));
}

void emit(const std::vector<OutperformanceRow>& rows, EmitFormat format,
          const std::filesystem::path& path) {
    write_text(path, render(rows, format));
}

std::vector<AggregateRow> parse_aggregate_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("parse_aggregate_csv: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto rows = parse_csv(buf.str());
    if (rows.empty()) throw std::runtime_error("parse_aggregate_csv: empty file");

    const std::vector<std::string> header{"model",     "level",      "metric",
                                          "component", "base_mean", "nmiss_mean",
                                          "n_records"};
    if (rows[0] != header) {
        throw std::runtime_error("parse_aggregate_csv: unexpected header at line 1");
    }
    std::vector<AggregateRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& fields = rows[i];
        const std::size_t line_no = i + 1;
        if (fields.size() != header.size()) {
            throw std::runtime_error("parse_aggregate_csv: expected " +
                                     std::to_string(header.size()) + " fields at line " +
                                     std::to_string(line_no));
        }
        AggregateRow row;
        row.model = fields[0];
        row.level = ingest::level_from_string(fields[1]);
        row.metric = metrics::metric_from_string(fields[2]);
        row.component = metrics::component_from_string(fields[3]);
        row.base_mean = parse_double(fields[4], line_no);
        row.nmiss_mean = parse_double(fields[5], line_no);
        std::size_t n = 0;
        auto res = std::from_chars(fields[6].data(), fields[6].data() + fields[6].size(), n);
        if (res.ec != std::errc{} || res.ptr != fields[6].data() + fields[6].size()) {
            throw std::runtime_error("parse_aggregate_csv: bad count \"" + fields[6] +
                                     "\" at line " + std::to_string(line_no));
        }
        row.n_records = n;
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace halleval::report
