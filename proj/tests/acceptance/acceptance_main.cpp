// Release gate for the evaluation toolkit. Each criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any criterion fails. All
// randomness is seeded, so a failure reproduces bit-for-bit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <sys/wait.h>

#include "halleval/embedding.hpp"
#include "halleval/ingest.hpp"
#include "halleval/metrics.hpp"
#include "halleval/nmiss.hpp"
#include "halleval/rag.hpp"
#include "halleval/report.hpp"
#include "halleval/text.hpp"

#ifndef HALLEVAL_CLI_PATH
#error "HALLEVAL_CLI_PATH must point at the command line binary"
#endif
#ifndef HALLEVAL_DATA_DIR
#error "HALLEVAL_DATA_DIR must point at the bundled data directory"
#endif

namespace {

using halleval::embedding::EmbeddingVector;
using halleval::embedding::HashedTfProvider;
using halleval::metrics::Component;
using halleval::metrics::MetricId;
using halleval::text::TokenSequence;

constexpr double kTol = 1e-12;

const std::vector<MetricId> kRescuableMetrics = {
    MetricId::kRouge1, MetricId::kRouge2, MetricId::kRougeL,
    MetricId::kBleu,   MetricId::kMeteor,
};

// ============================================================================
// Helpers
// ============================================================================

TokenSequence toks(std::initializer_list<const char*> words) {
    TokenSequence out;
    for (const char* w : words) out.push_back(halleval::text::Token{w});
    return out;
}

TokenSequence random_sequence(std::mt19937& rng, std::size_t min_len,
                              std::size_t max_len, std::size_t vocab) {
    std::uniform_int_distribution<std::size_t> len_dist(min_len, max_len);
    std::uniform_int_distribution<std::size_t> word_dist(0, vocab - 1);
    TokenSequence out;
    const std::size_t n = len_dist(rng);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(halleval::text::Token{"tok" + std::to_string(word_dist(rng))});
    }
    return out;
}

EmbeddingVector random_unit_vector(std::mt19937& rng, std::size_t dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    EmbeddingVector v;
    v.values.resize(dim);
    for (auto& x : v.values) x = gauss(rng);
    halleval::embedding::normalize(v);
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable:" + path.string() + ">";
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + HALLEVAL_CLI_PATH + "\" " + args +
                            " > /dev/null 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// A criterion returns std::nullopt on success or a short failure reason.
using Verdict = std::optional<std::string>;

std::string fail(const std::string& reason) { return reason; }

// ============================================================================
// 1. Rescue floor on randomized records
// ============================================================================

Verdict criterion_rescue_floor() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto system = random_sequence(rng, 1, 100, 9);
        const auto reference = random_sequence(rng, 1, 100, 9);
        const auto context = random_sequence(rng, 1, 100, 9);
        for (const auto metric : kRescuableMetrics) {
            const auto rows = halleval::nmiss::evaluate_nmiss(system, reference, context, metric);
            for (const auto& b : rows) {
                if (b.final_score < b.f_ref) {
                    return fail("record " + std::to_string(i) + " " +
                                halleval::metrics::to_string(metric) + "/" +
                                halleval::metrics::to_string(b.component) +
                                " dropped below its base score");
                }
            }
        }
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    if (elapsed.count() >= 30.0) return fail("took " + std::to_string(elapsed.count()) + "s");
    return std::nullopt;
}

// ============================================================================
// 2. Perfect answers stay put
// ============================================================================

Verdict criterion_identity_fixpoint() {
    std::mt19937 rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto reference = random_sequence(rng, 1, 60, 7);
        const auto context = random_sequence(rng, 1, 80, 7);
        for (const auto metric : kRescuableMetrics) {
            const auto rows = halleval::nmiss::evaluate_nmiss(reference, reference, context, metric);
            for (const auto& b : rows) {
                if (std::abs(b.final_score - b.f_ref) > kTol) {
                    return fail("case " + std::to_string(i) + " " +
                                halleval::metrics::to_string(metric) +
                                " moved a perfect answer by " +
                                std::to_string(b.final_score - b.f_ref));
                }
            }
        }
    }
    return std::nullopt;
}

// ============================================================================
// 3. Combination rule against an independent oracle
// ============================================================================

Verdict criterion_combine_rule() {
    const double worked = halleval::nmiss::nmiss_combine(0.5, 1.0, 2.0, 2.0);
    if (std::abs(worked - 0.75) > kTol) {
        return fail("worked example gave " + std::to_string(worked) + " instead of 0.75");
    }
    auto oracle = [](double fr, double fc, double l1, double l2) { return l1 + l2 > 0.0 ? std::max(fr, (l1 * fr + l2 * fc) / (l1 + l2)) : fr; };
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> lam(0, 10);
    for (int i = 0; i < 50; ++i) {
        const double fr = unit(rng);
        const double fc = unit(rng);
        const double l1 = static_cast<double>(lam(rng));
        const double l2 = static_cast<double>(lam(rng));
        const double got = halleval::nmiss::nmiss_combine(fr, fc, l1, l2);
        if (std::abs(got - oracle(fr, fc, l1, l2)) > kTol) {
            return fail("tuple " + std::to_string(i) + " disagreed with the oracle");
        }
    }
    return std::nullopt;
}

// ============================================================================
// 4. Common-subsequence length against exhaustive enumeration
// ============================================================================

std::size_t lcs_by_enumeration(const TokenSequence& a, const TokenSequence& b) {
    std::size_t best = 0;
    for (std::size_t mask = 0; mask < (static_cast<std::size_t>(1) << a.size()); ++mask) {
        std::size_t bi = 0;
        std::size_t picked = 0;
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) {
            if (!(mask & (static_cast<std::size_t>(1) << i))) continue;
            while (bi < b.size() && b[bi] != a[i]) ++bi;
            if (bi == b.size()) {
                ok = false;
            } else {
                ++bi;
                ++picked;
            }
        }
        if (ok) best = std::max(best, picked);
    }
    return best;
}

Verdict criterion_lcs_exact() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937 rng(14);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_sequence(rng, 0, 10, 3);
        const auto b = random_sequence(rng, 0, 10, 3);
        const auto got = halleval::metrics::lcs_length(a, b);
        const auto want = lcs_by_enumeration(a, b);
        if (got != want) {
            return fail("pair " + std::to_string(i) + ": got " + std::to_string(got) +
                        ", enumeration says " + std::to_string(want));
        }
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    if (elapsed.count() >= 10.0) return fail("took " + std::to_string(elapsed.count()) + "s");
    return std::nullopt;
}

// ============================================================================
// 5. Clipped precision, identity score, and brevity penalty
// ============================================================================

Verdict criterion_bleu_anchors() {
    const TokenSequence cand = toks({"the", "the", "the"});
    const auto clipped = halleval::metrics::bleu(cand, {toks({"the", "cat"})});
    if (clipped.per_order_precision.at(0) != 1.0 / 3.0) {
        return fail("clipped unigram precision was " +
                    std::to_string(clipped.per_order_precision.at(0)) + ", want 1/3");
    }
    const TokenSequence sent = toks({"il", "governo", "vara", "il", "nuovo", "decreto"});
    const auto self = halleval::metrics::bleu(sent, {sent});
    if (self.value != 1.0) {
        return fail("identity candidate scored " + std::to_string(self.value));
    }
    std::mt19937 rng(15);
    std::uniform_int_distribution<std::size_t> cand_len(1, 40);
    std::uniform_int_distribution<std::size_t> ref_len(0, 40);
    for (int i = 0; i < 100; ++i) {
        const std::size_t b = cand_len(rng);
        const std::size_t r = ref_len(rng);
        const TokenSequence c(b, halleval::text::Token{"w"});
        const TokenSequence ref(r, halleval::text::Token{"w"});
        const auto score = halleval::metrics::bleu(c, {ref});
        const double want =
            b > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(b));
        if (std::abs(score.brevity_penalty - want) > kTol) {
            return fail("length pair (" + std::to_string(b) + ", " + std::to_string(r) +
                        ") gave penalty " + std::to_string(score.brevity_penalty));
        }
    }
    return std::nullopt;
}

// ============================================================================
// 6. Alignment score anchors and chunk-count bounds
// ============================================================================

Verdict criterion_meteor_anchors() {
    const auto one = halleval::metrics::meteor(toks({"casa"}), toks({"casa"}));
    if (one.value != 0.5) {
        return fail("single-token identity scored " + std::to_string(one.value) + ", want 0.5");
    }
    const auto quad = toks({"il", "gatto", "sul", "tetto"});
    const auto four = halleval::metrics::meteor(quad, quad);
    if (four.value != 0.875) {
        return fail("four-token identity scored " + std::to_string(four.value) + ", want 0.875");
    }
    std::mt19937 rng(16);
    for (int i = 0; i < 1000; ++i) {
        auto sys = random_sequence(rng, 1, 30, 5);
        auto ref = random_sequence(rng, 1, 30, 5);
        ref.front() = sys.front();  // guarantee at least one shared surface
        const auto score = halleval::metrics::meteor(sys, ref);
        if (score.matched_unigrams < 1 || score.chunk_count < 1 ||
            score.chunk_count > score.matched_unigrams) {
            return fail("pair " + std::to_string(i) + ": " +
                        std::to_string(score.chunk_count) + " chunks over " +
                        std::to_string(score.matched_unigrams) + " matches");
        }
    }
    return std::nullopt;
}

// ============================================================================
// 7. Embedding similarity: self-identity and brute-force parity
// ============================================================================

Verdict criterion_embedding_similarity() {
    HashedTfProvider provider(64);
    std::mt19937 rng(17);
    for (int i = 0; i < 100; ++i) {
        const auto seq = random_sequence(rng, 1, 12, 10);
        const auto triple = halleval::metrics::bertscore(seq, seq, provider);
        if (triple.precision != 1.0 || triple.recall != 1.0 || triple.f1 != 1.0) {
            return fail("sequence " + std::to_string(i) + " did not self-match exactly");
        }
    }
    for (int i = 0; i < 200; ++i) {
        const auto sys = random_sequence(rng, 1, 6, 6);
        const auto ref = random_sequence(rng, 1, 6, 6);
        const auto got = halleval::metrics::bertscore(sys, ref, provider);

        const auto sv = provider.embed_tokens(sys);
        const auto rv = provider.embed_tokens(ref);
        auto cos = [](const EmbeddingVector& a, const EmbeddingVector& b) {
            double d = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t j = 0; j < a.values.size(); ++j) {
                d += a.values[j] * b.values[j];
                na += a.values[j] * a.values[j];
                nb += b.values[j] * b.values[j];
            }
            const double denom = std::sqrt(na) * std::sqrt(nb);
            return denom == 0.0 ? 0.0 : d / denom;
        };
        double p = 0.0;
        for (const auto& v : sv) {
            double best = 0.0;
            for (const auto& w : rv) best = std::max(best, cos(v, w));
            p += best;
        }
        p /= static_cast<double>(sv.size());
        double r = 0.0;
        for (const auto& w : rv) {
            double best = 0.0;
            for (const auto& v : sv) best = std::max(best, cos(v, w));
            r += best;
        }
        r /= static_cast<double>(rv.size());
        if (std::abs(got.precision - p) > kTol || std::abs(got.recall - r) > kTol ||
            std::abs(got.f1 - halleval::metrics::f1_of(p, r)) > kTol) {
            return fail("pair " + std::to_string(i) + " diverged from the all-pairs oracle");
        }
    }
    return std::nullopt;
}

// ============================================================================
// 8. Chunk coverage and overlap
// ============================================================================

Verdict criterion_chunker() {
    std::mt19937 rng(18);
    std::uniform_int_distribution<std::size_t> len_dist(1, 5000);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = i < 40 ? static_cast<std::size_t>(i * 13 + 1) : len_dist(rng);
        TokenSequence doc;
        doc.reserve(n);
        for (std::size_t t = 0; t < n; ++t) {
            doc.push_back(halleval::text::Token{"t" + std::to_string(t)});
        }
        const auto chunks = halleval::rag::chunk_document("d", doc, 512, 64);
        if (chunks.empty() || chunks.front().token_begin != 0 || chunks.back().token_end != n) {
            return fail("length " + std::to_string(n) + ": coverage endpoints wrong");
        }
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            const auto& ch = chunks[c];
            if (ch.tokens.size() != ch.token_end - ch.token_begin ||
                !std::equal(ch.tokens.begin(), ch.tokens.end(), doc.begin() + static_cast<long>(ch.token_begin))) {
                return fail("length " + std::to_string(n) + ": chunk " + std::to_string(c) +
                            " does not mirror the document slice");
            }
            if (c > 0 && chunks[c - 1].token_end - ch.token_begin != 64) {
                return fail("length " + std::to_string(n) + ": overlap at chunk " +
                            std::to_string(c) + " is " +
                            std::to_string(chunks[c - 1].token_end - ch.token_begin));
            }
        }
    }
    TokenSequence kilo(1000, halleval::text::Token{"x"});
    const auto three = halleval::rag::chunk_document("d", kilo, 512, 64);
    if (three.size() != 3 || three[0].token_end != 512 || three[1].token_begin != 448 ||
        three[1].token_end != 960 || three[2].token_begin != 896 || three[2].token_end != 1000) {
        return fail("1000-token document split into " + std::to_string(three.size()) +
                    " chunks with unexpected bounds");
    }
    return std::nullopt;
}

// ============================================================================
// 9. Retrieval against a linear-scan oracle
// ============================================================================

Verdict criterion_retrieval() {
    std::mt19937 rng(19);
    std::uniform_int_distribution<std::size_t> count_dist(1, 1000);
    for (int s = 0; s < 100; ++s) {
        const std::size_t count = count_dist(rng);
        halleval::rag::VectorStore store(16);
        for (std::size_t i = 0; i < count; ++i) {
            halleval::rag::Chunk ch;
            ch.doc_id = "d" + std::to_string(i);
            ch.seq_no = 0;
            store.add(std::move(ch), random_unit_vector(rng, 16));
        }
        const auto query = random_unit_vector(rng, 16);

        std::vector<std::size_t> order(store.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::vector<double> scores(store.size());
        for (std::size_t i = 0; i < store.size(); ++i) {
            scores[i] = halleval::embedding::cosine(store.at(i).vector, query);
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            const auto& ca = store.at(a).chunk;
            const auto& cb = store.at(b).chunk;
            return std::tie(ca.doc_id, ca.seq_no) < std::tie(cb.doc_id, cb.seq_no);
        });

        for (const std::size_t k : {std::size_t{1}, std::size_t{4}, std::size_t{10}}) {
            const auto got = halleval::rag::retrieve_top_k(store, query, k);
            const std::size_t want_n = std::min(k, store.size());
            if (got.size() != want_n) {
                return fail("store " + std::to_string(s) + " k=" + std::to_string(k) +
                            " returned " + std::to_string(got.size()) + " results");
            }
            for (std::size_t i = 0; i < want_n; ++i) {
                const auto& expect = store.at(order[i]).chunk;
                if (got[i].chunk.doc_id != expect.doc_id || got[i].chunk.seq_no != expect.seq_no ||
                    got[i].rank != i + 1 || std::abs(got[i].score - scores[order[i]]) > kTol) {
                    return fail("store " + std::to_string(s) + " k=" + std::to_string(k) +
                                " rank " + std::to_string(i + 1) + " disagreed with the scan");
                }
            }
        }
    }

    // Constructed ties: identical vectors must order by (doc_id, seq_no).
    halleval::rag::VectorStore ties(4);
    EmbeddingVector same;
    same.values = {0.5, 0.5, 0.5, 0.5};
    for (const auto& [doc, seq] : std::vector<std::pair<std::string, std::size_t>>{
             {"b", 1}, {"a", 2}, {"b", 0}, {"a", 0}, {"c", 0}, {"a", 1}}) {
        halleval::rag::Chunk ch;
        ch.doc_id = doc;
        ch.seq_no = seq;
        ties.add(std::move(ch), same);
    }
    EmbeddingVector probe;
    probe.values = {1.0, 1.0, 1.0, 1.0};
    const auto ranked = halleval::rag::retrieve_top_k(ties, probe, 4);
    const std::vector<std::pair<std::string, std::size_t>> want = {
        {"a", 0}, {"a", 1}, {"a", 2}, {"b", 0}};
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (ranked[i].chunk.doc_id != want[i].first || ranked[i].chunk.seq_no != want[i].second ||
            ranked[i].rank != i + 1) {
            return fail("tie at rank " + std::to_string(i + 1) + " resolved to " +
                        ranked[i].chunk.doc_id + "#" + std::to_string(ranked[i].chunk.seq_no));
        }
    }
    return std::nullopt;
}

// ============================================================================
// 10. Bundled fixture reproduces the published rescue patterns
// ============================================================================

Verdict criterion_fixture_patterns() {
    const std::filesystem::path fixture =
        std::filesystem::path(HALLEVAL_DATA_DIR) / "fixtures" / "pattern_eval.jsonl";
    const auto records = halleval::ingest::load_eval_dataset(fixture);
    if (records.size() != 30) {
        return fail("fixture holds " + std::to_string(records.size()) + " records, want 30");
    }
    const auto results = halleval::report::score_records(records);

    int borrower_n = 0;
    int r1_gain = 0, r2_gain = 0;
    double saturated_max_delta = 0.0;
    for (const auto& res : results) {
        const auto& b = res.breakdown;
        if (res.model == "saturated") {
            saturated_max_delta = std::max(saturated_max_delta, std::abs(b.final_score - b.f_ref));
            continue;
        }
        if (b.component != Component::kPrecision) continue;
        if (b.metric == MetricId::kRouge1) {
            ++borrower_n;
            if (b.final_score > b.f_ref) ++r1_gain;
        } else if (b.metric == MetricId::kRouge2 && b.final_score > b.f_ref) {
            ++r2_gain;
        }
    }
    if (borrower_n != 15) {
        return fail("expected 15 borrower records, saw " + std::to_string(borrower_n));
    }
    const double pct1 = 100.0 * r1_gain / borrower_n;
    const double pct2 = 100.0 * r2_gain / borrower_n;
    if (!(pct1 > pct2)) {
        return fail("unigram rescue rate " + std::to_string(pct1) +
                    "% does not exceed bigram rate " + std::to_string(pct2) + "%");
    }
    if (saturated_max_delta > 0.02) {
        return fail("saturated series moved by " + std::to_string(saturated_max_delta));
    }

    // The aggregated outperformance table must show the same ordering per level.
    for (const auto& row : halleval::report::outperformance(results)) {
        if (row.model != "borrower" || row.component != Component::kPrecision) continue;
        if (row.metric != MetricId::kRouge2) continue;
        for (const auto& other : halleval::report::outperformance(results)) {
            if (other.model == "borrower" && other.level == row.level &&
                other.metric == MetricId::kRouge1 && other.component == Component::kPrecision &&
                !(other.pct_nmiss_greater > row.pct_nmiss_greater)) {
                return fail("level " + halleval::ingest::to_string(row.level) +
                            " does not rank unigram rescue above bigram rescue");
            }
        }
    }
    return std::nullopt;
}

// ============================================================================
// 11. End-to-end determinism of the evaluate command
// ============================================================================

Verdict criterion_cli_determinism() {
    const auto start = std::chrono::steady_clock::now();
    const std::filesystem::path fixture =
        std::filesystem::path(HALLEVAL_DATA_DIR) / "fixtures" / "pattern_eval.jsonl";
    const std::filesystem::path base =
        std::filesystem::temp_directory_path() / "halleval_acceptance";
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(base);

    const auto out_a = base / "run_a";
    const auto out_b = base / "run_b";
    for (const auto& out : {out_a, out_b}) {
        const int rc = run_cli("evaluate \"" + fixture.string() + "\" \"" + out.string() + "\"");
        if (rc != 0) return fail("evaluate exited with status " + std::to_string(rc));
    }

    const std::vector<std::string> files = {
        "per_record.jsonl",        "aggregate.csv",      "aggregate.md",
        "aggregate_plot.json",     "outperformance.csv", "outperformance.md",
        "outperformance_plot.json"};
    for (const auto& name : files) {
        if (read_file(out_a / name) != read_file(out_b / name)) {
            return fail(name + " differs between identical runs");
        }
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    if (elapsed.count() >= 60.0) return fail("took " + std::to_string(elapsed.count()) + "s");
    return std::nullopt;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Verdict (*check)();
    };
    const std::vector<Entry> entries = {
        {"rescued score never drops below the base score", criterion_rescue_floor},
        {"answers equal to the reference keep their base score", criterion_identity_fixpoint},
        {"combination rule matches an independent oracle", criterion_combine_rule},
        {"subsequence length matches exhaustive enumeration", criterion_lcs_exact},
        {"clipped precision, identity score, and brevity penalty", criterion_bleu_anchors},
        {"alignment anchors and chunk-count bounds", criterion_meteor_anchors},
        {"embedding similarity self-identity and brute-force parity", criterion_embedding_similarity},
        {"chunk coverage, overlap, and slice fidelity", criterion_chunker},
        {"retrieval matches a linear-scan oracle with ordered ties", criterion_retrieval},
        {"bundled fixture shows unigram rescue without bigram rescue", criterion_fixture_patterns},
        {"evaluate command is byte-deterministic end to end", criterion_cli_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Verdict verdict;
        try {
            verdict = entries[i].check();
        } catch (const std::exception& e) {
            verdict = std::string("unexpected exception: ") + e.what();
        }
        if (verdict) {
            ++failures;
            std::printf("criterion %2zu: FAIL  %s (%s)\n", i + 1, entries[i].name,
                        verdict->c_str());
        } else {
            std::printf("criterion %2zu: PASS  %s\n", i + 1, entries[i].name);
        }
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, entries.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", entries.size());
    return 0;
}
