#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "halleval/metrics.hpp"

using namespace halleval;

namespace {

text::TokenSequence toks(std::initializer_list<const char*> words) {
    text::TokenSequence out;
    for (const char* w : words) out.push_back(text::Token{w});
    return out;
}

text::TokenSequence random_seq(std::mt19937& rng, std::size_t max_len,
                               const std::vector<std::string>& vocab) {
    std::uniform_int_distribution<std::size_t> len_d(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    text::TokenSequence out;
    const std::size_t n = len_d(rng);
    for (std::size_t i = 0; i < n; ++i) out.push_back(text::Token{vocab[pick(rng)]});
    return out;
}

// Reference LCS: enumerate every subsequence of the shorter side and test it
// against the other by greedy scan. Deliberately not a DP.
bool is_subsequence(const text::TokenSequence& needle, const text::TokenSequence& hay) {
    std::size_t i = 0;
    for (const auto& t : hay) {
        if (i < needle.size() && needle[i].surface == t.surface) ++i;
    }
    return i == needle.size();
}

std::size_t lcs_brute(const text::TokenSequence& a, const text::TokenSequence& b) {
    const text::TokenSequence& small = a.size() <= b.size() ? a : b;
    const text::TokenSequence& big = a.size() <= b.size() ? b : a;
    std::size_t best = 0;
    const std::size_t masks = std::size_t{1} << small.size();
    for (std::size_t m = 0; m < masks; ++m) {
        text::TokenSequence sub;
        for (std::size_t i = 0; i < small.size(); ++i) {
            if (m & (std::size_t{1} << i)) sub.push_back(small[i]);
        }
        if (sub.size() > best && is_subsequence(sub, big)) best = sub.size();
    }
    return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// ROUGE
// ---------------------------------------------------------------------------

TEST_CASE("rouge-1 and rouge-2 on a partial overlap") {
    auto ss = toks({"the", "cat", "sat"});
    auto rs = toks({"the", "cat"});

    auto r1 = metrics::rouge_n(ss, rs, 1);
    CHECK(r1.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r1.recall == doctest::Approx(1.0));
    CHECK(r1.f1 == doctest::Approx(0.8));

    auto r2 = metrics::rouge_n(ss, rs, 2);
    CHECK(r2.precision == doctest::Approx(0.5));
    CHECK(r2.recall == doctest::Approx(1.0));
    CHECK(r2.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rouge counts clip repeated n-grams") {
    auto r = metrics::rouge_n(toks({"the", "the", "the"}), toks({"the", "cat"}), 1);
    CHECK(r.precision == doctest::Approx(1.0 / 3.0));
    CHECK(r.recall == doctest::Approx(0.5));
}

TEST_CASE("rouge edge cases: empty inputs, short sequences, n = 0") {
    auto rs = toks({"a", "b"});
    auto empty = metrics::rouge_n({}, rs, 1);
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);

    // Both sides shorter than n: no n-grams at all.
    auto shorty = metrics::rouge_n(toks({"a"}), toks({"b"}), 2);
    CHECK(shorty.f1 == 0.0);

    CHECK_THROWS_AS(metrics::rouge_n(rs, rs, 0), std::invalid_argument);
}

TEST_CASE("rouge identity and swap-symmetry properties") {
    std::mt19937 rng(1234);
    const std::vector<std::string> vocab{"a", "b", "c", "d"};
    for (int it = 0; it < 200; ++it) {
        auto x = random_seq(rng, 8, vocab);
        auto y = random_seq(rng, 8, vocab);
        for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
            if (x.size() >= n) {
                auto self = metrics::rouge_n(x, x, n);
                CHECK(self.precision == doctest::Approx(1.0));
                CHECK(self.recall == doctest::Approx(1.0));
                CHECK(self.f1 == doctest::Approx(1.0));
            }
            auto xy = metrics::rouge_n(x, y, n);
            auto yx = metrics::rouge_n(y, x, n);
            CHECK(xy.precision == doctest::Approx(yx.recall));
            CHECK(xy.recall == doctest::Approx(yx.precision));
            CHECK(xy.f1 == doctest::Approx(yx.f1));
        }
        auto lxy = metrics::rouge_l(x, y);
        auto lyx = metrics::rouge_l(y, x);
        CHECK(lxy.precision == doctest::Approx(lyx.recall));
        CHECK(lxy.f1 == doctest::Approx(lyx.f1));
    }
}

TEST_CASE("lcs length matches exhaustive subsequence search") {
    std::mt19937 rng(99);
    const std::vector<std::string> vocab{"a", "b", "c"};
    for (int it = 0; it < 300; ++it) {
        auto x = random_seq(rng, 10, vocab);
        auto y = random_seq(rng, 10, vocab);
        CHECK(metrics::lcs_length(x, y) == lcs_brute(x, y));
    }
}

TEST_CASE("rouge-l on an interleaved candidate") {
    auto r = metrics::rouge_l(toks({"a", "x", "b", "y"}), toks({"a", "b"}));
    CHECK(r.precision == doctest::Approx(0.5));
    CHECK(r.recall == doctest::Approx(1.0));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
}

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

TEST_CASE("bleu clips repeated unigrams and zeroes on missing bigrams") {
    auto score = metrics::bleu(toks({"the", "the", "the"}), {toks({"the", "cat"})});
    CHECK(score.per_order_precision[0] == doctest::Approx(1.0 / 3.0));
    CHECK(score.per_order_precision[1] == 0.0);
    CHECK(score.brevity_penalty == doctest::Approx(1.0));
    CHECK(score.value == 0.0);
}

TEST_CASE("bleu is 1 for an exact long match") {
    auto seq = toks({"uno", "due", "tre", "quattro", "cinque"});
    auto score = metrics::bleu(seq, {seq});
    CHECK(score.value == doctest::Approx(1.0));
    CHECK(score.brevity_penalty == doctest::Approx(1.0));
    for (double p : score.per_order_precision) CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("bleu effective reference length prefers closest, ties go short") {
    auto ss = toks({"a", "b", "c"});
    // Lengths 2 and 4 are both one away from 3; the shorter wins, so the
    // candidate is longer than the effective reference and BP stays 1.
    auto s1 = metrics::bleu(ss, {toks({"a", "b"}), toks({"a", "b", "c", "d"})},
                            {.max_order = 1});
    CHECK(s1.brevity_penalty == doctest::Approx(1.0));
    auto s2 = metrics::bleu(ss, {toks({"a", "b", "c", "d"}), toks({"a", "b"})},
                            {.max_order = 1});
    CHECK(s2.brevity_penalty == doctest::Approx(1.0));

    // Closest length wins outright when distances differ.
    auto s3 = metrics::bleu(ss, {toks({"a", "b", "c", "d"}),
                                 toks({"a", "b", "c", "d", "e", "f", "g"})},
                            {.max_order = 1});
    CHECK(s3.brevity_penalty == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)));
}

TEST_CASE("bleu brevity penalty follows the piecewise definition") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> len_d(1, 50);
    for (int it = 0; it < 100; ++it) {
        const std::size_t b = len_d(rng);
        const std::size_t r = len_d(rng);
        text::TokenSequence ss, rs;
        for (std::size_t i = 0; i < b; ++i) ss.push_back(text::Token{"w" + std::to_string(i)});
        for (std::size_t i = 0; i < r; ++i) rs.push_back(text::Token{"w" + std::to_string(i)});
        const double expected =
            b > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(b));
        auto score = metrics::bleu(ss, {rs}, {.max_order = 1});
        CHECK(std::abs(score.brevity_penalty - expected) < 1e-12);
        CHECK(score.brevity_penalty <= 1.0 + 1e-12);
    }
}

TEST_CASE("bleu add-one smoothing applies to orders two and up") {
    auto ss = toks({"the", "the", "the"});
    std::vector<text::TokenSequence> refs{toks({"the", "cat"})};

    auto plain = metrics::bleu(ss, refs, {.max_order = 3, .smoothing = false});
    CHECK(plain.value == 0.0);

    auto smooth = metrics::bleu(ss, refs, {.max_order = 3, .smoothing = true});
    CHECK(smooth.per_order_precision[0] == doctest::Approx(1.0 / 3.0));
    CHECK(smooth.per_order_precision[1] == doctest::Approx(1.0 / 3.0));
    CHECK(smooth.per_order_precision[2] == doctest::Approx(0.5));
    CHECK(smooth.value == doctest::Approx(0.38157141418444396));
}

TEST_CASE("bleu clips against the best count over multiple references") {
    auto score = metrics::bleu(toks({"a", "a", "b"}),
                               {toks({"a"}), toks({"a", "a"})}, {.max_order = 1});
    CHECK(score.per_order_precision[0] == doctest::Approx(2.0 / 3.0));
    CHECK(score.brevity_penalty == doctest::Approx(1.0));
    CHECK(score.value == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("bleu argument validation and degenerate inputs") {
    auto ss = toks({"a"});
    CHECK_THROWS_AS(metrics::bleu(ss, {}), std::invalid_argument);
    CHECK_THROWS_AS(metrics::bleu(ss, {ss}, {.max_order = 0}), std::invalid_argument);

    auto empty = metrics::bleu({}, {toks({"a", "b"})});
    CHECK(empty.value == 0.0);
}

// ---------------------------------------------------------------------------
// METEOR
// ---------------------------------------------------------------------------

TEST_CASE("meteor single-token identity scores one half") {
    auto s = metrics::meteor(toks({"ciao"}), toks({"ciao"}));
    CHECK(s.matched_unigrams == 1);
    CHECK(s.chunk_count == 1);
    CHECK(s.f_mean == doctest::Approx(1.0));
    CHECK(s.fragmentation_penalty == doctest::Approx(0.5));
    CHECK(s.value == doctest::Approx(0.5));
}

TEST_CASE("meteor four-token identity scores 0.875") {
    auto seq = toks({"il", "gatto", "sul", "tappeto"});
    auto s = metrics::meteor(seq, seq);
    CHECK(s.matched_unigrams == 4);
    CHECK(s.chunk_count == 1);
    CHECK(s.value == doctest::Approx(0.875));
}

TEST_CASE("meteor stem stage matches inflected forms") {
    auto with = metrics::meteor(toks({"vaccini"}), toks({"vaccino"}));
    CHECK(with.matched_unigrams == 1);
    CHECK(with.value == doctest::Approx(0.5));

    auto without = metrics::meteor(toks({"vaccini"}), toks({"vaccino"}),
                                   {.stem_matching = false});
    CHECK(without.matched_unigrams == 0);
    CHECK(without.value == 0.0);
}

TEST_CASE("meteor picks the chunk-minimal alignment where greedy would not") {
    // Matching position 0 splits the pair into two chunks; matching the later
    // "a" keeps one contiguous chunk.
    auto ss = toks({"a", "c", "a", "b"});
    auto rs = toks({"a", "b"});

    auto exact = metrics::meteor(ss, rs);
    CHECK(exact.matched_unigrams == 2);
    CHECK(exact.chunk_count == 1);

    auto greedy = metrics::meteor(ss, rs, {.exact_alignment_limit = 0});
    CHECK(greedy.matched_unigrams == 2);
    CHECK(greedy.chunk_count == 2);
}

TEST_CASE("meteor zero overlap and empty inputs") {
    auto s = metrics::meteor(toks({"x"}), toks({"y"}));
    CHECK(s.matched_unigrams == 0);
    CHECK(s.value == 0.0);
    CHECK(metrics::meteor({}, toks({"a"})).value == 0.0);
    CHECK(metrics::meteor(toks({"a"}), {}).value == 0.0);
}

namespace {

// Brute-force chunk minimum: try every candidate-position subset of the
// alignment's size, keep the feasible ones, count runs of chosen positions.
// Feasibility mirrors the two-stage quota arithmetic but nothing else.
std::size_t brute_min_chunks(const text::TokenSequence& ss, const text::TokenSequence& rs,
                             std::size_t* matched_out) {
    auto stem_str = [](const std::string& s) { return text::stem(text::Token{s}).surface; };
    std::unordered_map<std::string, std::size_t> cs, cr;
    for (const auto& t : ss) ++cs[t.surface];
    for (const auto& t : rs) ++cr[t.surface];
    std::unordered_map<std::string, std::size_t> exact;
    for (const auto& [v, c] : cs) {
        if (auto it = cr.find(v); it != cr.end() && std::min(c, it->second) > 0) {
            exact[v] = std::min(c, it->second);
        }
    }
    std::unordered_map<std::string, std::size_t> gsys, gref, stems;
    for (const auto& [v, c] : cs) {
        std::size_t e = exact.count(v) ? exact[v] : 0;
        if (c > e) gsys[stem_str(v)] += c - e;
    }
    for (const auto& [v, c] : cr) {
        std::size_t e = exact.count(v) ? exact[v] : 0;
        if (c > e) gref[stem_str(v)] += c - e;
    }
    for (const auto& [g, n] : gsys) {
        if (auto it = gref.find(g); it != gref.end() && std::min(n, it->second) > 0) {
            stems[g] = std::min(n, it->second);
        }
    }
    std::size_t m = 0;
    for (const auto& [v, q] : exact) m += q;
    for (const auto& [g, q] : stems) m += q;
    *matched_out = m;
    if (m == 0) return 0;

    std::size_t best = m + 1;
    const std::size_t masks = std::size_t{1} << ss.size();
    for (std::size_t mask = 0; mask < masks; ++mask) {
        std::unordered_map<std::string, std::size_t> nv;
        std::size_t chosen = 0;
        for (std::size_t i = 0; i < ss.size(); ++i) {
            if (mask & (std::size_t{1} << i)) {
                ++nv[ss[i].surface];
                ++chosen;
            }
        }
        if (chosen != m) continue;
        bool ok = true;
        std::unordered_map<std::string, std::size_t> grp_used;
        for (const auto& [v, n] : nv) {
            const std::size_t e = exact.count(v) ? exact[v] : 0;
            if (n < e) { ok = false; break; }
            if (n > e) grp_used[stem_str(v)] += n - e;
        }
        if (!ok) continue;
        // Every surface with an exact quota must hit it exactly unless its
        // surplus can ride a stem slot; surplus beyond stem quotas is invalid.
        for (const auto& [v, e] : exact) {
            if (!nv.count(v) && e > 0) { ok = false; break; }
        }
        if (!ok) continue;
        for (const auto& [g, used] : grp_used) {
            const std::size_t q = stems.count(g) ? stems[g] : 0;
            if (used > q) { ok = false; break; }
        }
        if (!ok) continue;
        std::size_t total_stem = 0;
        for (const auto& [g, q] : stems) total_stem += q;
        std::size_t used_stem = 0;
        for (const auto& [g, u] : grp_used) used_stem += u;
        if (used_stem != total_stem) continue;

        std::size_t chunks = 0;
        bool prev = false;
        for (std::size_t i = 0; i < ss.size(); ++i) {
            const bool cur = mask & (std::size_t{1} << i);
            if (cur && !prev) ++chunks;
            prev = cur;
        }
        best = std::min(best, chunks);
    }
    return best;
}

}  // namespace

TEST_CASE("meteor chunk count matches brute-force search on random cases") {
    std::mt19937 rng(2024);
    const std::vector<std::string> vocab{"vaccino", "vaccini", "malattia", "malattie",
                                         "ospedale", "ospedali", "q", "r"};
    int exercised = 0;
    for (int it = 0; it < 120; ++it) {
        auto ss = random_seq(rng, 9, vocab);
        auto rs = random_seq(rng, 9, vocab);
        std::size_t m_brute = 0;
        const std::size_t brute = brute_min_chunks(ss, rs, &m_brute);
        auto s = metrics::meteor(ss, rs);
        CHECK(s.matched_unigrams == m_brute);
        if (m_brute > 0) {
            CHECK(s.chunk_count == brute);
            ++exercised;
        }
    }
    CHECK(exercised > 40);
}

TEST_CASE("meteor chunk and penalty bounds hold on random pairs") {
    std::mt19937 rng(31337);
    const std::vector<std::string> vocab{"uno", "due", "tre", "quattro", "cinque"};
    for (int it = 0; it < 200; ++it) {
        auto ss = random_seq(rng, 12, vocab);
        auto rs = random_seq(rng, 12, vocab);
        auto s = metrics::meteor(ss, rs);
        if (s.matched_unigrams == 0) {
            CHECK(s.value == 0.0);
            continue;
        }
        CHECK(s.chunk_count >= 1);
        CHECK(s.chunk_count <= s.matched_unigrams);
        CHECK(s.fragmentation_penalty >= 0.0);
        CHECK(s.fragmentation_penalty <= 0.5);
        CHECK(s.value >= 0.0);
        CHECK(s.value <= s.f_mean + 1e-12);
        CHECK(s.value <= 1.0);
    }
}

TEST_CASE("meteor multi-reference takes the best reference") {
    auto ss = toks({"il", "gatto"});
    auto best = metrics::meteor_multi(ss, {toks({"il", "gatto"}), toks({"il", "cane"})});
    CHECK(best.value == doctest::Approx(0.75));
    auto worst_only = metrics::meteor_multi(ss, {toks({"il", "cane"})});
    CHECK(worst_only.value == doctest::Approx(0.25));
}

// ---------------------------------------------------------------------------
// Exact match
// ---------------------------------------------------------------------------

TEST_CASE("exact match compares element-wise") {
    CHECK(metrics::exact_match(toks({"a", "b"}), toks({"a", "b"})) == 1);
    CHECK(metrics::exact_match(toks({"a", "b"}), toks({"a", "c"})) == 0);
    CHECK(metrics::exact_match(toks({"a"}), toks({"a", "b"})) == 0);
    CHECK(metrics::exact_match({}, {}) == 1);
    CHECK(metrics::exact_match_raw("ciao mondo", "ciao mondo") == 1);
    CHECK(metrics::exact_match_raw("ciao mondo", "ciao  mondo") == 0);
}

// ---------------------------------------------------------------------------
// BERTScore
// ---------------------------------------------------------------------------

namespace {

embedding::FixedVectorProvider toy_provider() {
    const double h = std::sqrt(0.5);
    std::unordered_map<std::string, embedding::EmbeddingVector> table;
    table["a"] = embedding::EmbeddingVector{{1.0, 0.0}};
    table["b"] = embedding::EmbeddingVector{{0.0, 1.0}};
    table["c"] = embedding::EmbeddingVector{{h, h}};
    table["d"] = embedding::EmbeddingVector{{-1.0, 0.0}};
    return embedding::FixedVectorProvider(2, table);
}

}  // namespace

TEST_CASE("bertscore on a hand-checked two-dimensional example") {
    auto prov = toy_provider();
    auto s = metrics::bertscore(toks({"a", "b", "c"}), toks({"a", "c"}), prov);
    CHECK(s.recall == doctest::Approx(1.0));
    CHECK(s.precision == doctest::Approx(0.90236892706218252));
    CHECK(s.f1 == doctest::Approx(0.94867921171915448));
}

TEST_CASE("bertscore clamps negative similarity to keep scores in range") {
    auto prov = toy_provider();
    auto s = metrics::bertscore(toks({"d"}), toks({"a"}), prov);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
}

TEST_CASE("bertscore self-identity and swap-symmetry with hashed vectors") {
    embedding::HashedTfProvider prov(256);
    auto x = toks({"roma", "milano", "napoli"});
    auto y = toks({"roma", "torino"});

    auto self = metrics::bertscore(x, x, prov);
    CHECK(self.precision == doctest::Approx(1.0));
    CHECK(self.recall == doctest::Approx(1.0));
    CHECK(self.f1 == doctest::Approx(1.0));

    auto xy = metrics::bertscore(x, y, prov);
    auto yx = metrics::bertscore(y, x, prov);
    CHECK(xy.precision == doctest::Approx(yx.recall));
    CHECK(xy.recall == doctest::Approx(yx.precision));
}

TEST_CASE("bertscore matches a naive all-pairs reference computation") {
    std::mt19937 rng(555);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t dim = 5;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, embedding::EmbeddingVector> table;
    for (int i = 0; i < 8; ++i) {
        std::string w = "w" + std::to_string(i);
        embedding::EmbeddingVector v;
        for (std::size_t d = 0; d < dim; ++d) v.values.push_back(gauss(rng));
        table[w] = v;
        vocab.push_back(w);
    }
    embedding::FixedVectorProvider prov(dim, table);

    auto cos_naive = [&](const std::string& x, const std::string& y) {
        const auto& vx = table[x].values;
        const auto& vy = table[y].values;
        double d = 0, nx = 0, ny = 0;
        for (std::size_t i = 0; i < dim; ++i) {
            d += vx[i] * vy[i];
            nx += vx[i] * vx[i];
            ny += vy[i] * vy[i];
        }
        return d / (std::sqrt(nx) * std::sqrt(ny));
    };

    for (int it = 0; it < 100; ++it) {
        auto ss = random_seq(rng, 6, vocab);
        auto rs = random_seq(rng, 6, vocab);
        if (ss.empty() || rs.empty()) continue;
        double rsum = 0;
        for (const auto& rt : rs) {
            double best = -2;
            for (const auto& st : ss) best = std::max(best, cos_naive(rt.surface, st.surface));
            rsum += best;
        }
        double psum = 0;
        for (const auto& st : ss) {
            double best = -2;
            for (const auto& rt : rs) best = std::max(best, cos_naive(st.surface, rt.surface));
            psum += best;
        }
        const double er = std::clamp(rsum / rs.size(), 0.0, 1.0);
        const double ep = std::clamp(psum / ss.size(), 0.0, 1.0);
        auto s = metrics::bertscore(ss, rs, prov);
        CHECK(s.recall == doctest::Approx(er));
        CHECK(s.precision == doctest::Approx(ep));
    }
}

TEST_CASE("bertscore rejects empty sequences") {
    embedding::HashedTfProvider prov(16);
    CHECK_THROWS_AS(metrics::bertscore({}, toks({"a"}), prov), std::invalid_argument);
    CHECK_THROWS_AS(metrics::bertscore(toks({"a"}), {}, prov), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

TEST_CASE("metric names round-trip through the parser") {
    using metrics::MetricId;
    for (MetricId id : {MetricId::kRouge1, MetricId::kRouge2, MetricId::kRougeL,
                        MetricId::kBleu, MetricId::kMeteor, MetricId::kExactMatch,
                        MetricId::kBertScore}) {
        CHECK(metrics::metric_from_string(metrics::to_string(id)) == id);
    }
    CHECK(metrics::metric_from_string("ROUGE-1") == MetricId::kRouge1);
    CHECK(metrics::metric_from_string("em") == MetricId::kExactMatch);
    CHECK_THROWS_AS(metrics::metric_from_string("nope"), std::invalid_argument);
    CHECK(metrics::is_triple_metric(MetricId::kRouge1));
    CHECK(!metrics::is_triple_metric(MetricId::kBleu));
}
