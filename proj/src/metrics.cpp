#include "halleval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace halleval::metrics {

std::string to_string(MetricId id) {
    switch (id) {
        case MetricId::kRouge1: return "rouge1";
        case MetricId::kRouge2: return "rouge2";
        case MetricId::kRougeL: return "rougeL";
        case MetricId::kBleu: return "bleu";
        case MetricId::kMeteor: return "meteor";
        case MetricId::kExactMatch: return "exact_match";
        case MetricId::kBertScore: return "bertscore";
    }
    return "unknown";
}

std::string to_string(Component c) {
    switch (c) {
        case Component::kPrecision: return "precision";
        case Component::kRecall: return "recall";
        case Component::kF1: return "f1";
        case Component::kScalar: return "scalar";
    }
    return "unknown";
}

MetricId metric_from_string(const std::string& name) {
    std::string low;
    low.reserve(name.size());
    for (char c : name) {
        if (c == '-' || c == '_' || c == ' ') continue;
        low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (low == "rouge1") return MetricId::kRouge1;
    if (low == "rouge2") return MetricId::kRouge2;
    if (low == "rougel") return MetricId::kRougeL;
    if (low == "bleu") return MetricId::kBleu;
    if (low == "meteor") return MetricId::kMeteor;
    if (low == "exactmatch" || low == "em") return MetricId::kExactMatch;
    if (low == "bertscore") return MetricId::kBertScore;
    throw std::invalid_argument("unknown metric name: " + name);
}

Component component_from_string(const std::string& name) {
    std::string low;
    low.reserve(name.size());
    for (char c : name) {
        low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (low == "precision") return Component::kPrecision;
    if (low == "recall") return Component::kRecall;
    if (low == "f1") return Component::kF1;
    if (low == "scalar") return Component::kScalar;
    throw std::invalid_argument("unknown component name: " + name);
}

bool is_triple_metric(MetricId id) {
    switch (id) {
        case MetricId::kRouge1:
        case MetricId::kRouge2:
        case MetricId::kRougeL:
        case MetricId::kBertScore:
            return true;
        default:
            return false;
    }
}

double f1_of(double precision, double recall) {
    const double denom = precision + recall;
    if (denom <= 0.0) return 0.0;
    return 2.0 * precision * recall / denom;
}

// ---------------------------------------------------------------------------
// ROUGE
// ---------------------------------------------------------------------------

ScoreTriple rouge_n(const text::TokenSequence& ss, const text::TokenSequence& rs,
                    std::size_t n) {
    if (n == 0) throw std::invalid_argument("rouge_n: n must be positive");
    const text::NGramMultiset sg = text::ngrams(ss, n);
    const text::NGramMultiset rg = text::ngrams(rs, n);
    const std::size_t overlap = sg.clipped_intersection(rg).total();
    ScoreTriple t;
    t.precision = sg.total() ? static_cast<double>(overlap) / static_cast<double>(sg.total()) : 0.0;
    t.recall = rg.total() ? static_cast<double>(overlap) / static_cast<double>(rg.total()) : 0.0;
    t.f1 = f1_of(t.precision, t.recall);
    return t;
}

std::size_t lcs_length(const text::TokenSequence& a, const text::TokenSequence& b) {
    if (a.empty() || b.empty()) return 0;
    // Rolling single-row DP over the shorter sequence.
    const text::TokenSequence& rows = a.size() >= b.size() ? a : b;
    const text::TokenSequence& cols = a.size() >= b.size() ? b : a;
    std::vector<std::size_t> dp(cols.size() + 1, 0);
    for (const text::Token& tr : rows) {
        std::size_t diag = 0;  // dp[i-1][j-1]
        for (std::size_t j = 1; j <= cols.size(); ++j) {
            const std::size_t up = dp[j];
            if (tr.surface == cols[j - 1].surface) {
                dp[j] = diag + 1;
            } else {
                dp[j] = std::max(dp[j], dp[j - 1]);
            }
            diag = up;
        }
    }
    return dp[cols.size()];
}

ScoreTriple rouge_l(const text::TokenSequence& ss, const text::TokenSequence& rs) {
    const std::size_t lcs = lcs_length(ss, rs);
    ScoreTriple t;
    t.precision = ss.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(ss.size());
    t.recall = rs.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(rs.size());
    t.f1 = f1_of(t.precision, t.recall);
    return t;
}

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

BleuScore bleu(const text::TokenSequence& ss,
               const std::vector<text::TokenSequence>& rs_list,
               const BleuOptions& opts) {
    if (rs_list.empty()) throw std::invalid_argument("bleu: at least one reference required");
    if (opts.max_order == 0) throw std::invalid_argument("bleu: max_order must be positive");

    const std::size_t b = ss.size();
    // Effective reference length: closest to the candidate, ties go short.
    std::size_t r = rs_list.front().size();
    for (const auto& ref : rs_list) {
        const std::size_t len = ref.size();
        const auto dist = [&](std::size_t l) {
            return l > b ? l - b : b - l;
        };
        if (dist(len) < dist(r) || (dist(len) == dist(r) && len < r)) r = len;
    }

    BleuScore out;
    if (b > r) {
        out.brevity_penalty = 1.0;
    } else if (b == 0) {
        // Degenerate empty candidate; the score below is 0 regardless.
        out.brevity_penalty = r == 0 ? 1.0 : std::exp(1.0 - static_cast<double>(r));
    } else {
        out.brevity_penalty = std::exp(1.0 - static_cast<double>(r) / static_cast<double>(b));
    }

    out.per_order_precision.resize(opts.max_order, 0.0);
    double log_sum = 0.0;
    bool any_zero = false;
    for (std::size_t n = 1; n <= opts.max_order; ++n) {
        const std::size_t total = b >= n ? b - n + 1 : 0;
        std::size_t clipped = 0;
        if (total > 0) {
            const text::NGramMultiset sg = text::ngrams(ss, n);
            std::vector<text::NGramMultiset> refs;
            refs.reserve(rs_list.size());
            for (const auto& ref : rs_list) refs.push_back(text::ngrams(ref, n));
            // Clip each candidate n-gram count by its maximum count across
            // references.
            for (const auto& [gram, count] : sg.entries()) {
                std::size_t cap = 0;
                for (const auto& ref : refs) cap = std::max(cap, ref.count(gram));
                clipped += std::min(count, cap);
            }
        }
        double p = 0.0;
        if (opts.smoothing && n >= 2) {
            if (total > 0) {
                p = static_cast<double>(clipped + 1) / static_cast<double>(total + 1);
            }
        } else if (total > 0) {
            p = static_cast<double>(clipped) / static_cast<double>(total);
        }
        out.per_order_precision[n - 1] = p;
        if (p > 0.0) {
            log_sum += std::log(p);
        } else {
            any_zero = true;
        }
    }
    if (any_zero) {
        out.value = 0.0;
    } else {
        out.value = out.brevity_penalty *
                    std::exp(log_sum / static_cast<double>(opts.max_order));
    }
    return out;
}

// ---------------------------------------------------------------------------
// METEOR
// ---------------------------------------------------------------------------

namespace {

std::string stem_of(const std::string& surface) {
    return text::stem(text::Token{surface}).surface;
}

struct AlignmentPlan {
    // Per candidate position: 0 = unmatched, 1 = exact-stage slot available,
    // 2 = stem-stage slot available, 3 = both.
    std::vector<std::uint8_t> roles;
    // Quota index per position for each role (into the quota vectors).
    std::vector<int> exact_slot;
    std::vector<int> stem_slot;
    std::vector<std::size_t> quotas;  // exact-value quotas then stem-group quotas
    std::size_t matched = 0;
};

/// Works out how many alignment pairs each surface (stage 1) and each stem
/// group (stage 2) must contribute. Stage 1 consumes min counts per surface;
/// stage 2 pairs the per-group leftovers.
AlignmentPlan plan_alignment(const text::TokenSequence& ss,
                             const text::TokenSequence& rs,
                             bool stem_matching) {
    std::unordered_map<std::string, std::size_t> cs, cr;
    for (const auto& t : ss) ++cs[t.surface];
    for (const auto& t : rs) ++cr[t.surface];

    std::unordered_map<std::string, std::size_t> exact_quota;
    for (const auto& [surface, count] : cs) {
        auto it = cr.find(surface);
        if (it == cr.end()) continue;
        const std::size_t q = std::min(count, it->second);
        if (q > 0) exact_quota[surface] = q;
    }

    std::unordered_map<std::string, std::size_t> stem_quota;
    if (stem_matching) {
        std::unordered_map<std::string, std::size_t> group_sys, group_ref;
        for (const auto& [surface, count] : cs) {
            std::size_t used = 0;
            if (auto it = exact_quota.find(surface); it != exact_quota.end()) used = it->second;
            if (count > used) group_sys[stem_of(surface)] += count - used;
        }
        for (const auto& [surface, count] : cr) {
            std::size_t used = 0;
            if (auto it = exact_quota.find(surface); it != exact_quota.end()) used = it->second;
            if (count > used) group_ref[stem_of(surface)] += count - used;
        }
        for (const auto& [group, nsys] : group_sys) {
            auto it = group_ref.find(group);
            if (it == group_ref.end()) continue;
            const std::size_t q = std::min(nsys, it->second);
            if (q > 0) stem_quota[group] = q;
        }
    }

    AlignmentPlan plan;
    plan.roles.assign(ss.size(), 0);
    plan.exact_slot.assign(ss.size(), -1);
    plan.stem_slot.assign(ss.size(), -1);

    std::unordered_map<std::string, int> exact_index, stem_index;
    for (const auto& [surface, q] : exact_quota) {
        exact_index[surface] = static_cast<int>(plan.quotas.size());
        plan.quotas.push_back(q);
        plan.matched += q;
    }
    for (const auto& [group, q] : stem_quota) {
        stem_index[group] = static_cast<int>(plan.quotas.size());
        plan.quotas.push_back(q);
        plan.matched += q;
    }

    for (std::size_t i = 0; i < ss.size(); ++i) {
        if (auto it = exact_index.find(ss[i].surface); it != exact_index.end()) {
            plan.roles[i] |= 1;
            plan.exact_slot[i] = it->second;
        }
        if (stem_matching) {
            if (auto it = stem_index.find(stem_of(ss[i].surface)); it != stem_index.end()) {
                plan.roles[i] |= 2;
                plan.stem_slot[i] = it->second;
            }
        }
    }
    return plan;
}

/// Exact chunk minimization: dense DP over the residual quota vector (mixed
/// radix state), tracking the best count of adjacent chosen position pairs.
/// The state space is at most prod(quota+1) <= 2^matched.
std::size_t min_chunks_exact(const AlignmentPlan& plan) {
    const std::size_t k = plan.quotas.size();
    std::vector<std::size_t> radix(k), stride(k);
    std::size_t states = 1;
    for (std::size_t i = 0; i < k; ++i) {
        radix[i] = plan.quotas[i] + 1;
        stride[i] = states;
        states *= radix[i];
    }
    std::size_t full = 0;  // state with every quota still owed
    for (std::size_t i = 0; i < k; ++i) full += plan.quotas[i] * stride[i];

    constexpr std::int16_t kUnreachable = -1;
    // best[state * 2 + last_chosen] = max adjacent pairs so far.
    std::vector<std::int16_t> best(states * 2, kUnreachable);
    std::vector<std::int16_t> next(states * 2, kUnreachable);
    best[full * 2 + 0] = 0;

    auto relax = [](std::int16_t& cell, std::int16_t cand) {
        if (cand > cell) cell = cand;
    };

    for (std::size_t pos = 0; pos < plan.roles.size(); ++pos) {
        std::fill(next.begin(), next.end(), kUnreachable);
        const std::uint8_t role = plan.roles[pos];
        for (std::size_t s = 0; s < states; ++s) {
            for (int flag = 0; flag < 2; ++flag) {
                const std::int16_t cur = best[s * 2 + flag];
                if (cur == kUnreachable) continue;
                // Skip this position.
                relax(next[s * 2 + 0], cur);
                // Choose it in an available role with quota left.
                for (int which = 0; which < 2; ++which) {
                    if (!(role & (1u << which))) continue;
                    const int slot = which == 0 ? plan.exact_slot[pos] : plan.stem_slot[pos];
                    const std::size_t digit = (s / stride[slot]) % radix[slot];
                    if (digit == 0) continue;
                    const std::size_t ns = s - stride[slot];
                    relax(next[ns * 2 + 1], static_cast<std::int16_t>(cur + flag));
                }
            }
        }
        best.swap(next);
    }
    const std::int16_t adj = std::max(best[0], best[1]);
    // All quotas are satisfiable by construction, so state 0 is reachable.
    return plan.matched - static_cast<std::size_t>(adj);
}

/// Left-to-right fallback: each position takes an exact slot if one is open,
/// else a stem slot. Chunks are counted directly as runs of chosen positions.
std::size_t chunks_greedy(const AlignmentPlan& plan) {
    std::vector<std::size_t> left = plan.quotas;
    std::size_t chunks = 0;
    bool prev = false;
    for (std::size_t i = 0; i < plan.roles.size(); ++i) {
        bool take = false;
        if ((plan.roles[i] & 1) && left[plan.exact_slot[i]] > 0) {
            --left[plan.exact_slot[i]];
            take = true;
        } else if ((plan.roles[i] & 2) && left[plan.stem_slot[i]] > 0) {
            --left[plan.stem_slot[i]];
            take = true;
        }
        if (take && !prev) ++chunks;
        prev = take;
    }
    return chunks;
}

}  // namespace

MeteorScore meteor(const text::TokenSequence& ss, const text::TokenSequence& rs,
                   const MeteorOptions& opts) {
    MeteorScore out;
    const AlignmentPlan plan = plan_alignment(ss, rs, opts.stem_matching);
    out.matched_unigrams = plan.matched;
    if (plan.matched == 0 || ss.empty() || rs.empty()) return out;

    out.chunk_count = plan.matched <= opts.exact_alignment_limit
                          ? min_chunks_exact(plan)
                          : chunks_greedy(plan);

    const double m = static_cast<double>(plan.matched);
    const double p = m / static_cast<double>(ss.size());
    const double r = m / static_cast<double>(rs.size());
    const double alpha = opts.recall_weight;
    const double denom = alpha * p + (1.0 - alpha) * r;
    out.f_mean = denom > 0.0 ? p * r / denom : 0.0;
    out.fragmentation_penalty = 0.5 * static_cast<double>(out.chunk_count) / m;
    out.value = out.f_mean * (1.0 - out.fragmentation_penalty);
    return out;
}

MeteorScore meteor_multi(const text::TokenSequence& ss,
                         const std::vector<text::TokenSequence>& rs_list,
                         const MeteorOptions& opts) {
    MeteorScore best;
    bool first = true;
    for (const auto& rs : rs_list) {
        MeteorScore cur = meteor(ss, rs, opts);
        if (first || cur.value > best.value) {
            best = cur;
            first = false;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Exact match
// ---------------------------------------------------------------------------

int exact_match(const text::TokenSequence& ss, const text::TokenSequence& rs) {
    if (ss.size() != rs.size()) return 0;
    for (std::size_t i = 0; i < ss.size(); ++i) {
        if (ss[i].surface != rs[i].surface) return 0;
    }
    return 1;
}

int exact_match_raw(const std::string& ss, const std::string& rs) {
    return ss == rs ? 1 : 0;
}

// ---------------------------------------------------------------------------
// BERTScore
// ---------------------------------------------------------------------------

ScoreTriple bertscore(const text::TokenSequence& ss, const text::TokenSequence& rs,
                      embedding::EmbeddingProvider& provider) {
    if (ss.empty() || rs.empty()) {
        throw std::invalid_argument("bertscore: sequences must be non-empty");
    }
    const std::vector<embedding::EmbeddingVector> es = provider.embed_tokens(ss);
    const std::vector<embedding::EmbeddingVector> er = provider.embed_tokens(rs);
    if (es.size() != ss.size() || er.size() != rs.size()) {
        throw std::runtime_error("bertscore: provider returned wrong vector count");
    }

    auto best_against = [](const embedding::EmbeddingVector& v,
                           const std::vector<embedding::EmbeddingVector>& others) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& o : others) m = std::max(m, embedding::cosine(v, o));
        return m;
    };

    double recall_sum = 0.0;
    for (const auto& v : er) recall_sum += best_against(v, es);
    double precision_sum = 0.0;
    for (const auto& v : es) precision_sum += best_against(v, er);

    ScoreTriple t;
    t.recall = std::clamp(recall_sum / static_cast<double>(er.size()), 0.0, 1.0);
    t.precision = std::clamp(precision_sum / static_cast<double>(es.size()), 0.0, 1.0);
    t.f1 = f1_of(t.precision, t.recall);
    return t;
}

}  // namespace halleval::metrics
