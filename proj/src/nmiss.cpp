#include "halleval/nmiss.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace halleval::nmiss {

TokenPartition partition_tokens(const text::TokenSequence& system,
                                const text::TokenSequence& reference) {
    std::unordered_map<std::string, std::size_t> budget;
    for (const auto& t : reference) ++budget[t.surface];

    TokenPartition out;
    for (const auto& t : system) {
        auto it = budget.find(t.surface);
        if (it != budget.end() && it->second > 0) {
            --it->second;
            out.matched.push_back(t);
        } else {
            out.residual.push_back(t);
        }
    }
    return out;
}

text::TokenSequence residual_sequence(const text::TokenSequence& system,
                                      const text::TokenSequence& reference) {
    return partition_tokens(system, reference).residual;
}

double nmiss_combine(double f_ref, double f_cxt, double lambda1, double lambda2) {
    const double total = lambda1 + lambda2;
    if (total <= 0.0) return f_ref;
    const double weighted = (lambda1 * f_ref + lambda2 * f_cxt) / total;
    return std::max(f_ref, weighted);
}

namespace {

/// Weighting granularity: bigram metrics weigh by bigrams unless overridden;
/// everything else weighs by unigrams.
std::size_t lambda_arity(metrics::MetricId metric, const NmissOptions& opts) {
    if (!opts.unigram_lambdas && metric == metrics::MetricId::kRouge2) return 2;
    return 1;
}

std::size_t shared_count(const text::TokenSequence& a, const text::TokenSequence& b,
                         std::size_t n, bool clip) {
    const text::NGramMultiset ga = text::ngrams(a, n);
    const text::NGramMultiset gb = text::ngrams(b, n);
    if (clip) return ga.clipped_intersection(gb).total();
    std::size_t total = 0;
    for (const auto& [gram, count] : ga.entries()) {
        if (gb.count(gram) > 0) total += count;
    }
    return total;
}

metrics::ScoreTriple triple_for(metrics::MetricId metric, const text::TokenSequence& a,
                                const text::TokenSequence& b) {
    switch (metric) {
        case metrics::MetricId::kRouge1: return metrics::rouge_n(a, b, 1);
        case metrics::MetricId::kRouge2: return metrics::rouge_n(a, b, 2);
        case metrics::MetricId::kRougeL: return metrics::rouge_l(a, b);
        default: throw std::logic_error("triple_for: not a triple metric");
    }
}

double scalar_for(metrics::MetricId metric, const text::TokenSequence& a,
                  const text::TokenSequence& b, const NmissOptions& opts) {
    switch (metric) {
        case metrics::MetricId::kBleu: return metrics::bleu(a, {b}, opts.bleu).value;
        case metrics::MetricId::kMeteor: return metrics::meteor(a, b, opts.meteor).value;
        default: throw std::logic_error("scalar_for: not a scalar metric");
    }
}

}  // namespace

std::vector<NmissBreakdown> evaluate_nmiss(const text::TokenSequence& system,
                                           const text::TokenSequence& reference,
                                           const text::TokenSequence& context,
                                           metrics::MetricId metric,
                                           const NmissOptions& opts) {
    using metrics::Component;
    using metrics::MetricId;
    if (metric == MetricId::kExactMatch || metric == MetricId::kBertScore) {
        throw std::invalid_argument(
            "evaluate_nmiss: unsupported metric " + metrics::to_string(metric));
    }

    const std::size_t n = lambda_arity(metric, opts);
    const text::TokenSequence residual = residual_sequence(system, reference);
    const double lambda1 = static_cast<double>(shared_count(system, reference, n, true));
    const double lambda2 = static_cast<double>(
        shared_count(residual, context, n, opts.clip_context));

    auto make = [&](Component comp, double f_ref, double f_cxt) {
        NmissBreakdown b;
        b.metric = metric;
        b.component = comp;
        b.f_ref = f_ref;
        b.f_cxt = f_cxt;
        b.lambda1 = lambda1;
        b.lambda2 = lambda2;
        const double total = lambda1 + lambda2;
        b.weighted = total > 0.0 ? (lambda1 * f_ref + lambda2 * f_cxt) / total : f_ref;
        b.final_score = nmiss_combine(f_ref, f_cxt, lambda1, lambda2);
        return b;
    };

    std::vector<NmissBreakdown> out;
    if (metrics::is_triple_metric(metric)) {
        const metrics::ScoreTriple ref_t = triple_for(metric, system, reference);
        const metrics::ScoreTriple cxt_t = triple_for(metric, residual, context);
        out.push_back(make(Component::kPrecision, ref_t.precision, cxt_t.precision));
        out.push_back(make(Component::kRecall, ref_t.recall, cxt_t.recall));
        out.push_back(make(Component::kF1, ref_t.f1, cxt_t.f1));
    } else {
        const double f_ref = scalar_for(metric, system, reference, opts);
        const double f_cxt = scalar_for(metric, residual, context, opts);
        out.push_back(make(Component::kScalar, f_ref, f_cxt));
    }
    return out;
}

}  // namespace halleval::nmiss
