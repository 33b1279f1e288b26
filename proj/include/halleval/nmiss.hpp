#pragma once

#include <cstddef>
#include <vector>

#include "halleval/metrics.hpp"
#include "halleval/text.hpp"

namespace halleval::nmiss {

/// Split of a candidate sequence against a reference: for each surface the
/// first min(candidate count, reference count) occurrences are matched, the
/// rest are residual. Both halves keep source order.
struct TokenPartition {
    text::TokenSequence matched;
    text::TokenSequence residual;
};

TokenPartition partition_tokens(const text::TokenSequence& system,
                                const text::TokenSequence& reference);

/// Shorthand for partition_tokens(...).residual.
text::TokenSequence residual_sequence(const text::TokenSequence& system,
                                      const text::TokenSequence& reference);

/// Context-aware rescue rule: a weighted mean of the reference score and the
/// context score, floored at the reference score.
///   lambda1 + lambda2 > 0:  max(f_ref, (l1*f_ref + l2*f_cxt) / (l1 + l2))
///   otherwise:              f_ref
double nmiss_combine(double f_ref, double f_cxt, double lambda1, double lambda2);

struct NmissOptions {
    /// Count context hits with multiplicity clipped to the context's own
    /// counts (multiset semantics). When false a residual n-gram counts fully
    /// as soon as it appears in the context at all.
    bool clip_context = true;
    /// Weigh the combination by unigram counts even for bigram metrics.
    bool unigram_lambdas = false;
    metrics::BleuOptions bleu;
    metrics::MeteorOptions meteor;
};

/// One scored component of a context-aware evaluation.
struct NmissBreakdown {
    metrics::MetricId metric = metrics::MetricId::kRouge1;
    metrics::Component component = metrics::Component::kScalar;
    double f_ref = 0.0;        // metric(system, reference)
    double f_cxt = 0.0;        // metric(residual, context)
    double lambda1 = 0.0;      // n-grams shared with the reference
    double lambda2 = 0.0;      // residual n-grams found in the context
    double weighted = 0.0;     // lambda-weighted mean before the floor
    double final_score = 0.0;  // max(f_ref, weighted)
};

/// Scores system against reference, then rescues residual content through the
/// context. Triple metrics yield precision/recall/f1 breakdowns (combined
/// componentwise); BLEU and METEOR yield a single scalar breakdown.
/// Exact match and embedding-similarity metrics are not supported and throw
/// std::invalid_argument.
std::vector<NmissBreakdown> evaluate_nmiss(const text::TokenSequence& system,
                                           const text::TokenSequence& reference,
                                           const text::TokenSequence& context,
                                           metrics::MetricId metric,
                                           const NmissOptions& opts = {});

}  // namespace halleval::nmiss
