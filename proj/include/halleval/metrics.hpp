#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "halleval/embedding.hpp"
#include "halleval/text.hpp"

namespace halleval::metrics {

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

enum class MetricId {
    kRouge1,
    kRouge2,
    kRougeL,
    kBleu,
    kMeteor,
    kExactMatch,
    kBertScore,
};

enum class Component {
    kPrecision,
    kRecall,
    kF1,
    kScalar,
};

std::string to_string(MetricId id);
std::string to_string(Component c);
/// Parses names like "rouge1", "rougeL", "bleu", "em", "bertscore".
/// Throws std::invalid_argument on unknown names.
MetricId metric_from_string(const std::string& name);
/// Parses "precision"/"recall"/"f1"/"scalar" in any case; throws
/// std::invalid_argument otherwise.
Component component_from_string(const std::string& name);

/// True for the metrics whose result is a precision/recall/F1 triple.
bool is_triple_metric(MetricId id);

// ---------------------------------------------------------------------------
// Score shapes
// ---------------------------------------------------------------------------

struct ScoreTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const ScoreTriple&) const = default;
};

/// 2PR/(P+R), defined as 0 when P + R = 0.
double f1_of(double precision, double recall);

struct BleuOptions {
    std::size_t max_order = 4;
    /// Opt-in add-one smoothing of orders >= 2. Off by default: any zero
    /// n-gram precision makes the whole score zero.
    bool smoothing = false;
};

struct BleuScore {
    double value = 0.0;
    std::vector<double> per_order_precision;  // p_1 .. p_N
    double brevity_penalty = 1.0;
};

struct MeteorOptions {
    /// Weight of precision in the harmonic mean denominator; 0.9 gives the
    /// classic recall-heavy 10PR/(R+9P).
    double recall_weight = 0.9;
    /// Enable the second (stem-equality) matching stage.
    bool stem_matching = true;
    /// Up to this many matched unigrams the chunk-minimal alignment is found
    /// exactly; larger alignments fall back to greedy left-to-right matching.
    std::size_t exact_alignment_limit = 16;
};

struct MeteorScore {
    double value = 0.0;
    std::size_t matched_unigrams = 0;   // |V|
    std::size_t chunk_count = 0;        // T
    double fragmentation_penalty = 0.0; // DP = 0.5 * T / |V|
    double f_mean = 0.0;
};

// ---------------------------------------------------------------------------
// Metric operations
// ---------------------------------------------------------------------------

/// N-gram overlap with clipped multiset intersection. Precision divides by
/// the candidate's n-gram count, recall by the reference's; either is 0 when
/// its denominator is 0. Throws std::invalid_argument for n = 0.
ScoreTriple rouge_n(const text::TokenSequence& ss, const text::TokenSequence& rs,
                    std::size_t n);

/// Longest common subsequence length (order-preserving, gaps allowed).
std::size_t lcs_length(const text::TokenSequence& a, const text::TokenSequence& b);

/// LCS-based variant: P = LCS/|ss|, R = LCS/|rs|.
ScoreTriple rouge_l(const text::TokenSequence& ss, const text::TokenSequence& rs);

/// Geometric mean of clipped n-gram precisions times the brevity penalty.
/// The effective reference length is the closest reference length to the
/// candidate's, ties resolved toward the shorter one.
/// Throws std::invalid_argument when rs_list is empty or max_order = 0.
BleuScore bleu(const text::TokenSequence& ss,
               const std::vector<text::TokenSequence>& rs_list,
               const BleuOptions& opts = {});

/// Unigram alignment in two stages (surface equality, then stem equality),
/// each reference token consumable once. Among maximum-cardinality
/// alignments one with the fewest contiguous chunks of matched candidate
/// positions is selected. Score = F_mean * (1 - 0.5 * T/|V|).
MeteorScore meteor(const text::TokenSequence& ss, const text::TokenSequence& rs,
                   const MeteorOptions& opts = {});

/// Highest per-reference score.
MeteorScore meteor_multi(const text::TokenSequence& ss,
                         const std::vector<text::TokenSequence>& rs_list,
                         const MeteorOptions& opts = {});

/// 1 iff the token sequences are identical element-wise.
int exact_match(const text::TokenSequence& ss, const text::TokenSequence& rs);

/// Raw-string comparison mode for callers that bypass normalization.
int exact_match_raw(const std::string& ss, const std::string& rs);

/// Greedy max-cosine token matching in both directions; recall averages over
/// reference tokens, precision over candidate tokens. Negative similarity is
/// clamped to zero so components stay in [0,1].
/// Throws std::invalid_argument when either sequence is empty.
ScoreTriple bertscore(const text::TokenSequence& ss, const text::TokenSequence& rs,
                      embedding::EmbeddingProvider& provider);

}  // namespace halleval::metrics
