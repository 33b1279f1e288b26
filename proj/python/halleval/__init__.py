"""Context-aware hallucination scoring for retrieval-augmented QA.

Wraps the native core: tokenization, overlap metrics (ROUGE, BLEU, METEOR,
exact match, embedding similarity), the context-aware rescue scoring, and the
sliding-window chunker.
"""

try:
    from . import _core
except ImportError:  # running against an in-tree build dir on PYTHONPATH
    import _core

_EXPORTS = [
    "NormalizationConfig",
    "ScoreTriple",
    "BleuScore",
    "MeteorScore",
    "NmissBreakdown",
    "Chunk",
    "strip_html",
    "tokenize",
    "stem",
    "rouge_n",
    "rouge_l",
    "bleu",
    "meteor",
    "exact_match",
    "bertscore_hashed",
    "evaluate_nmiss",
    "partition_tokens",
    "chunk_document",
    "classify_level",
]

for _name in _EXPORTS:
    globals()[_name] = getattr(_core, _name)

__version__ = _core.__version__
__all__ = _EXPORTS + ["score_text", "__version__"]


def score_text(system, reference, context, metric="rouge1", config=None, **options):
    """Tokenize three raw strings and run the context-aware scorer.

    Returns a list of NmissBreakdown, one per metric component. Extra keyword
    options are forwarded to evaluate_nmiss (clip_context, unigram_lambdas).
    """
    cfg = config if config is not None else NormalizationConfig()
    return evaluate_nmiss(
        tokenize(system, cfg),
        tokenize(reference, cfg),
        tokenize(context, cfg),
        metric,
        **options,
    )
