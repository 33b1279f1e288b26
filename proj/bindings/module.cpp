// Python bindings for the scoring core. Token sequences cross the boundary
// as plain lists of strings; enums cross as their canonical names.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "halleval/embedding.hpp"
#include "halleval/ingest.hpp"
#include "halleval/metrics.hpp"
#include "halleval/nmiss.hpp"
#include "halleval/rag.hpp"
#include "halleval/text.hpp"

namespace py = pybind11;
using namespace halleval;

namespace {

text::TokenSequence to_tokens(const std::vector<std::string>& words) {
    text::TokenSequence seq;
    seq.reserve(words.size());
    for (const std::string& w : words) seq.push_back(text::Token{w});
    return seq;
}

std::vector<std::string> to_words(const text::TokenSequence& seq) {
    std::vector<std::string> out;
    out.reserve(seq.size());
    for (const text::Token& t : seq) out.push_back(t.surface);
    return out;
}

std::vector<text::TokenSequence> to_token_lists(
    const std::vector<std::vector<std::string>>& lists) {
    std::vector<text::TokenSequence> out;
    out.reserve(lists.size());
    for (const auto& words : lists) out.push_back(to_tokens(words));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Context-aware hallucination scoring for retrieval-augmented QA";
    m.attr("__version__") = "0.1.0";

    py::class_<text::NormalizationConfig>(m, "NormalizationConfig")
        .def(py::init([](bool lowercase, bool strip_punctuation, bool apply_stemming) {
                 return text::NormalizationConfig{lowercase, strip_punctuation,
                                                  apply_stemming};
             }),
             py::arg("lowercase") = true, py::arg("strip_punctuation") = true,
             py::arg("apply_stemming") = false)
        .def_readwrite("lowercase", &text::NormalizationConfig::lowercase)
        .def_readwrite("strip_punctuation", &text::NormalizationConfig::strip_punctuation)
        .def_readwrite("apply_stemming", &text::NormalizationConfig::apply_stemming)
        .def("__repr__", [](const text::NormalizationConfig& c) {
            std::ostringstream out;
            out << "NormalizationConfig(lowercase=" << (c.lowercase ? "True" : "False")
                << ", strip_punctuation=" << (c.strip_punctuation ? "True" : "False")
                << ", apply_stemming=" << (c.apply_stemming ? "True" : "False") << ")";
            return out.str();
        });

    m.def(
        "strip_html",
        [](const std::string& s) { return text::strip_html(text::RawText{s}).content; },
        py::arg("text"), "Remove markup tags, keeping the visible text.");

    m.def(
        "tokenize",
        [](const std::string& s, const text::NormalizationConfig& config) {
            return to_words(text::tokenize(text::RawText{s}, config));
        },
        py::arg("text"), py::arg("config") = text::NormalizationConfig{},
        "Split text into normalized word tokens.");

    m.def(
        "stem",
        [](const std::string& word) { return text::stem(text::Token{word}).surface; },
        py::arg("word"), "Reduce an Italian word to its stem form.");

    py::class_<metrics::ScoreTriple>(m, "ScoreTriple")
        .def_readonly("precision", &metrics::ScoreTriple::precision)
        .def_readonly("recall", &metrics::ScoreTriple::recall)
        .def_readonly("f1", &metrics::ScoreTriple::f1)
        .def("__repr__", [](const metrics::ScoreTriple& s) {
            std::ostringstream out;
            out << "ScoreTriple(precision=" << s.precision << ", recall=" << s.recall
                << ", f1=" << s.f1 << ")";
            return out.str();
        });

    py::class_<metrics::BleuScore>(m, "BleuScore")
        .def_readonly("value", &metrics::BleuScore::value)
        .def_readonly("per_order_precision", &metrics::BleuScore::per_order_precision)
        .def_readonly("brevity_penalty", &metrics::BleuScore::brevity_penalty)
        .def("__repr__", [](const metrics::BleuScore& s) {
            std::ostringstream out;
            out << "BleuScore(value=" << s.value << ")";
            return out.str();
        });

    py::class_<metrics::MeteorScore>(m, "MeteorScore")
        .def_readonly("value", &metrics::MeteorScore::value)
        .def_readonly("matched_unigrams", &metrics::MeteorScore::matched_unigrams)
        .def_readonly("chunk_count", &metrics::MeteorScore::chunk_count)
        .def_readonly("fragmentation_penalty", &metrics::MeteorScore::fragmentation_penalty)
        .def_readonly("f_mean", &metrics::MeteorScore::f_mean)
        .def("__repr__", [](const metrics::MeteorScore& s) {
            std::ostringstream out;
            out << "MeteorScore(value=" << s.value << ")";
            return out.str();
        });

    m.def(
        "rouge_n",
        [](const std::vector<std::string>& system, const std::vector<std::string>& reference,
           std::size_t n) { return metrics::rouge_n(to_tokens(system), to_tokens(reference), n); },
        py::arg("system"), py::arg("reference"), py::arg("n") = 1,
        "N-gram overlap precision/recall/F1.");

    m.def(
        "rouge_l",
        [](const std::vector<std::string>& system, const std::vector<std::string>& reference) {
            return metrics::rouge_l(to_tokens(system), to_tokens(reference));
        },
        py::arg("system"), py::arg("reference"),
        "Longest-common-subsequence precision/recall/F1.");

    m.def(
        "bleu",
        [](const std::vector<std::string>& system,
           const std::vector<std::vector<std::string>>& references, std::size_t max_order,
           bool smoothing) {
            metrics::BleuOptions opts;
            opts.max_order = max_order;
            opts.smoothing = smoothing;
            return metrics::bleu(to_tokens(system), to_token_lists(references), opts);
        },
        py::arg("system"), py::arg("references"), py::arg("max_order") = 4,
        py::arg("smoothing") = false,
        "Clipped n-gram precision with brevity penalty, over one or more references.");

    m.def(
        "meteor",
        [](const std::vector<std::string>& system, const std::vector<std::string>& reference,
           double recall_weight, bool stem_matching) {
            metrics::MeteorOptions opts;
            opts.recall_weight = recall_weight;
            opts.stem_matching = stem_matching;
            return metrics::meteor(to_tokens(system), to_tokens(reference), opts);
        },
        py::arg("system"), py::arg("reference"), py::arg("recall_weight") = 0.9,
        py::arg("stem_matching") = true,
        "Two-stage unigram alignment with a fragmentation penalty.");

    m.def(
        "exact_match",
        [](const std::vector<std::string>& system, const std::vector<std::string>& reference) {
            return metrics::exact_match(to_tokens(system), to_tokens(reference));
        },
        py::arg("system"), py::arg("reference"), "1 iff the token sequences are identical.");

    m.def(
        "bertscore_hashed",
        [](const std::vector<std::string>& system, const std::vector<std::string>& reference,
           std::size_t dimension) {
            embedding::HashedTfProvider provider(dimension);
            return metrics::bertscore(to_tokens(system), to_tokens(reference), provider);
        },
        py::arg("system"), py::arg("reference"), py::arg("dimension") = 256,
        "Greedy embedding-similarity matching over the built-in hashed embedder.");

    py::class_<nmiss::NmissBreakdown>(m, "NmissBreakdown")
        .def_property_readonly(
            "metric",
            [](const nmiss::NmissBreakdown& b) { return metrics::to_string(b.metric); })
        .def_property_readonly(
            "component",
            [](const nmiss::NmissBreakdown& b) { return metrics::to_string(b.component); })
        .def_readonly("base", &nmiss::NmissBreakdown::f_ref)
        .def_readonly("context_score", &nmiss::NmissBreakdown::f_cxt)
        .def_readonly("lambda1", &nmiss::NmissBreakdown::lambda1)
        .def_readonly("lambda2", &nmiss::NmissBreakdown::lambda2)
        .def_readonly("weighted", &nmiss::NmissBreakdown::weighted)
        .def_readonly("rescued", &nmiss::NmissBreakdown::final_score)
        .def("__repr__", [](const nmiss::NmissBreakdown& b) {
            std::ostringstream out;
            out << "NmissBreakdown(metric='" << metrics::to_string(b.metric)
                << "', component='" << metrics::to_string(b.component)
                << "', base=" << b.f_ref << ", rescued=" << b.final_score << ")";
            return out.str();
        });

    m.def(
        "evaluate_nmiss",
        [](const std::vector<std::string>& system, const std::vector<std::string>& reference,
           const std::vector<std::string>& context, const std::string& metric,
           bool clip_context, bool unigram_lambdas) {
            nmiss::NmissOptions opts;
            opts.clip_context = clip_context;
            opts.unigram_lambdas = unigram_lambdas;
            return nmiss::evaluate_nmiss(to_tokens(system), to_tokens(reference),
                                         to_tokens(context),
                                         metrics::metric_from_string(metric), opts);
        },
        py::arg("system"), py::arg("reference"), py::arg("context"),
        py::arg("metric") = "rouge1", py::arg("clip_context") = true,
        py::arg("unigram_lambdas") = false,
        "Score system against reference, rescuing residual tokens through the context. "
        "Returns one breakdown per component; the rescued score never drops below base.");

    m.def(
        "partition_tokens",
        [](const std::vector<std::string>& system, const std::vector<std::string>& reference) {
            auto p = nmiss::partition_tokens(to_tokens(system), to_tokens(reference));
            return py::make_tuple(to_words(p.matched), to_words(p.residual));
        },
        py::arg("system"), py::arg("reference"),
        "Split system tokens into (matched, residual) halves against the reference.");

    py::class_<rag::Chunk>(m, "Chunk")
        .def_readonly("doc_id", &rag::Chunk::doc_id)
        .def_readonly("seq_no", &rag::Chunk::seq_no)
        .def_readonly("token_begin", &rag::Chunk::token_begin)
        .def_readonly("token_end", &rag::Chunk::token_end)
        .def_readonly("content", &rag::Chunk::content)
        .def_property_readonly(
            "tokens", [](const rag::Chunk& c) { return to_words(c.tokens); })
        .def("__repr__", [](const rag::Chunk& c) {
            std::ostringstream out;
            out << "Chunk(doc_id='" << c.doc_id << "', seq_no=" << c.seq_no << ", tokens=["
                << c.token_begin << ", " << c.token_end << "))";
            return out.str();
        });

    m.def(
        "chunk_document",
        [](const std::string& doc_id, const std::vector<std::string>& tokens,
           std::size_t chunk_size, std::size_t overlap) {
            return rag::chunk_document(doc_id, to_tokens(tokens), chunk_size, overlap);
        },
        py::arg("doc_id"), py::arg("tokens"), py::arg("chunk_size") = 512,
        py::arg("overlap") = 64,
        "Sliding-window chunking; consecutive chunks share exactly `overlap` tokens.");

    m.def(
        "classify_level",
        [](const std::string& question) {
            return ingest::to_string(ingest::classify_level(text::RawText{question}));
        },
        py::arg("question"),
        "Map a question to LOW/MID/HIGH difficulty by its character count.");
}
