#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"
#include "domadapt/ngram_lm.hpp"
#include "domadapt/parallel.hpp"
#include "domadapt/rng.hpp"

namespace domadapt {

/// A candidate sentence with its cross-entropy difference. Lower ced means
/// more like the in-domain model and less like the out-of-domain one.
struct ScoredSentence {
    std::size_t index = 0;
    Sentence sentence;
    double ce_in = 0.0;
    double ce_out = 0.0;
    double ced = 0.0;
};

using Warnings = std::vector<std::string>;

inline bool ced_less(const ScoredSentence& a, const ScoredSentence& b) {
    return a.ced < b.ced || (a.ced == b.ced && a.index < b.index);
}

inline std::vector<ScoredSentence> ced_score(const NGramLM& in_lm, const NGramLM& out_lm, const Corpus& corpus) {
    if (corpus.empty()) throw Error("ced_score: empty corpus");
    std::vector<ScoredSentence> scored(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t i) {
        auto& s = scored[i];
        s.index = i;
        s.sentence = corpus.sentences[i];
        s.ce_in = in_lm.cross_entropy(s.sentence);
        s.ce_out = out_lm.cross_entropy(s.sentence);
        s.ced = s.ce_in - s.ce_out;
    });
    for (const auto& s : scored)
        if (!std::isfinite(s.ced)) throw Error("ced_score: non-finite score at index " + std::to_string(s.index));
    return scored;
}

/// The k lowest-ced sentences, ascending by (ced, index). Saturates at the
/// input size and records a warning when k exceeds it.
inline std::vector<ScoredSentence> select_lowest_k(std::span<const ScoredSentence> scored, std::size_t k,
                                                   Warnings* warnings = nullptr) {
    if (k > scored.size()) {
        if (warnings)
            warnings->push_back("select: k=" + std::to_string(k) + " exceeds " + std::to_string(scored.size()) +
                                " scored sentences; selecting all");
        k = scored.size();
    }
    std::vector<ScoredSentence> out(k);
    std::partial_sort_copy(scored.begin(), scored.end(), out.begin(), out.end(), ced_less);
    return out;
}

/// Uniform sample without replacement of min(target, |corpus|) sentences,
/// kept in original order.
inline std::vector<std::size_t> subsample_indices(std::size_t corpus_size, std::size_t target, std::uint64_t seed) {
    if (target >= corpus_size) return iota_indices(corpus_size);
    Rng rng(seed);
    auto idx = iota_indices(corpus_size);
    // Partial Fisher-Yates: the first `target` slots are a uniform sample.
    for (std::size_t i = 0; i < target; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(corpus_size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(target);
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline Corpus size_matched_subsample(const Corpus& corpus, std::size_t target_size, std::uint64_t seed) {
    Corpus out;
    out.language = corpus.language;
    out.domain = corpus.domain;
    out.source_path = corpus.source_path;
    for (std::size_t i : subsample_indices(corpus.size(), target_size, seed)) out.sentences.push_back(corpus.sentences[i]);
    return out;
}

inline Corpus selected_corpus(std::span<const ScoredSentence> selected, Language language, Domain domain) {
    Corpus out;
    out.language = language;
    out.domain = domain;
    for (const auto& s : selected) out.sentences.push_back(s.sentence);
    return out;
}

/// "index<TAB>ced<TAB>ce_in<TAB>ce_out<TAB>raw" per sentence.
inline std::string scored_text(std::span<const ScoredSentence> scored) {
    std::string out;
    for (const auto& s : scored) {
        out += std::to_string(s.index);
        out += '\t' + format_double(s.ced);
        out += '\t' + format_double(s.ce_in);
        out += '\t' + format_double(s.ce_out);
        out += '\t' + s.sentence.raw + '\n';
    }
    return out;
}

inline std::vector<ScoredSentence> parse_scored(std::string_view text) {
    std::vector<ScoredSentence> out;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        for (int i = 0; i < 4; ++i) {
            const auto tab = line.find('\t', start);
            if (tab == std::string_view::npos) throw Error("scored file: too few fields at line " + std::to_string(line_no));
            f.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        ScoredSentence s;
        s.index = static_cast<std::size_t>(parse_double(f[0], "scored index"));
        s.ced = parse_double(f[1], "scored ced");
        s.ce_in = parse_double(f[2], "scored ce_in");
        s.ce_out = parse_double(f[3], "scored ce_out");
        s.sentence = make_sentence(std::string(line.substr(start)));
        out.push_back(std::move(s));
    }
    return out;
}

/// Sidecar for a selection: original corpus index per selected line.
inline std::string index_text(std::span<const ScoredSentence> selected) {
    std::string out;
    for (const auto& s : selected) out += std::to_string(s.index) + '\n';
    return out;
}

}  // namespace domadapt
