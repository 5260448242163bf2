#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"
#include "domadapt/parallel.hpp"

namespace domadapt {

/// End-of-word marker. It is a separate symbol during merging and is glued
/// onto the final subword of each word in the emitted segmentation.
inline constexpr std::string_view kEndOfWord = "</w>";

/// Byte-pair-encoding model shared by both languages.
///
/// Words containing the literal text "</w>" cannot be segmented
/// unambiguously and are outside the round-trip guarantee.
class BpeModel {
public:
    using Pair = std::pair<std::string, std::string>;

    BpeModel() = default;

    /// `base` is the character inventory the merges were learned over.
    BpeModel(std::vector<Pair> merges, std::set<std::string> base, std::size_t requested_merges)
        : merges_(std::move(merges)), vocab_(std::move(base)), merge_count_(requested_merges) {
        vocab_.insert(std::string(kEndOfWord));
        for (std::size_t i = 0; i < merges_.size(); ++i) {
            ranks_.emplace(merges_[i], i);
            vocab_.insert(merges_[i].first);
            vocab_.insert(merges_[i].second);
            vocab_.insert(merges_[i].first + merges_[i].second);
        }
    }

    const std::vector<Pair>& merges() const { return merges_; }
    const std::set<std::string>& vocab() const { return vocab_; }
    std::string_view continuation_marker() const { return kEndOfWord; }
    /// Requested number of merges; merges().size() may be smaller when the
    /// training data runs out of pairs.
    std::size_t merge_count() const { return merge_count_; }

    /// Segments one word, marker attached to the last subword.
    std::vector<std::string> segment(std::string_view word) const {
        std::vector<std::string> symbols = utf8_chars(word);
        symbols.emplace_back(kEndOfWord);
        while (symbols.size() > 1) {
            std::size_t best_rank = SIZE_MAX;
            const Pair* best = nullptr;
            for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
                auto it = ranks_.find(Pair{symbols[i], symbols[i + 1]});
                if (it != ranks_.end() && it->second < best_rank) {
                    best_rank = it->second;
                    best = &it->first;
                }
            }
            if (!best) break;
            std::vector<std::string> merged;
            merged.reserve(symbols.size());
            for (std::size_t i = 0; i < symbols.size(); ++i) {
                if (i + 1 < symbols.size() && symbols[i] == best->first && symbols[i + 1] == best->second) {
                    merged.push_back(symbols[i] + symbols[i + 1]);
                    ++i;
                } else {
                    merged.push_back(std::move(symbols[i]));
                }
            }
            symbols = std::move(merged);
        }
        if (symbols.size() > 1 && symbols.back() == kEndOfWord) {
            symbols.pop_back();
            symbols.back() += kEndOfWord;
        }
        return symbols;
    }

    /// Versioned text form: header with the merge count, then one
    /// space-separated pair per line in application order.
    std::string serialize() const {
        std::ostringstream out;
        out << "#domadapt-bpe v1 merges=" << merges_.size() << '\n';
        for (const auto& [a, b] : merges_) out << a << ' ' << b << '\n';
        return out.str();
    }

    static BpeModel parse(std::string_view text) {
        const auto lines = split_lines(text);
        const std::string_view prefix = "#domadapt-bpe v1 merges=";
        if (lines.empty() || lines[0].substr(0, prefix.size()) != prefix)
            throw Error("bpe model: missing or unsupported header");
        std::size_t declared = 0;
        try {
            declared = std::stoul(std::string(lines[0].substr(prefix.size())));
        } catch (const std::exception&) {
            throw Error("bpe model: bad merge count in header");
        }
        if (lines.size() - 1 != declared)
            throw Error("bpe model: header declares " + std::to_string(declared) + " merges, file has " +
                        std::to_string(lines.size() - 1));
        std::vector<Pair> merges;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            auto parts = split_whitespace(lines[i]);
            if (parts.size() != 2) throw Error("bpe model: malformed merge at line " + std::to_string(i + 1));
            merges.emplace_back(std::move(parts[0]), std::move(parts[1]));
        }
        return BpeModel(std::move(merges), {}, declared);
    }

    static BpeModel load(const std::filesystem::path& path) { return parse(read_file(path)); }
    void save(const std::filesystem::path& path) const { write_file(path, serialize()); }

private:
    std::vector<Pair> merges_;
    std::set<std::string> vocab_;
    std::map<Pair, std::size_t> ranks_;
    std::size_t merge_count_ = 0;
};

/// Learns merges over the pooled word frequencies of all corpora. Each step
/// takes the most frequent adjacent pair; ties go to the lexicographically
/// smallest (first, second).
inline BpeModel bpe_train(std::span<const Corpus* const> corpora, std::size_t merge_count) {
    std::map<std::string, long long> word_freq;
    for (const Corpus* c : corpora)
        for (const auto& s : c->sentences)
            for (const auto& t : s.tokens) ++word_freq[t];
    if (word_freq.empty()) throw Error("bpe_train: no training text");

    struct Word {
        std::vector<std::string> symbols;
        long long freq;
    };
    std::vector<Word> words;
    std::set<std::string> base;
    words.reserve(word_freq.size());
    for (const auto& [w, f] : word_freq) {
        Word word{utf8_chars(w), f};
        base.insert(word.symbols.begin(), word.symbols.end());
        word.symbols.emplace_back(kEndOfWord);
        words.push_back(std::move(word));
    }

    using Pair = BpeModel::Pair;
    std::map<Pair, long long> pair_counts;
    std::map<Pair, std::set<std::size_t>> where;
    const auto account = [&](std::size_t wi, long long sign) {
        const Word& w = words[wi];
        for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
            Pair p{w.symbols[i], w.symbols[i + 1]};
            auto& count = pair_counts[p];
            count += sign * w.freq;
            if (sign > 0) {
                where[p].insert(wi);
            } else if (count == 0) {
                pair_counts.erase(p);
            }
        }
    };
    for (std::size_t wi = 0; wi < words.size(); ++wi) account(wi, +1);

    std::vector<Pair> merges;
    while (merges.size() < merge_count && !pair_counts.empty()) {
        auto best = pair_counts.begin();
        for (auto it = std::next(best); it != pair_counts.end(); ++it)
            if (it->second > best->second) best = it;
        const Pair pair = best->first;
        merges.push_back(pair);

        const std::set<std::size_t> affected = std::move(where[pair]);
        where.erase(pair);
        for (std::size_t wi : affected) {
            Word& w = words[wi];
            bool present = false;
            for (std::size_t i = 0; i + 1 < w.symbols.size() && !present; ++i)
                present = w.symbols[i] == pair.first && w.symbols[i + 1] == pair.second;
            if (!present) continue;
            account(wi, -1);
            std::vector<std::string> merged;
            merged.reserve(w.symbols.size());
            for (std::size_t i = 0; i < w.symbols.size(); ++i) {
                if (i + 1 < w.symbols.size() && w.symbols[i] == pair.first && w.symbols[i + 1] == pair.second) {
                    merged.push_back(w.symbols[i] + w.symbols[i + 1]);
                    ++i;
                } else {
                    merged.push_back(std::move(w.symbols[i]));
                }
            }
            w.symbols = std::move(merged);
            account(wi, +1);
        }
    }
    return BpeModel(std::move(merges), std::move(base), merge_count);
}

inline BpeModel bpe_train(std::initializer_list<const Corpus*> corpora, std::size_t merge_count) {
    return bpe_train(std::span<const Corpus* const>(corpora.begin(), corpora.size()), merge_count);
}

/// Subword-encodes every word of the sentence; raw becomes the space-joined
/// subword sequence.
inline Sentence bpe_apply(const BpeModel& model, const Sentence& sentence) {
    std::vector<std::string> out;
    for (const auto& word : sentence.tokens) {
        auto pieces = model.segment(word);
        out.insert(out.end(), std::make_move_iterator(pieces.begin()), std::make_move_iterator(pieces.end()));
    }
    return sentence_from_tokens(std::move(out));
}

inline Corpus bpe_apply(const BpeModel& model, const Corpus& corpus) {
    Corpus out;
    out.language = corpus.language;
    out.domain = corpus.domain;
    out.source_path = corpus.source_path;
    out.blank_lines = corpus.blank_lines;
    out.sentences.resize(corpus.sentences.size());
    parallel_for(corpus.sentences.size(), [&](std::size_t i) { out.sentences[i] = bpe_apply(model, corpus.sentences[i]); });
    return out;
}

/// Inverse of bpe_apply: concatenates subwords and closes a word at every
/// subword ending in the marker.
inline std::vector<std::string> desegment(std::span<const std::string> subwords) {
    std::vector<std::string> words;
    std::string current;
    for (const auto& piece : subwords) {
        if (piece.size() >= kEndOfWord.size() &&
            std::string_view(piece).substr(piece.size() - kEndOfWord.size()) == kEndOfWord) {
            current.append(piece, 0, piece.size() - kEndOfWord.size());
            words.push_back(std::move(current));
            current.clear();
        } else {
            current += piece;
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

inline Sentence desegment(const Sentence& s) { return sentence_from_tokens(desegment(s.tokens)); }

}  // namespace domadapt
