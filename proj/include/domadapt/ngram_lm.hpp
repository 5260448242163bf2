#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"

namespace domadapt {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

struct LmOptions {
    std::size_t order = 4;
    double alpha = 0.1;
    /// Interpolation weights for orders 1..n; empty means uniform.
    std::vector<double> weights;
    /// Map tokens seen once in training to <unk>.
    bool unk_singletons = false;
};

/// Prints a double so that parsing it back yields the same value.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(std::string(what) + ": not a number: '" + std::string(s) + "'");
    }
}

/// Interpolated Lidstone n-gram model over a closed vocabulary.
///
/// For each order k the component estimate is
///   p_k(w | h) = (c(h_k, w) + alpha) / (c(h_k) + alpha * |V'|)
/// where h_k is the last k-1 tokens of the <s>-padded history,
/// c(h_k) is the number of events following h_k and V' is the training
/// vocabulary plus </s> and <unk>. The model probability is the
/// weight-mixed sum over k = 1..n. Unseen contexts fall back to uniform
/// within their component, so every distribution sums to one.
class NGramLM {
public:
    using Id = std::uint32_t;
    static constexpr Id kBosId = 0;
    static constexpr Id kEosId = 1;
    static constexpr Id kUnkId = 2;

    static NGramLM train(std::span<const Corpus* const> corpora, LmOptions options) {
        NGramLM lm(std::move(options));
        std::size_t sentences = 0;
        std::unordered_map<std::string, long long> freq;
        for (const Corpus* c : corpora) {
            sentences += c->sentences.size();
            if (lm.unk_singletons_)
                for (const auto& s : c->sentences)
                    for (const auto& t : s.tokens) ++freq[t];
        }
        if (sentences == 0) throw Error("train_lm: empty training set");

        // Vocabulary ids are assigned in sorted order so serialization and
        // scoring never depend on hash iteration order.
        std::vector<std::string> seen;
        for (const Corpus* c : corpora)
            for (const auto& s : c->sentences)
                for (const auto& t : s.tokens)
                    if (!is_reserved(t) && (!lm.unk_singletons_ || freq[t] > 1)) seen.push_back(t);
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (auto& w : seen) lm.add_word(std::move(w));

        std::vector<Id> ids;
        for (const Corpus* c : corpora)
            for (const auto& s : c->sentences) {
                lm.to_ids(s.tokens, ids);
                lm.count_sentence(ids);
            }
        return lm;
    }

    static NGramLM train(std::initializer_list<const Corpus*> corpora, LmOptions options) {
        return train(std::span<const Corpus* const>(corpora.begin(), corpora.size()), std::move(options));
    }

    std::size_t order() const { return order_; }
    double alpha() const { return alpha_; }
    const std::vector<double>& weights() const { return weights_; }
    bool unk_singletons() const { return unk_singletons_; }

    /// |V'|: vocabulary plus </s> and <unk> (<s> is never predicted).
    std::size_t event_space_size() const { return words_.size() - 1; }

    /// Predictable tokens in id order: </s>, <unk>, then the vocabulary.
    std::vector<std::string> event_space() const { return {words_.begin() + 1, words_.end()}; }

    bool in_vocab(const std::string& token) const { return ids_.count(token) != 0 && !is_reserved(token); }

    /// p(word | history). `history` holds preceding tokens (oldest first)
    /// without padding; it may contain "<s>" explicitly. Unknown tokens
    /// map to <unk>.
    double prob(std::span<const std::string> history, const std::string& word) const {
        std::vector<Id> h(order_ - 1, kBosId);
        for (const auto& t : history) h.push_back(t == kBos ? kBosId : lookup(t));
        const Id w = word == kEos ? kEosId : lookup(word);
        return prob_ids(std::span<const Id>(h).last(order_ - 1), w);
    }

    /// Per-token cross-entropy in nats: -(1/T) sum log p, T = tokens + 1.
    double cross_entropy(const Sentence& sentence) const {
        if (sentence.tokens.empty()) throw Error("cross_entropy: empty sentence");
        std::vector<Id> ids;
        to_ids(sentence.tokens, ids);
        std::vector<Id> seq(order_ - 1, kBosId);
        seq.insert(seq.end(), ids.begin(), ids.end());
        seq.push_back(kEosId);
        double log_sum = 0.0;
        const std::size_t pad = order_ - 1;
        for (std::size_t i = pad; i < seq.size(); ++i)
            log_sum += std::log(prob_ids(std::span<const Id>(seq).subspan(i - pad, pad), seq[i]));
        return -log_sum / static_cast<double>(ids.size() + 1);
    }

    /// ARPA-like count dump: header, then per-order blocks of
    /// "tokens<TAB>count" sorted lexicographically by token sequence.
    std::string serialize() const {
        std::ostringstream out;
        out << "\\domadapt-lm v1\n";
        out << "order\t" << order_ << '\n';
        out << "alpha\t" << format_double(alpha_) << '\n';
        out << "weights";
        for (double w : weights_) out << '\t' << format_double(w);
        out << '\n';
        out << "unk_singletons\t" << (unk_singletons_ ? 1 : 0) << '\n';
        for (std::size_t k = 1; k <= order_; ++k) {
            std::vector<std::pair<std::vector<std::string>, long long>> rows;
            for (const auto& [key, ctx] : tables_[k - 1]) {
                const auto context = decode_key(key);
                for (const auto& [w, c] : ctx.next) {
                    std::vector<std::string> gram;
                    for (Id id : context) gram.push_back(words_[id]);
                    gram.push_back(words_[w]);
                    rows.emplace_back(std::move(gram), c);
                }
            }
            std::sort(rows.begin(), rows.end());
            out << "\\" << k << "-grams:\n";
            for (const auto& [gram, c] : rows) out << join(gram) << '\t' << c << '\n';
        }
        out << "\\end\\\n";
        return out.str();
    }

    static NGramLM parse(std::string_view text) {
        const auto lines = split_lines(text);
        std::size_t pos = 0;
        const auto next_line = [&]() -> std::string_view {
            if (pos >= lines.size()) throw Error("lm file: unexpected end of file");
            return lines[pos++];
        };
        const auto field = [&](std::string_view name) {
            const std::string line(next_line());
            auto parts = split_tabs(line);
            if (parts.empty() || parts[0] != name) throw Error("lm file: expected '" + std::string(name) + "'");
            parts.erase(parts.begin());
            return parts;
        };
        if (next_line() != "\\domadapt-lm v1") throw Error("lm file: missing or unsupported header");
        LmOptions opt;
        const auto order_f = field("order");
        if (order_f.size() != 1) throw Error("lm file: bad order line");
        opt.order = static_cast<std::size_t>(parse_double(order_f[0], "lm order"));
        const auto alpha_f = field("alpha");
        if (alpha_f.size() != 1) throw Error("lm file: bad alpha line");
        opt.alpha = parse_double(alpha_f[0], "lm alpha");
        for (const auto& w : field("weights")) opt.weights.push_back(parse_double(w, "lm weight"));
        const auto unk_f = field("unk_singletons");
        opt.unk_singletons = unk_f.size() == 1 && unk_f[0] == "1";

        NGramLM lm(std::move(opt));
        std::vector<std::pair<std::vector<std::string>, long long>> grams;
        std::vector<std::string> vocab;
        for (std::size_t k = 1; k <= lm.order_; ++k) {
            if (next_line() != "\\" + std::to_string(k) + "-grams:")
                throw Error("lm file: expected block for order " + std::to_string(k));
            while (pos < lines.size() && !lines[pos].starts_with("\\")) {
                const std::string line(next_line());
                const auto parts = split_tabs(line);
                if (parts.size() != 2) throw Error("lm file: malformed entry at line " + std::to_string(pos));
                auto gram = split_whitespace(parts[0]);
                if (gram.size() != k) throw Error("lm file: wrong n-gram length at line " + std::to_string(pos));
                long long count = 0;
                auto [p, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), count);
                if (ec != std::errc() || p != parts[1].data() + parts[1].size() || count <= 0)
                    throw Error("lm file: bad count at line " + std::to_string(pos));
                if (k == 1 && !is_reserved(gram[0])) vocab.push_back(gram[0]);
                grams.emplace_back(std::move(gram), count);
            }
        }
        if (next_line() != "\\end\\") throw Error("lm file: missing end marker");
        std::sort(vocab.begin(), vocab.end());
        for (auto& w : vocab) lm.add_word(std::move(w));
        for (const auto& [gram, count] : grams) {
            std::vector<Id> ids;
            for (std::size_t i = 0; i < gram.size(); ++i) {
                const bool last = i + 1 == gram.size();
                if (gram[i] == kBos && !last) ids.push_back(kBosId);
                else if (gram[i] == kEos && last) ids.push_back(kEosId);
                else if (gram[i] == kUnk) ids.push_back(kUnkId);
                else {
                    auto it = lm.ids_.find(gram[i]);
                    if (it == lm.ids_.end() || is_reserved(gram[i]))
                        throw Error("lm file: token '" + gram[i] + "' not in unigram block");
                    ids.push_back(it->second);
                }
            }
            const Id w = ids.back();
            ids.pop_back();
            auto& ctx = lm.tables_[gram.size() - 1][encode_key(ids)];
            ctx.total += count;
            ctx.next[w] += count;
        }
        return lm;
    }

    static NGramLM load(const std::filesystem::path& path) { return parse(read_file(path)); }
    void save(const std::filesystem::path& path) const { write_file(path, serialize()); }

private:
    struct Context {
        long long total = 0;
        std::map<Id, long long> next;
    };

    explicit NGramLM(LmOptions opt)
        : order_(opt.order), alpha_(opt.alpha), weights_(std::move(opt.weights)), unk_singletons_(opt.unk_singletons) {
        if (order_ < 1) throw Error("train_lm: order must be >= 1");
        if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw Error("train_lm: alpha must be > 0");
        if (weights_.empty()) weights_.assign(order_, 1.0 / static_cast<double>(order_));
        if (weights_.size() != order_)
            throw Error("train_lm: expected " + std::to_string(order_) + " interpolation weights, got " +
                        std::to_string(weights_.size()));
        double sum = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw Error("train_lm: interpolation weights must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw Error("train_lm: interpolation weights must sum to 1");
        words_ = {std::string(kBos), std::string(kEos), std::string(kUnk)};
        for (Id i = 0; i < words_.size(); ++i) ids_.emplace(words_[i], i);
        tables_.resize(order_);
    }

    static bool is_reserved(std::string_view t) { return t == kBos || t == kEos || t == kUnk; }

    static std::vector<std::string> split_tabs(const std::string& line) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            parts.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        return parts;
    }

    void add_word(std::string w) {
        const auto id = static_cast<Id>(words_.size());
        ids_.emplace(w, id);
        words_.push_back(std::move(w));
    }

    Id lookup(const std::string& t) const {
        if (is_reserved(t)) return kUnkId;
        auto it = ids_.find(t);
        return it == ids_.end() ? kUnkId : it->second;
    }

    void to_ids(std::span<const std::string> tokens, std::vector<Id>& out) const {
        out.clear();
        for (const auto& t : tokens) out.push_back(lookup(t));
    }

    static std::string encode_key(std::span<const Id> ids) {
        std::string key(ids.size() * sizeof(Id), '\0');
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t b = 0; b < sizeof(Id); ++b)
                key[i * sizeof(Id) + b] = static_cast<char>((ids[i] >> (8 * b)) & 0xFF);
        return key;
    }

    static std::vector<Id> decode_key(const std::string& key) {
        std::vector<Id> ids(key.size() / sizeof(Id), 0);
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t b = 0; b < sizeof(Id); ++b)
                ids[i] |= static_cast<Id>(static_cast<unsigned char>(key[i * sizeof(Id) + b])) << (8 * b);
        return ids;
    }

    void count_sentence(const std::vector<Id>& ids) {
        std::vector<Id> seq(order_ - 1, kBosId);
        seq.insert(seq.end(), ids.begin(), ids.end());
        seq.push_back(kEosId);
        const std::size_t pad = order_ - 1;
        for (std::size_t i = pad; i < seq.size(); ++i)
            for (std::size_t k = 1; k <= order_; ++k) {
                auto& ctx = tables_[k - 1][encode_key(std::span<const Id>(seq).subspan(i - (k - 1), k - 1))];
                ++ctx.total;
                ++ctx.next[seq[i]];
            }
    }

    /// history: exactly order-1 ids, oldest first.
    double prob_ids(std::span<const Id> history, Id w) const {
        const double v = static_cast<double>(event_space_size());
        double p = 0.0;
        for (std::size_t k = 1; k <= order_; ++k) {
            if (weights_[k - 1] == 0.0) continue;
            double count = 0.0, total = 0.0;
            const auto& table = tables_[k - 1];
            auto it = table.find(encode_key(history.last(k - 1)));
            if (it != table.end()) {
                total = static_cast<double>(it->second.total);
                auto wi = it->second.next.find(w);
                if (wi != it->second.next.end()) count = static_cast<double>(wi->second);
            }
            p += weights_[k - 1] * (count + alpha_) / (total + alpha_ * v);
        }
        return p;
    }

    std::size_t order_;
    double alpha_;
    std::vector<double> weights_;
    bool unk_singletons_;
    std::vector<std::string> words_;
    std::unordered_map<std::string, Id> ids_;
    std::vector<std::unordered_map<std::string, Context>> tables_;
};

inline NGramLM train_lm(std::span<const Corpus* const> corpora, LmOptions options) {
    return NGramLM::train(corpora, std::move(options));
}

inline double cross_entropy(const NGramLM& lm, const Sentence& s) { return lm.cross_entropy(s); }

}  // namespace domadapt
