#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"
#include "domadapt/ngram_lm.hpp"

namespace domadapt {

inline constexpr std::size_t kBleuOrder = 4;

struct BleuReport {
    double bleu = 0.0;
    std::array<double, kBleuOrder> precisions{};
    double brevity_penalty = 1.0;
    std::size_t hyp_length = 0;
    std::size_t ref_length = 0;
    std::array<std::size_t, kBleuOrder> matches{};
    std::array<std::size_t, kBleuOrder> totals{};

    /// Same layout as the Moses multi-bleu summary.
    std::string summary() const {
        char buf[256];
        const double ratio = ref_length ? static_cast<double>(hyp_length) / static_cast<double>(ref_length) : 0.0;
        std::snprintf(buf, sizeof buf, "BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%zu, ref_len=%zu)",
                      bleu, 100 * precisions[0], 100 * precisions[1], 100 * precisions[2], 100 * precisions[3],
                      brevity_penalty, ratio, hyp_length, ref_length);
        return buf;
    }
};

struct SpanLess {
    bool operator()(std::span<const std::string> a, std::span<const std::string> b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

/// Case-sensitive corpus BLEU-4 with clipped counts and no smoothing: any
/// order with zero matches gives a score of zero.
inline BleuReport corpus_bleu(std::span<const Sentence> hypotheses, std::span<const Sentence> references) {
    if (hypotheses.empty()) throw Error("bleu: no sentences");
    if (hypotheses.size() != references.size())
        throw Error("bleu: " + std::to_string(hypotheses.size()) + " hypotheses vs " + std::to_string(references.size()) +
                    " references");
    BleuReport r;
    for (std::size_t s = 0; s < hypotheses.size(); ++s) {
        const auto& hyp = hypotheses[s].tokens;
        const auto& ref = references[s].tokens;
        r.hyp_length += hyp.size();
        r.ref_length += ref.size();
        for (std::size_t n = 1; n <= kBleuOrder; ++n) {
            if (hyp.size() < n) continue;
            std::map<std::span<const std::string>, std::size_t, SpanLess> ref_counts, hyp_counts;
            for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[std::span(ref).subspan(i, n)];
            for (std::size_t i = 0; i + n <= hyp.size(); ++i) ++hyp_counts[std::span(hyp).subspan(i, n)];
            for (const auto& [gram, c] : hyp_counts) {
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) r.matches[n - 1] += std::min(c, it->second);
            }
            r.totals[n - 1] += hyp.size() - n + 1;
        }
    }
    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t n = 0; n < kBleuOrder; ++n) {
        r.precisions[n] = r.totals[n] ? static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]) : 0.0;
        if (r.precisions[n] == 0.0) zero = true;
        else log_sum += std::log(r.precisions[n]);
    }
    if (r.hyp_length == 0) {
        r.brevity_penalty = 0.0;
    } else if (r.hyp_length < r.ref_length) {
        r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
    }
    r.bleu = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / kBleuOrder);
    return r;
}

inline BleuReport corpus_bleu(const Corpus& hypotheses, const Corpus& references) {
    return corpus_bleu(std::span<const Sentence>(hypotheses.sentences), std::span<const Sentence>(references.sentences));
}

struct CurveRecord {
    long long step = 0;
    std::string metric;
    double value = 0.0;
    std::string timestamp;

    bool operator==(const CurveRecord&) const = default;
};

inline std::string iso_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Learning-curve file for one run: "step<TAB>metric<TAB>value<TAB>timestamp"
/// per line under `dir`/<run_id>.curve.tsv. Steps never decrease.
class CurveLog {
public:
    CurveLog(std::filesystem::path dir, std::string run_id) : run_id_(std::move(run_id)) {
        if (run_id_.empty() || run_id_.find_first_of("/\\\t\n") != std::string::npos)
            throw Error("curve: invalid run id '" + run_id_ + "'");
        path_ = std::move(dir) / (run_id_ + ".curve.tsv");
    }

    const std::filesystem::path& path() const { return path_; }

    std::vector<CurveRecord> read() const {
        std::vector<CurveRecord> out;
        if (!std::filesystem::exists(path_)) return out;
        const std::string text = read_file(path_);
        std::size_t line_no = 0;
        for (auto line : split_lines(text)) {
            ++line_no;
            std::vector<std::string> f;
            std::size_t start = 0;
            while (true) {
                const auto tab = line.find('\t', start);
                f.emplace_back(line.substr(start, tab - start));
                if (tab == std::string_view::npos) break;
                start = tab + 1;
            }
            if (f.size() != 4) throw Error(path_.string() + ": malformed record at line " + std::to_string(line_no));
            out.push_back({static_cast<long long>(parse_double(f[0], "curve step")), f[1], parse_double(f[2], "curve value"), f[3]});
        }
        return out;
    }

    CurveRecord append(long long step, const std::string& metric, double value,
                       std::chrono::system_clock::time_point when = std::chrono::system_clock::now()) {
        if (metric.empty() || metric.find_first_of("\t\n") != std::string::npos)
            throw Error("curve: invalid metric name");
        const auto existing = read();
        if (!existing.empty() && step < existing.back().step)
            throw Error("curve: step " + std::to_string(step) + " is below last step " +
                        std::to_string(existing.back().step) + " for run '" + run_id_ + "'");
        CurveRecord rec{step, metric, value, iso_timestamp(when)};
        std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        if (!out) throw Error("curve: cannot open '" + path_.string() + "'");
        out << rec.step << '\t' << rec.metric << '\t' << format_double(rec.value) << '\t' << rec.timestamp << '\n';
        return rec;
    }

private:
    std::string run_id_;
    std::filesystem::path path_;
};

inline CurveRecord log_curve(const std::filesystem::path& dir, const std::string& run_id, long long step,
                             const std::string& metric, double value) {
    return CurveLog(dir, run_id).append(step, metric, value);
}

}  // namespace domadapt
