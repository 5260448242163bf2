#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "domadapt/backtranslate.hpp"
#include "domadapt/bpe.hpp"
#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"
#include "domadapt/hash.hpp"
#include "domadapt/ngram_lm.hpp"
#include "domadapt/planner.hpp"
#include "domadapt/scheduler.hpp"
#include "domadapt/selection.hpp"

namespace domadapt {

inline constexpr std::size_t kDefaultMerges = 2000;
inline constexpr std::size_t kDeskSelectK = 2000;

struct PipelineConfig {
    std::filesystem::path manifest;
    std::filesystem::path output_dir = "out";
    std::size_t bpe_merges = kDefaultMerges;
    LmOptions lm;
    BatchWeightingSchedule schedule;
    /// 0 means "enough whole cycles for one pass over the out-of-domain side".
    std::size_t total_batches = 0;
    std::size_t select_k = kDeskSelectK;
    std::uint64_t seed = 0;
    std::optional<TranslatorSpec> translator;

    /// Keys (all optional except "manifest"):
    ///   manifest, output_dir, seed,
    ///   bpe: {merges}, lm: {order, alpha, weights, unk_singletons},
    ///   schedule: {n_in, n_out, batch_size, total_batches},
    ///   selection: {k},
    ///   translator: {kind: "dictionary"|"external", lexicon, command}
    /// Relative paths resolve against `base_dir`.
    static PipelineConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
        PipelineConfig c;
        const auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };
        const auto count = [](const nlohmann::json& j, const char* key, std::size_t fallback) -> std::size_t {
            if (!j.contains(key)) return fallback;
            const auto v = j.at(key).get<long long>();
            if (v < 0) throw Error(std::string("config: '") + key + "' must be >= 0");
            return static_cast<std::size_t>(v);
        };
        try {
            if (!doc.contains("manifest")) throw Error("config: missing 'manifest'");
            c.manifest = resolve(doc.at("manifest").get<std::string>());
            c.output_dir = resolve(doc.value("output_dir", std::string("out")));
            if (doc.contains("seed")) {
                const auto s = doc.at("seed").get<long long>();
                if (s < 0) throw Error("config: 'seed' must be >= 0");
                c.seed = static_cast<std::uint64_t>(s);
            }
            if (doc.contains("bpe")) c.bpe_merges = count(doc.at("bpe"), "merges", c.bpe_merges);
            if (doc.contains("lm")) {
                const auto& lm = doc.at("lm");
                c.lm.order = count(lm, "order", c.lm.order);
                c.lm.alpha = lm.value("alpha", c.lm.alpha);
                if (lm.contains("weights")) c.lm.weights = lm.at("weights").get<std::vector<double>>();
                c.lm.unk_singletons = lm.value("unk_singletons", false);
            }
            if (doc.contains("schedule")) {
                const auto& s = doc.at("schedule");
                c.schedule.n_in = count(s, "n_in", c.schedule.n_in);
                c.schedule.n_out = count(s, "n_out", c.schedule.n_out);
                c.schedule.batch_size = count(s, "batch_size", c.schedule.batch_size);
                c.total_batches = count(s, "total_batches", 0);
            }
            if (doc.contains("selection")) c.select_k = count(doc.at("selection"), "k", c.select_k);
            if (doc.contains("translator")) {
                const auto& t = doc.at("translator");
                TranslatorSpec spec;
                const std::string kind = t.value("kind", std::string("dictionary"));
                if (kind == "dictionary") {
                    spec.kind = TranslatorKind::Dictionary;
                    if (t.contains("lexicon")) spec.lexicon_path = resolve(t.at("lexicon").get<std::string>());
                } else if (kind == "external") {
                    spec.kind = TranslatorKind::External;
                    if (t.contains("command")) spec.command_template = t.at("command").get<std::string>();
                } else {
                    throw Error("config: unknown translator kind '" + kind + "'");
                }
                spec.validate();
                c.translator = spec;
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(std::string("config: ") + e.what());
        }
        c.schedule.validate();
        if (c.lm.weights.empty()) c.lm.weights.assign(c.lm.order, 1.0 / static_cast<double>(std::max<std::size_t>(c.lm.order, 1)));
        return c;
    }

    static PipelineConfig load(const std::filesystem::path& path) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw Error("config '" + path.string() + "': " + e.what());
        }
        return from_json(doc, path.parent_path());
    }
};

struct PipelineReport {
    AdaptationPlan plan;
    std::vector<std::string> stages;
    Warnings warnings;
    /// Relative artifact path -> SHA-256, excluding the hash manifest itself.
    std::map<std::string, std::string> artifacts;
    nlohmann::json summary;
};

namespace detail {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {}

    void write(const std::string& name, const std::string& content) {
        write_file(root_ / name, content);
        hashes_[name] = sha256_hex(content);
    }

    const std::map<std::string, std::string>& hashes() const { return hashes_; }

    std::string manifest() const {
        std::string out;
        for (const auto& [name, h] : hashes_) out += h + '\t' + name + '\n';
        return out;
    }

private:
    std::filesystem::path root_;
    std::map<std::string, std::string> hashes_;
};

template <class Fn>
auto run_stage(PipelineReport& report, const std::string& name, Fn&& fn) -> decltype(fn()) {
    report.stages.push_back(name);
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

inline void check_round_trip(const Corpus& words, const Corpus& subwords) {
    if (words.size() != subwords.size()) throw Error("encoded corpus changed sentence count");
    for (std::size_t i = 0; i < words.size(); ++i)
        if (desegment(subwords.sentences[i].tokens) != words.sentences[i].tokens)
            throw Error("BPE round-trip failed at sentence " + std::to_string(i + 1));
}

inline void check_windows(const std::vector<Batch>& stream, const BatchWeightingSchedule& s) {
    const std::size_t cycle = s.cycle_length();
    for (std::size_t start = 0; start + cycle <= stream.size(); start += cycle) {
        std::size_t outs = 0;
        for (std::size_t i = start; i < start + cycle; ++i) outs += stream[i].origin == Domain::OutOfDomain;
        if (outs != s.n_out) throw Error("stream window at batch " + std::to_string(start) + " violates the schedule");
    }
}

inline std::size_t default_total_batches(const BatchWeightingSchedule& s, std::size_t in_size, std::size_t out_size) {
    const auto passes = [&](std::size_t size, std::size_t per_cycle) {
        const std::size_t batches = (size + s.batch_size - 1) / s.batch_size;
        return ((batches + per_cycle - 1) / per_cycle) * s.cycle_length();
    };
    if (s.n_out > 0) return passes(out_size, s.n_out);
    return passes(in_size, s.n_in);
}

}  // namespace detail

/// Runs the recipe for the manifest's scenario and writes every artifact
/// under config.output_dir together with hashes.tsv.
inline PipelineReport run_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    PipelineReport report;
    detail::ArtifactWriter out(config.output_dir);
    using detail::run_stage;

    CorpusManifest manifest;
    run_stage(report, "plan", [&] {
        manifest = CorpusManifest::load(config.manifest);
        report.plan = plan_methods(classify_scenario(manifest), config.select_k);
    });
    const AdaptationPlan& plan = report.plan;

    CorpusSet words = run_stage(report, "load", [&] { return CorpusSet::load(manifest, plan.scenario); });
    for (Slot s : kAllSlots)
        if (words.at(s) && words.at(s)->blank_lines)
            report.warnings.push_back(std::string("load: dropped ") + std::to_string(words.at(s)->blank_lines) +
                                      " blank lines from " + slot_key(s));

    const BpeModel bpe = run_stage(report, "bpe-train", [&] {
        std::vector<const Corpus*> pool;
        for (Slot s : kAllSlots)
            if (words.at(s)) pool.push_back(&*words.at(s));
        BpeModel m = bpe_train(std::span<const Corpus* const>(pool), config.bpe_merges);
        out.write("bpe.model", m.serialize());
        return m;
    });

    std::optional<Corpus> pseudo_words;
    if (plan.selection) {
        pseudo_words = run_stage(report, "backtranslate", [&] {
            if (!config.translator) throw Error("scenario requires a translator but none is configured");
            const Corpus& l2_in = *words.at(Slot::L2In);
            Corpus pseudo = back_translate(l2_in, *config.translator);
            if (pseudo.size() != l2_in.size()) throw Error("back-translation changed sentence count");
            out.write("pseudo.L1_in.txt", corpus_text(pseudo));
            return pseudo;
        });
    }

    CorpusSet encoded;
    std::optional<Corpus> pseudo_encoded;
    run_stage(report, "bpe-apply", [&] {
        for (Slot s : kAllSlots) {
            if (!words.at(s)) continue;
            encoded.at(s) = bpe_apply(bpe, *words.at(s));
            detail::check_round_trip(*words.at(s), *encoded.at(s));
            out.write(std::string("bpe.") + slot_key(s) + ".txt", corpus_text(*encoded.at(s)));
        }
        if (pseudo_words) {
            pseudo_encoded = bpe_apply(bpe, *pseudo_words);
            detail::check_round_trip(*pseudo_words, *pseudo_encoded);
            out.write("bpe.pseudo.L1_in.txt", corpus_text(*pseudo_encoded));
        }
    });

    std::optional<Corpus> selected_encoded;
    nlohmann::json selection_summary = nullptr;
    if (plan.selection) {
        const Corpus& l2_in = *encoded.at(Slot::L2In);
        const std::size_t target = l2_in.size();

        auto [in_lm, out_lm] = run_stage(report, "train-lm", [&] {
            const std::vector<const Corpus*> in_parts{&l2_in, &*pseudo_encoded};
            NGramLM in = NGramLM::train(std::span<const Corpus* const>(in_parts), config.lm);

            std::vector<Corpus> subsamples;
            subsamples.push_back(size_matched_subsample(*encoded.at(Slot::L1Out), target, Rng::derive(config.seed, 10)));
            if (plan.scenario.label == ScenarioLabel::IOO)
                subsamples.push_back(size_matched_subsample(*encoded.at(Slot::L2Out), target, Rng::derive(config.seed, 11)));
            std::vector<const Corpus*> out_parts;
            for (const auto& c : subsamples) out_parts.push_back(&c);
            NGramLM outm = NGramLM::train(std::span<const Corpus* const>(out_parts), config.lm);
            out.write("lm.in.txt", in.serialize());
            out.write("lm.out.txt", outm.serialize());
            return std::pair{std::move(in), std::move(outm)};
        });

        const Corpus& target_words = *words.at(Slot::L1Out);
        std::vector<ScoredSentence> scored = run_stage(report, "score", [&] {
            auto s = ced_score(in_lm, out_lm, *encoded.at(Slot::L1Out));
            std::vector<ScoredSentence> printable = s;
            for (auto& p : printable) p.sentence = target_words.sentences[p.index];
            out.write("scored.tsv", scored_text(printable));
            return s;
        });

        selected_encoded = run_stage(report, "select", [&] {
            auto chosen = select_lowest_k(scored, plan.selection->k, &report.warnings);
            if (chosen.size() != std::min(plan.selection->k, scored.size()))
                throw Error("selection size does not match k");
            Corpus selected_words;
            for (const auto& s : chosen) selected_words.sentences.push_back(target_words.sentences[s.index]);
            out.write("selected.L1.txt", corpus_text(selected_words));
            out.write("selected.L1.idx", index_text(chosen));
            return selected_corpus(chosen, Language::L1, Domain::InDomain);
        });
        selection_summary = {{"scored", scored.size()},
                             {"selected", selected_encoded->size()},
                             {"out_lm_subsample_target", target}};
    }

    std::optional<std::pair<Corpus, Corpus>> finetune;
    if (plan.uses(Method::FineTuning)) {
        finetune = run_stage(report, "assemble-ft", [&] {
            auto ft = assemble_finetune_corpora(plan, encoded, selected_encoded ? &*selected_encoded : nullptr);
            if (ft.first.empty() || ft.second.empty()) throw Error("fine-tune set is empty");
            out.write("ft.L1.txt", corpus_text(ft.first));
            out.write("ft.L2.txt", corpus_text(ft.second));
            return ft;
        });
    }

    nlohmann::json streams = nlohmann::json::object();
    run_stage(report, "schedule", [&] {
        const auto pool = [&](const std::vector<Source>& sources, Domain domain) {
            std::vector<const Corpus*> parts;
            for (Source s : sources) {
                const Slot slot = s == Source::L1In ? Slot::L1In
                                  : s == Source::L2In ? Slot::L2In
                                  : s == Source::L1Out ? Slot::L1Out
                                                       : Slot::L2Out;
                parts.push_back(&*encoded.at(slot));
            }
            return concat(std::span<const Corpus* const>(parts), Language::L1, domain);
        };
        if (plan.batch_weighting) {
            const Corpus in = pool(plan.batch_weighting->in_stream, Domain::InDomain);
            const Corpus outc = pool(plan.batch_weighting->out_stream, Domain::OutOfDomain);
            const std::size_t total = config.total_batches
                                          ? config.total_batches
                                          : detail::default_total_batches(config.schedule, in.size(), outc.size());
            const auto stream = build_stream(config.schedule, in, outc, static_cast<long long>(total),
                                             Rng::derive(config.seed, 20));
            detail::check_windows(stream, config.schedule);
            out.write("stream.main.in.txt", corpus_text(in));
            out.write("stream.main.out.txt", corpus_text(outc));
            out.write("stream.main.tsv", stream_manifest(stream));
            streams["main"] = {{"n_in", config.schedule.n_in},
                               {"n_out", config.schedule.n_out},
                               {"batch_size", config.schedule.batch_size},
                               {"batches", stream.size()},
                               {"r_out", r_out(config.schedule)}};
        }
        if (finetune) {
            const std::vector<const Corpus*> parts{&finetune->first, &finetune->second};
            const Corpus ft = concat(std::span<const Corpus* const>(parts), Language::L1, Domain::InDomain);
            const BatchWeightingSchedule ft_schedule{1, 0, config.schedule.batch_size};
            const std::size_t total = detail::default_total_batches(ft_schedule, ft.size(), 0);
            const auto stream = build_stream(ft_schedule, ft, Corpus{}, static_cast<long long>(total),
                                             Rng::derive(config.seed, 21));
            out.write("stream.ft.corpus.txt", corpus_text(ft));
            out.write("stream.ft.tsv", stream_manifest(stream));
            streams["finetune"] = {{"batch_size", ft_schedule.batch_size}, {"batches", stream.size()}};
        }
    });

    run_stage(report, "report", [&] {
        out.write("plan.txt", render_plan(plan, manifest));
        out.write("plan.json", plan_json(plan, manifest).dump(2) + "\n");
        nlohmann::json corpora = nlohmann::json::object();
        for (Slot s : kAllSlots)
            if (words.at(s))
                corpora[slot_key(s)] = {{"sentences", words.at(s)->size()}, {"blank_lines", words.at(s)->blank_lines}};
        report.summary = {{"scenario", to_string(plan.scenario.label)},
                          {"flipped", plan.scenario.flipped},
                          {"corpora", corpora},
                          {"bpe_merges_learned", bpe.merges().size()},
                          {"selection", selection_summary},
                          {"streams", streams},
                          {"stages", report.stages},
                          {"warnings", report.warnings}};
        out.write("report.json", report.summary.dump(2) + "\n");
        write_file(fs::path(config.output_dir) / "hashes.tsv", out.manifest());
    });
    report.artifacts = out.hashes();
    return report;
}

}  // namespace domadapt
