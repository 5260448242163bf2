#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"

namespace domadapt {

/// The four monolingual corpus slots.
enum class Slot { L1In = 0, L2In = 1, L1Out = 2, L2Out = 3 };

inline constexpr std::array<Slot, 4> kAllSlots{Slot::L1In, Slot::L2In, Slot::L1Out, Slot::L2Out};

inline Language slot_language(Slot s) { return s == Slot::L1In || s == Slot::L1Out ? Language::L1 : Language::L2; }
inline Domain slot_domain(Slot s) { return s == Slot::L1In || s == Slot::L2In ? Domain::InDomain : Domain::OutOfDomain; }

inline const char* slot_key(Slot s) {
    switch (s) {
        case Slot::L1In: return "L1_in";
        case Slot::L2In: return "L2_in";
        case Slot::L1Out: return "L1_out";
        case Slot::L2Out: return "L2_out";
    }
    return "?";
}

inline Slot swap_languages(Slot s) {
    switch (s) {
        case Slot::L1In: return Slot::L2In;
        case Slot::L2In: return Slot::L1In;
        case Slot::L1Out: return Slot::L2Out;
        case Slot::L2Out: return Slot::L1Out;
    }
    return s;
}

struct CorpusManifest {
    std::string l1_name = "L1";
    std::string l2_name = "L2";
    std::array<std::optional<std::filesystem::path>, 4> paths;

    bool has(Slot s) const { return paths[static_cast<std::size_t>(s)].has_value(); }
    const std::optional<std::filesystem::path>& path(Slot s) const { return paths[static_cast<std::size_t>(s)]; }
    void set(Slot s, std::filesystem::path p) { paths[static_cast<std::size_t>(s)] = std::move(p); }

    static CorpusManifest availability(bool l1_in, bool l2_in, bool l1_out, bool l2_out) {
        CorpusManifest m;
        if (l1_in) m.set(Slot::L1In, "L1_in.txt");
        if (l2_in) m.set(Slot::L2In, "L2_in.txt");
        if (l1_out) m.set(Slot::L1Out, "L1_out.txt");
        if (l2_out) m.set(Slot::L2Out, "L2_out.txt");
        return m;
    }

    /// JSON document:
    ///   {"languages": {"L1": name, "L2": name},
    ///    "corpora": {"L1_in": path, "L2_in": ..., "L1_out": ..., "L2_out": ...}}
    /// Absent or null corpus entries mean the corpus is unavailable.
    /// Relative paths resolve against `base_dir`.
    static CorpusManifest from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
        CorpusManifest m;
        try {
            if (doc.contains("languages")) {
                const auto& langs = doc.at("languages");
                m.l1_name = langs.value("L1", m.l1_name);
                m.l2_name = langs.value("L2", m.l2_name);
            }
            if (!doc.contains("corpora")) throw Error("manifest: missing 'corpora'");
            const auto& corpora = doc.at("corpora");
            for (auto it = corpora.begin(); it != corpora.end(); ++it) {
                bool known = false;
                for (Slot s : kAllSlots) known = known || it.key() == slot_key(s);
                if (!known) throw Error("manifest: unknown corpus slot '" + it.key() + "'");
            }
            for (Slot s : kAllSlots) {
                if (!corpora.contains(slot_key(s)) || corpora.at(slot_key(s)).is_null()) continue;
                std::filesystem::path p = corpora.at(slot_key(s)).get<std::string>();
                m.set(s, p.is_absolute() ? p : base_dir / p);
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(std::string("manifest: ") + e.what());
        }
        return m;
    }

    static CorpusManifest load(const std::filesystem::path& path) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw Error("manifest '" + path.string() + "': " + e.what());
        }
        return from_json(doc, path.parent_path());
    }
};

enum class ScenarioLabel { II, OO, IIOO, IOO, IIO, IO };

inline const char* to_string(ScenarioLabel l) {
    switch (l) {
        case ScenarioLabel::II: return "II";
        case ScenarioLabel::OO: return "OO";
        case ScenarioLabel::IIOO: return "IIOO";
        case ScenarioLabel::IOO: return "IOO";
        case ScenarioLabel::IIO: return "IIO";
        case ScenarioLabel::IO: return "IO";
    }
    return "?";
}

/// Canonical orientation puts the in-domain-bearing language at L2 for
/// IOO/IO and the language without out-of-domain data at L2 for IIO.
/// Flipped means the user's L1 and L2 play the swapped roles.
struct Scenario {
    ScenarioLabel label = ScenarioLabel::II;
    bool flipped = false;

    /// The user's slot that fills a canonical role.
    Slot user_slot(Slot canonical) const { return flipped ? swap_languages(canonical) : canonical; }

    bool operator==(const Scenario&) const = default;
};

inline Scenario classify_scenario(const CorpusManifest& m) {
    const bool l1_in = m.has(Slot::L1In), l2_in = m.has(Slot::L2In);
    const bool l1_out = m.has(Slot::L1Out), l2_out = m.has(Slot::L2Out);
    if (!l1_in && !l1_out) throw Error("classify: untrainable manifest, no corpus for L1 (" + m.l1_name + ")");
    if (!l2_in && !l2_out) throw Error("classify: untrainable manifest, no corpus for L2 (" + m.l2_name + ")");

    const unsigned bits = (l1_in ? 8u : 0u) | (l2_in ? 4u : 0u) | (l1_out ? 2u : 0u) | (l2_out ? 1u : 0u);
    switch (bits) {
        case 0b1100: return {ScenarioLabel::II, false};
        case 0b0011: return {ScenarioLabel::OO, false};
        case 0b1111: return {ScenarioLabel::IIOO, false};
        case 0b0111: return {ScenarioLabel::IOO, false};
        case 0b1011: return {ScenarioLabel::IOO, true};
        case 0b1110: return {ScenarioLabel::IIO, false};
        case 0b1101: return {ScenarioLabel::IIO, true};
        case 0b0110: return {ScenarioLabel::IO, false};
        case 0b1001: return {ScenarioLabel::IO, true};
        default: break;
    }
    throw Error("classify: availability pattern is not a known scenario");
}

enum class Method { BatchWeighting, FineTuning };

inline const char* to_string(Method m) { return m == Method::BatchWeighting ? "BatchWeighting" : "FineTuning"; }

/// Where a corpus in a recipe comes from, in canonical language roles.
enum class Source {
    L1In,
    L2In,
    L1Out,
    L2Out,
    PseudoL1In,      // back-translated from L2 in-domain
    L1OutSubsample,  // size-matched to L2 in-domain
    L2OutSubsample,
    SelectedL1,      // lowest-CED L1 out-of-domain sentences
};

inline const char* to_string(Source s) {
    switch (s) {
        case Source::L1In: return "L1_in";
        case Source::L2In: return "L2_in";
        case Source::L1Out: return "L1_out";
        case Source::L2Out: return "L2_out";
        case Source::PseudoL1In: return "pseudo_L1_in";
        case Source::L1OutSubsample: return "L1_out_subsample";
        case Source::L2OutSubsample: return "L2_out_subsample";
        case Source::SelectedL1: return "selected_L1";
    }
    return "?";
}

struct FinetuneRecipe {
    Source l1;
    Source l2;
};

struct SelectionRecipe {
    std::vector<Source> in_lm;
    std::vector<Source> out_lm;
    Source target = Source::L1Out;
    std::size_t k = 0;
};

struct BatchWeightingRecipe {
    std::vector<Source> in_stream;
    std::vector<Source> out_stream;
};

struct AdaptationPlan {
    Scenario scenario;
    std::vector<Method> methods;
    std::optional<FinetuneRecipe> finetune;
    std::optional<SelectionRecipe> selection;
    std::optional<BatchWeightingRecipe> batch_weighting;

    bool uses(Method m) const {
        for (Method x : methods)
            if (x == m) return true;
        return false;
    }
};

inline constexpr std::size_t kDefaultSelectK = 20000;

/// Method suitability per scenario. II and OO are baselines and get no
/// methods.
inline AdaptationPlan plan_methods(const Scenario& scenario, std::size_t k = kDefaultSelectK) {
    AdaptationPlan plan;
    plan.scenario = scenario;
    switch (scenario.label) {
        case ScenarioLabel::II:
        case ScenarioLabel::OO:
            return plan;
        case ScenarioLabel::IIOO:
            plan.methods = {Method::FineTuning};
            plan.finetune = FinetuneRecipe{Source::L1In, Source::L2In};
            return plan;
        case ScenarioLabel::IOO:
            plan.methods = {Method::FineTuning};
            plan.finetune = FinetuneRecipe{Source::SelectedL1, Source::L2In};
            plan.selection = SelectionRecipe{{Source::L2In, Source::PseudoL1In},
                                             {Source::L1OutSubsample, Source::L2OutSubsample},
                                             Source::L1Out,
                                             k};
            return plan;
        case ScenarioLabel::IIO:
            plan.methods = {Method::BatchWeighting, Method::FineTuning};
            plan.finetune = FinetuneRecipe{Source::L1In, Source::L2In};
            plan.batch_weighting = BatchWeightingRecipe{{Source::L2In}, {Source::L1In, Source::L1Out}};
            return plan;
        case ScenarioLabel::IO:
            plan.methods = {Method::BatchWeighting, Method::FineTuning};
            plan.finetune = FinetuneRecipe{Source::SelectedL1, Source::L2In};
            plan.selection = SelectionRecipe{{Source::L2In, Source::PseudoL1In}, {Source::L1OutSubsample}, Source::L1Out, k};
            plan.batch_weighting = BatchWeightingRecipe{{Source::L2In}, {Source::L1Out}};
            return plan;
    }
    return plan;
}

/// Loaded corpora indexed by canonical slot.
struct CorpusSet {
    std::array<std::optional<Corpus>, 4> slots;

    const std::optional<Corpus>& at(Slot s) const { return slots[static_cast<std::size_t>(s)]; }
    std::optional<Corpus>& at(Slot s) { return slots[static_cast<std::size_t>(s)]; }

    /// Loads every available corpus, relabelled to canonical roles.
    static CorpusSet load(const CorpusManifest& manifest, const Scenario& scenario) {
        CorpusSet set;
        for (Slot canonical : kAllSlots) {
            const auto& p = manifest.path(scenario.user_slot(canonical));
            if (p) set.at(canonical) = load_corpus(*p, slot_language(canonical), slot_domain(canonical));
        }
        return set;
    }
};

/// Fine-tuning sets (L1, L2): genuine in-domain corpora for IIOO/IIO,
/// (selected pseudo in-domain L1, L2 in-domain) for IOO/IO.
inline std::pair<Corpus, Corpus> assemble_finetune_corpora(const AdaptationPlan& plan, const CorpusSet& corpora,
                                                           const Corpus* selected) {
    if (!plan.uses(Method::FineTuning) || !plan.finetune)
        throw Error("assemble_finetune: plan for " + std::string(to_string(plan.scenario.label)) +
                    " does not include fine tuning");
    const auto fetch = [&](Source src) -> Corpus {
        switch (src) {
            case Source::SelectedL1:
                if (!selected) throw Error("assemble_finetune: selected pseudo in-domain corpus is required");
                return *selected;
            case Source::L1In:
            case Source::L2In: {
                const Slot slot = src == Source::L1In ? Slot::L1In : Slot::L2In;
                if (!corpora.at(slot)) throw Error(std::string("assemble_finetune: missing corpus ") + slot_key(slot));
                return *corpora.at(slot);
            }
            default:
                throw Error(std::string("assemble_finetune: unsupported source ") + to_string(src));
        }
    };
    Corpus l1 = fetch(plan.finetune->l1);
    Corpus l2 = fetch(plan.finetune->l2);
    l1.language = Language::L1;
    l1.domain = Domain::InDomain;
    l2.language = Language::L2;
    l2.domain = Domain::InDomain;
    return {std::move(l1), std::move(l2)};
}

/// Renders a canonical source with the user's language names.
inline std::string describe(Source s, const Scenario& scenario, const CorpusManifest& m) {
    const std::string& canon_l1 = scenario.flipped ? m.l2_name : m.l1_name;
    const std::string& canon_l2 = scenario.flipped ? m.l1_name : m.l2_name;
    switch (s) {
        case Source::L1In: return canon_l1 + " in-domain";
        case Source::L2In: return canon_l2 + " in-domain";
        case Source::L1Out: return canon_l1 + " out-of-domain";
        case Source::L2Out: return canon_l2 + " out-of-domain";
        case Source::PseudoL1In: return "pseudo " + canon_l1 + " in-domain (back-translated from " + canon_l2 + ")";
        case Source::L1OutSubsample: return canon_l1 + " out-of-domain, size-matched subsample";
        case Source::L2OutSubsample: return canon_l2 + " out-of-domain, size-matched subsample";
        case Source::SelectedL1: return "selected pseudo " + canon_l1 + " in-domain";
    }
    return "?";
}

inline std::string render_plan(const AdaptationPlan& plan, const CorpusManifest& m) {
    std::ostringstream out;
    const auto list = [&](const std::vector<Source>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " + " : "") + describe(v[i], plan.scenario, m);
        return s;
    };
    out << "scenario: " << to_string(plan.scenario.label);
    if (plan.scenario.flipped) out << " (orientation flipped: " << m.l2_name << " plays L1, " << m.l1_name << " plays L2)";
    out << '\n';
    out << "languages: L1=" << m.l1_name << " L2=" << m.l2_name << '\n';
    out << "methods:";
    if (plan.methods.empty()) out << " none (baseline)";
    for (Method x : plan.methods) out << ' ' << to_string(x);
    out << '\n';
    if (plan.batch_weighting) {
        out << "batch weighting in-stream: " << list(plan.batch_weighting->in_stream) << '\n';
        out << "batch weighting out-stream: " << list(plan.batch_weighting->out_stream) << '\n';
    }
    if (plan.selection) {
        out << "selection in-domain LM: " << list(plan.selection->in_lm) << '\n';
        out << "selection out-of-domain LM: " << list(plan.selection->out_lm) << '\n';
        out << "selection target: " << describe(plan.selection->target, plan.scenario, m) << ", k=" << plan.selection->k
            << '\n';
    }
    if (plan.finetune) {
        out << "fine-tune L1 set: " << describe(plan.finetune->l1, plan.scenario, m) << '\n';
        out << "fine-tune L2 set: " << describe(plan.finetune->l2, plan.scenario, m) << '\n';
    }
    return out.str();
}

inline nlohmann::json plan_json(const AdaptationPlan& plan, const CorpusManifest& m) {
    using nlohmann::json;
    const auto sources = [](const std::vector<Source>& v) {
        json a = json::array();
        for (Source s : v) a.push_back(to_string(s));
        return a;
    };
    const std::string& canon_l1 = plan.scenario.flipped ? m.l2_name : m.l1_name;
    const std::string& canon_l2 = plan.scenario.flipped ? m.l1_name : m.l2_name;
    json doc;
    doc["scenario"] = to_string(plan.scenario.label);
    doc["flipped"] = plan.scenario.flipped;
    doc["canonical_languages"] = {{"L1", canon_l1}, {"L2", canon_l2}};
    doc["methods"] = json::array();
    for (Method x : plan.methods) doc["methods"].push_back(to_string(x));
    doc["batch_weighting"] = nullptr;
    doc["selection"] = nullptr;
    doc["finetune"] = nullptr;
    if (plan.batch_weighting)
        doc["batch_weighting"] = {{"in_stream", sources(plan.batch_weighting->in_stream)},
                                  {"out_stream", sources(plan.batch_weighting->out_stream)}};
    if (plan.selection)
        doc["selection"] = {{"in_lm", sources(plan.selection->in_lm)},
                            {"out_lm", sources(plan.selection->out_lm)},
                            {"target", to_string(plan.selection->target)},
                            {"k", plan.selection->k}};
    if (plan.finetune) doc["finetune"] = {{"L1", to_string(plan.finetune->l1)}, {"L2", to_string(plan.finetune->l2)}};
    return doc;
}

}  // namespace domadapt
