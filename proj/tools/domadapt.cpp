// domadapt: command-line front-end for the domain-adaptation toolkit.
//
// Every subcommand maps to one pipeline operation; `run` executes the whole
// recipe from a JSON config. Failures print "[stage] message" to stderr and
// exit nonzero.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "domadapt/backtranslate.hpp"
#include "domadapt/bpe.hpp"
#include "domadapt/corpus.hpp"
#include "domadapt/eval.hpp"
#include "domadapt/ngram_lm.hpp"
#include "domadapt/pipeline.hpp"
#include "domadapt/planner.hpp"
#include "domadapt/scheduler.hpp"
#include "domadapt/selection.hpp"

namespace fs = std::filesystem;
using namespace domadapt;

namespace {

std::vector<Corpus> load_all(const std::vector<std::string>& paths, Language lang, Domain dom) {
    std::vector<Corpus> out;
    for (const auto& p : paths) out.push_back(load_corpus(p, lang, dom));
    return out;
}

std::vector<const Corpus*> pointers(const std::vector<Corpus>& corpora) {
    std::vector<const Corpus*> out;
    for (const auto& c : corpora) out.push_back(&c);
    return out;
}

/// One sentence per line, blank lines kept so hypotheses stay aligned with
/// references.
std::vector<Sentence> load_aligned(const std::string& path) {
    const std::string text = read_file(path);
    if (!valid_utf8(text)) throw Error(path + ": invalid UTF-8");
    std::vector<Sentence> out;
    for (auto line : split_lines(text)) out.push_back(make_sentence(std::string(line)));
    return out;
}

void print_warnings(const Warnings& w) {
    for (const auto& msg : w) std::cerr << "warning: " << msg << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus domain adaptation toolkit for unsupervised MT pipelines"};
    app.require_subcommand(1);
    std::string stage;

    // plan
    std::string plan_manifest, plan_json_out;
    std::size_t plan_k = kDeskSelectK;
    auto* plan = app.add_subcommand("plan", "Classify a corpus manifest and print the adaptation plan");
    plan->add_option("--manifest", plan_manifest, "Manifest JSON")->required();
    plan->add_option("--k", plan_k, "Pseudo in-domain selection size");
    plan->add_option("--json", plan_json_out, "Also write the machine-readable plan here");

    // bpe-train
    std::vector<std::string> bpe_inputs;
    std::size_t bpe_merges = kDefaultMerges;
    std::string bpe_model_out;
    auto* bpe_train_cmd = app.add_subcommand("bpe-train", "Learn a shared BPE model over all inputs");
    bpe_train_cmd->add_option("--input", bpe_inputs, "Corpus files (both languages)")->required();
    bpe_train_cmd->add_option("--merges", bpe_merges, "Number of merges");
    bpe_train_cmd->add_option("--out", bpe_model_out, "Model file")->required();

    // bpe-apply
    std::string apply_model, apply_in, apply_out;
    bool apply_reverse = false;
    auto* bpe_apply_cmd = app.add_subcommand("bpe-apply", "Segment a corpus (or undo segmentation)");
    bpe_apply_cmd->add_option("--model", apply_model, "Model file");
    bpe_apply_cmd->add_option("--input", apply_in, "Input corpus")->required();
    bpe_apply_cmd->add_option("--output", apply_out, "Output corpus")->required();
    bpe_apply_cmd->add_flag("--desegment", apply_reverse, "Remove segmentation instead");

    // train-lm
    std::vector<std::string> lm_inputs;
    LmOptions lm_opt;
    std::string lm_out;
    auto* train_lm_cmd = app.add_subcommand("train-lm", "Train an interpolated Lidstone n-gram model");
    train_lm_cmd->add_option("--input", lm_inputs, "Training corpora (concatenated)")->required();
    train_lm_cmd->add_option("--order", lm_opt.order, "Model order");
    train_lm_cmd->add_option("--alpha", lm_opt.alpha, "Additive smoothing constant");
    train_lm_cmd->add_option("--weights", lm_opt.weights, "Interpolation weights for orders 1..n");
    train_lm_cmd->add_flag("--unk-singletons", lm_opt.unk_singletons, "Map singleton tokens to <unk>");
    train_lm_cmd->add_option("--out", lm_out, "Model file")->required();

    // score
    std::string score_in_lm, score_out_lm, score_input, score_output;
    auto* score = app.add_subcommand("score", "Cross-entropy difference scores for a corpus");
    score->add_option("--in-lm", score_in_lm, "In-domain model")->required();
    score->add_option("--out-lm", score_out_lm, "Out-of-domain model")->required();
    score->add_option("--input", score_input, "Candidate corpus")->required();
    score->add_option("--output", score_output, "Scored TSV")->required();

    // select
    std::string select_scored, select_out, select_index;
    std::size_t select_k = kDeskSelectK;
    auto* select = app.add_subcommand("select", "Keep the k lowest-scoring sentences");
    select->add_option("--scored", select_scored, "Scored TSV")->required();
    select->add_option("--k", select_k, "Number of sentences");
    select->add_option("--output", select_out, "Selected corpus")->required();
    select->add_option("--index", select_index, "Sidecar index file (default: <output>.idx)");

    // subsample
    std::string sub_in, sub_out;
    std::size_t sub_target = 0;
    std::uint64_t sub_seed = 0;
    auto* subsample = app.add_subcommand("subsample", "Uniform order-preserving subsample");
    subsample->add_option("--input", sub_in, "Input corpus")->required();
    subsample->add_option("--target", sub_target, "Target size")->required();
    subsample->add_option("--seed", sub_seed, "Random seed");
    subsample->add_option("--output", sub_out, "Output corpus")->required();

    // backtranslate
    std::string bt_in, bt_out, bt_lexicon, bt_command;
    auto* bt = app.add_subcommand("backtranslate", "Produce pseudo in-domain L1 from L2 in-domain data");
    bt->add_option("--input", bt_in, "L2 in-domain corpus")->required();
    auto* lex_opt = bt->add_option("--lexicon", bt_lexicon, "source<TAB>target lexicon");
    auto* cmd_opt = bt->add_option("--command", bt_command, "External command with {input} and {output}");
    lex_opt->excludes(cmd_opt);
    bt->add_option("--output", bt_out, "Output corpus")->required();

    // schedule
    std::string sch_in, sch_out, sch_manifest;
    BatchWeightingSchedule sch;
    long long sch_total = 0;
    std::uint64_t sch_seed = 0;
    auto* schedule = app.add_subcommand("schedule", "Materialize a batch-weighting stream manifest");
    schedule->add_option("--in-corpus", sch_in, "In-domain corpus");
    schedule->add_option("--out-corpus", sch_out, "Out-of-domain corpus");
    schedule->add_option("--n-in", sch.n_in, "In-domain batches per cycle");
    schedule->add_option("--n-out", sch.n_out, "Out-of-domain batches per cycle");
    schedule->add_option("--batch-size", sch.batch_size, "Sentences per batch");
    schedule->add_option("--total", sch_total, "Number of batches")->required();
    schedule->add_option("--seed", sch_seed, "Random seed");
    schedule->add_option("--output", sch_manifest, "Stream manifest")->required();

    // assemble-ft
    std::string ft_manifest, ft_selected, ft_l1, ft_l2;
    auto* assemble = app.add_subcommand("assemble-ft", "Assemble the fine-tuning corpora for a manifest");
    assemble->add_option("--manifest", ft_manifest, "Manifest JSON")->required();
    assemble->add_option("--selected", ft_selected, "Selected pseudo in-domain L1 corpus (IOO/IO)");
    assemble->add_option("--out-l1", ft_l1, "L1 fine-tune corpus")->required();
    assemble->add_option("--out-l2", ft_l2, "L2 fine-tune corpus")->required();

    // bleu
    std::string bleu_hyp, bleu_ref;
    bool bleu_deseg = false;
    auto* bleu = app.add_subcommand("bleu", "Case-sensitive corpus BLEU-4");
    bleu->add_option("--hyp", bleu_hyp, "Hypotheses")->required();
    bleu->add_option("--ref", bleu_ref, "References")->required();
    bleu->add_flag("--desegment", bleu_deseg, "Undo BPE segmentation of the hypotheses first");

    // curve
    std::string curve_dir, curve_run, curve_metric;
    long long curve_step = 0;
    double curve_value = 0;
    auto* curve = app.add_subcommand("curve", "Append a learning-curve record");
    curve->add_option("--dir", curve_dir, "Curve directory")->required();
    curve->add_option("--run", curve_run, "Run id")->required();
    curve->add_option("--step", curve_step, "Step")->required();
    curve->add_option("--metric", curve_metric, "Metric name")->required();
    curve->add_option("--value", curve_value, "Metric value")->required();

    // run
    std::string run_config;
    auto* run = app.add_subcommand("run", "Run the full pipeline from a JSON config");
    run->add_option("--config", run_config, "Pipeline config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan) {
            stage = "plan";
            const auto manifest = CorpusManifest::load(plan_manifest);
            const auto p = plan_methods(classify_scenario(manifest), plan_k);
            std::cout << render_plan(p, manifest);
            if (!plan_json_out.empty()) write_file(plan_json_out, plan_json(p, manifest).dump(2) + "\n");
        } else if (*bpe_train_cmd) {
            stage = "bpe-train";
            const auto corpora = load_all(bpe_inputs, Language::L1, Domain::InDomain);
            const auto ptrs = pointers(corpora);
            const auto model = bpe_train(std::span<const Corpus* const>(ptrs), bpe_merges);
            model.save(bpe_model_out);
            std::cerr << "learned " << model.merges().size() << " merges, vocab " << model.vocab().size() << '\n';
        } else if (*bpe_apply_cmd) {
            stage = "bpe-apply";
            const auto corpus = load_corpus(apply_in, Language::L1, Domain::InDomain);
            Corpus out = corpus;
            if (apply_reverse) {
                for (auto& s : out.sentences) s = desegment(s);
            } else {
                if (apply_model.empty()) throw Error("--model is required unless --desegment is given");
                out = bpe_apply(BpeModel::load(apply_model), corpus);
            }
            write_corpus(out, apply_out);
        } else if (*train_lm_cmd) {
            stage = "train-lm";
            const auto corpora = load_all(lm_inputs, Language::L1, Domain::InDomain);
            const auto ptrs = pointers(corpora);
            NGramLM::train(std::span<const Corpus* const>(ptrs), lm_opt).save(lm_out);
        } else if (*score) {
            stage = "score";
            const auto in_lm = NGramLM::load(score_in_lm);
            const auto out_lm = NGramLM::load(score_out_lm);
            const auto corpus = load_corpus(score_input, Language::L1, Domain::OutOfDomain);
            write_file(score_output, scored_text(ced_score(in_lm, out_lm, corpus)));
        } else if (*select) {
            stage = "select";
            const auto scored = parse_scored(read_file(select_scored));
            Warnings warnings;
            const auto chosen = select_lowest_k(scored, select_k, &warnings);
            print_warnings(warnings);
            write_corpus(selected_corpus(chosen, Language::L1, Domain::InDomain), select_out);
            write_file(select_index.empty() ? select_out + ".idx" : select_index, index_text(chosen));
        } else if (*subsample) {
            stage = "subsample";
            const auto corpus = load_corpus(sub_in, Language::L1, Domain::OutOfDomain);
            write_corpus(size_matched_subsample(corpus, sub_target, sub_seed), sub_out);
        } else if (*bt) {
            stage = "backtranslate";
            TranslatorSpec spec;
            if (!bt_command.empty()) {
                spec.kind = TranslatorKind::External;
                spec.command_template = bt_command;
            } else {
                if (bt_lexicon.empty()) throw Error("one of --lexicon or --command is required");
                spec.lexicon_path = bt_lexicon;
            }
            write_corpus(back_translate(load_corpus(bt_in, Language::L2, Domain::InDomain), spec), bt_out);
        } else if (*schedule) {
            stage = "schedule";
            const Corpus in = sch_in.empty() ? Corpus{} : load_corpus(sch_in, Language::L1, Domain::InDomain);
            const Corpus outc = sch_out.empty() ? Corpus{} : load_corpus(sch_out, Language::L1, Domain::OutOfDomain);
            const auto stream = build_stream(sch, in, outc, sch_total, sch_seed);
            write_file(sch_manifest, stream_manifest(stream));
            std::cerr << "r_out = " << r_out(sch) << '\n';
        } else if (*assemble) {
            stage = "assemble-ft";
            const auto manifest = CorpusManifest::load(ft_manifest);
            const auto p = plan_methods(classify_scenario(manifest));
            const auto corpora = CorpusSet::load(manifest, p.scenario);
            std::optional<Corpus> selected;
            if (!ft_selected.empty()) selected = load_corpus(ft_selected, Language::L1, Domain::InDomain);
            const auto [l1, l2] = assemble_finetune_corpora(p, corpora, selected ? &*selected : nullptr);
            write_corpus(l1, ft_l1);
            write_corpus(l2, ft_l2);
        } else if (*bleu) {
            stage = "bleu";
            auto hyp = load_aligned(bleu_hyp);
            const auto ref = load_aligned(bleu_ref);
            if (bleu_deseg)
                for (auto& s : hyp) s = desegment(s);
            std::cout << corpus_bleu(hyp, ref).summary() << '\n';
        } else if (*curve) {
            stage = "curve";
            log_curve(curve_dir, curve_run, curve_step, curve_metric, curve_value);
        } else if (*run) {
            stage = "run";
            const auto config = PipelineConfig::load(run_config);
            const auto report = run_pipeline(config);
            print_warnings(report.warnings);
            std::cout << render_plan(report.plan, CorpusManifest::load(config.manifest));
            std::cout << "artifacts: " << report.artifacts.size() << " written to " << config.output_dir.string() << '\n';
        }
    } catch (const StageError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "[" << stage << "] " << e.what() << '\n';
        return 1;
    }
    return 0;
}
