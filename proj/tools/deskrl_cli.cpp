// deskrl command line: train / grade / curate / analyze / correlate / plot.
// Exit codes: 0 ok, 1 usage error, 2 runtime error.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include "deskrl/behavior.hpp"
#include "deskrl/config.hpp"
#include "deskrl/curation.hpp"
#include "deskrl/errors.hpp"
#include "deskrl/metrics.hpp"
#include "deskrl/policy.hpp"
#include "deskrl/runner.hpp"
#include "deskrl/taskgen.hpp"
#include "deskrl/verifier.hpp"

namespace {

using namespace deskrl;

struct TrainCli {
    std::string config_path;
    std::string corpus_path;
    std::string out_dir = "run";
    // overrides; only applied when the flag was passed
    std::int64_t iterations = 0;
    std::uint64_t seed = 0;
    double lr_scale = 0.0;
    double critic_lr_scale = 0.0;
    std::int64_t prompts = 0;
    std::int64_t responses = 0;
    std::vector<std::string> families;
    std::int64_t difficulty = 0;
    std::int64_t threads = 0;
    bool no_wall_time = false;
};

int run_train(const TrainCli& opts, const CLI::App& sub) {
    RunConfig cfg = opts.config_path.empty() ? default_run_config()
                                             : load_config_file(opts.config_path);
    if (sub.count("--iterations")) cfg.iterations = opts.iterations;
    if (sub.count("--seed")) cfg.train.seed = opts.seed;
    if (sub.count("--lr-scale")) cfg.train.lr_scale = opts.lr_scale;
    if (sub.count("--critic-lr-scale")) cfg.train.critic_lr_scale = opts.critic_lr_scale;
    if (sub.count("--prompts")) cfg.train.prompts_per_iter = opts.prompts;
    if (sub.count("--responses")) cfg.train.responses_per_prompt = opts.responses;
    if (sub.count("--family")) cfg.families = opts.families;
    if (sub.count("--difficulty")) cfg.difficulty = opts.difficulty;
    if (sub.count("--threads")) cfg.threads = opts.threads;
    if (opts.no_wall_time) cfg.record_wall_time = false;
    cfg.validate();

    std::optional<std::vector<taskgen::TaskInstance>> corpus;
    if (!opts.corpus_path.empty())
        corpus = taskgen::import_tasks(opts.corpus_path, Vocabulary::standard());

    const auto result = runner::train(cfg, corpus, opts.out_dir);
    std::cout << "metrics: " << result.metrics_path.string() << "\n"
              << "final checkpoint: " << result.final_checkpoint_path.string() << "\n"
              << "averaged checkpoint (" << result.snapshots_averaged << " snapshots): "
              << result.averaged_checkpoint_path.string() << "\n"
              << "final mean reward: " << result.final_mean_reward << "\n";
    return 0;
}

int run_grade(const std::string& reference, const std::string& file) {
    std::ifstream fin;
    std::istream* in = &std::cin;
    if (!file.empty()) {
        fin.open(file);
        if (!fin) throw config_error("grade: cannot open " + file);
        in = &fin;
    }
    std::string line;
    while (std::getline(*in, line)) {
        const auto verdict = verifier::grade(line, reference);
        std::cout << verdict.to_json_line() << "\n";
    }
    return 0;
}

struct CurateCli {
    std::string in_path, out_path, report_path;
    double loss_quantile = 0.0;
    bool pattern_default = false;
    std::vector<std::string> patterns;
    bool difficulty = false;
    double difficulty_lo = 0.0;
    double difficulty_hi = 1.0;
    std::string reweight_targets; // JSON file {category: target}
    std::string annotate_checkpoint;
    std::int64_t pass_rate_k = 16;
    std::int64_t pass_rate_max_len = 32;
    std::uint64_t seed = 0;
    bool annotate_proxy_loss = false;
};

int run_curate(const CurateCli& opts, const CLI::App& sub) {
    auto corpus = curation::load_corpus(opts.in_path);
    curation::CurationReport report;

    // Optional annotators run first so filters can rely on the columns.
    if (!opts.annotate_checkpoint.empty()) {
        const Vocabulary& vocab = Vocabulary::standard();
        const auto snap = policy::load_checkpoint(opts.annotate_checkpoint, vocab);
        const Rng rng = seeded_rng(opts.seed, "curate.pass_rate");
        std::size_t idx = 0;
        for (auto& sample : corpus) {
            taskgen::TaskInstance task;
            task.task_id = sample.sample_id;
            task.prompt_tokens = vocab.tokenize_prompt(sample.prompt_text);
            if (task.prompt_tokens.empty() || !(task.prompt_tokens.back() == vocab.query()))
                task.prompt_tokens.push_back(vocab.query());
            task.reference_answer = sample.reference_answer;
            if (opts.annotate_proxy_loss)
                sample.proxy_loss = taskgen::reference_nll(snap.params, vocab, task);
            if (sub.count("--pass-rate-k") || !sample.pass_rate)
                sample.pass_rate = taskgen::pass_rate(snap, vocab, task, opts.pass_rate_k,
                                                      opts.pass_rate_max_len, rng.child(idx));
            ++idx;
        }
    }

    if (sub.count("--loss-quantile")) {
        curation::StageCounts counts;
        corpus = curation::loss_filter(corpus, opts.loss_quantile, &counts);
        report.stages.push_back(counts);
    }
    if (opts.pattern_default || !opts.patterns.empty()) {
        std::vector<std::string> rules;
        if (opts.pattern_default) rules = curation::default_pattern_rules();
        rules.insert(rules.end(), opts.patterns.begin(), opts.patterns.end());
        curation::StageCounts counts;
        corpus = curation::pattern_filter(corpus, rules, &counts);
        report.stages.push_back(counts);
    }
    if (opts.difficulty || sub.count("--difficulty-lo") || sub.count("--difficulty-hi")) {
        curation::StageCounts counts;
        corpus = curation::difficulty_filter(corpus, opts.difficulty_lo, opts.difficulty_hi, &counts);
        report.stages.push_back(counts);
    }
    if (!opts.reweight_targets.empty()) {
        std::ifstream in(opts.reweight_targets);
        if (!in) throw config_error("curate: cannot open " + opts.reweight_targets);
        nlohmann::json j;
        in >> j;
        std::map<std::string, double> targets;
        for (const auto& [cat, t] : j.items()) targets[cat] = t.get<double>();
        const auto weights = curation::reweight(corpus, targets);
        for (const auto& sample : corpus)
            report.category_weights_example[sample.category] = weights.at(sample.sample_id);
    }

    if (!opts.out_path.empty()) curation::save_corpus(corpus, opts.out_path);
    const std::string report_json = report.to_json();
    if (!opts.report_path.empty()) {
        std::ofstream out(opts.report_path, std::ios::binary);
        if (!out) throw config_error("curate: cannot write " + opts.report_path);
        out << report_json;
    } else {
        std::cout << report_json;
    }
    return 0;
}

int run_analyze(const std::string& traces_path, const std::string& labels_path,
                const std::string& lexicon_path, const std::string& out_path, bool table) {
    const auto traces = behavior::load_traces(traces_path);
    const auto lexicon = lexicon_path.empty() ? behavior::Lexicon::defaults()
                                              : behavior::Lexicon::load(lexicon_path);
    std::vector<behavior::JudgeLabel> labels;
    if (!labels_path.empty())
        labels = behavior::ingest_judge_labels(labels_path, traces);
    const auto rep = behavior::report(traces, lexicon, labels);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw config_error("analyze: cannot write " + out_path);
        out << rep.to_json();
    }
    if (table || out_path.empty()) std::cout << rep.to_table();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    spdlog::cfg::load_env_levels(); // SPDLOG_LEVEL=debug|info|warn|error|off
    CLI::App app{"deskrl: desk-scale RL training engine with verifiable rewards"};
    app.require_subcommand(1);

    TrainCli train_opts;
    auto* train_cmd = app.add_subcommand("train", "run the training loop");
    train_cmd->add_option("--config", train_opts.config_path, "JSON config file");
    train_cmd->add_option("--corpus", train_opts.corpus_path, "task corpus JSONL");
    train_cmd->add_option("--out-dir", train_opts.out_dir, "output directory");
    train_cmd->add_option("--iterations", train_opts.iterations, "override iterations");
    train_cmd->add_option("--seed", train_opts.seed, "override seed");
    train_cmd->add_option("--lr-scale", train_opts.lr_scale, "override lr_scale");
    train_cmd->add_option("--critic-lr-scale", train_opts.critic_lr_scale,
                          "override critic_lr_scale");
    train_cmd->add_option("--prompts", train_opts.prompts, "prompts per iteration");
    train_cmd->add_option("--responses", train_opts.responses, "responses per prompt");
    train_cmd->add_option("--family", train_opts.families, "task families");
    train_cmd->add_option("--difficulty", train_opts.difficulty, "task difficulty");
    train_cmd->add_option("--threads", train_opts.threads, "rollout worker threads");
    train_cmd->add_flag("--no-wall-time", train_opts.no_wall_time,
                        "write wall_ms as 0 for byte-reproducible metrics");

    std::string grade_ref, grade_file;
    auto* grade_cmd = app.add_subcommand("grade", "grade responses against a reference answer");
    grade_cmd->add_option("--ref", grade_ref, "reference answer")->required();
    grade_cmd->add_option("--file", grade_file, "responses file (one per line); default stdin");

    CurateCli curate_opts;
    auto* curate_cmd = app.add_subcommand("curate", "filter and reweight a prompt-answer corpus");
    curate_cmd->add_option("--in", curate_opts.in_path, "input corpus JSONL")->required();
    curate_cmd->add_option("--out", curate_opts.out_path, "kept corpus JSONL");
    curate_cmd->add_option("--report", curate_opts.report_path, "stage report JSON");
    curate_cmd->add_option("--loss-quantile", curate_opts.loss_quantile,
                           "drop samples above this proxy-loss quantile");
    curate_cmd->add_flag("--pattern-default", curate_opts.pattern_default,
                         "apply the default proof-style pattern rules");
    curate_cmd->add_option("--pattern", curate_opts.patterns, "extra removal regex");
    curate_cmd->add_flag("--difficulty", curate_opts.difficulty,
                         "drop pass-rate 0 and pass-rate 1 samples");
    curate_cmd->add_option("--difficulty-lo", curate_opts.difficulty_lo, "pass-rate lower bound");
    curate_cmd->add_option("--difficulty-hi", curate_opts.difficulty_hi, "pass-rate upper bound");
    curate_cmd->add_option("--reweight", curate_opts.reweight_targets,
                           "JSON file of category targets");
    curate_cmd->add_option("--annotate-checkpoint", curate_opts.annotate_checkpoint,
                           "checkpoint used to compute pass_rate/proxy_loss columns");
    curate_cmd->add_option("--pass-rate-k", curate_opts.pass_rate_k, "samples per task");
    curate_cmd->add_option("--pass-rate-max-len", curate_opts.pass_rate_max_len,
                           "max response length for pass-rate sampling");
    curate_cmd->add_option("--seed", curate_opts.seed, "annotation seed");
    curate_cmd->add_flag("--annotate-proxy-loss", curate_opts.annotate_proxy_loss,
                         "fill proxy_loss with the reference NLL under the checkpoint");

    std::string an_traces, an_labels, an_lexicon, an_out;
    bool an_table = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "behavior report over a trace corpus");
    analyze_cmd->add_option("--traces", an_traces, "trace corpus JSONL")->required();
    analyze_cmd->add_option("--labels", an_labels, "judge labels JSONL");
    analyze_cmd->add_option("--lexicon", an_lexicon, "lexicon JSON (default built-in)");
    analyze_cmd->add_option("--out", an_out, "report JSON path");
    analyze_cmd->add_flag("--table", an_table, "print the plain-text table");

    std::string corr_metrics;
    auto* corr_cmd = app.add_subcommand("correlate", "reward/length Pearson correlation");
    corr_cmd->add_option("--metrics", corr_metrics, "metrics JSONL")->required();

    std::string plot_metrics, plot_out = "training.svg";
    auto* plot_cmd = app.add_subcommand("plot", "render reward/length curves as SVG");
    plot_cmd->add_option("--metrics", plot_metrics, "metrics JSONL")->required();
    plot_cmd->add_option("--out", plot_out, "output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    try {
        if (*train_cmd) return run_train(train_opts, *train_cmd);
        if (*grade_cmd) return run_grade(grade_ref, grade_file);
        if (*curate_cmd) return run_curate(curate_opts, *curate_cmd);
        if (*analyze_cmd) return run_analyze(an_traces, an_labels, an_lexicon, an_out, an_table);
        if (*corr_cmd) {
            std::cout << metrics::correlate(corr_metrics) << "\n";
            return 0;
        }
        if (*plot_cmd) {
            runner::plot(plot_metrics, plot_out);
            std::cout << "wrote " << plot_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
