#include "deskrl/runner.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "deskrl/errors.hpp"
#include "deskrl/ppo.hpp"

namespace deskrl::runner {

namespace {

std::vector<taskgen::Family> parse_families(const std::vector<std::string>& names) {
    std::vector<taskgen::Family> out;
    for (const auto& name : names) {
        const auto fam = taskgen::parse_family(name);
        if (!fam || *fam == taskgen::Family::EXTERNAL)
            throw config_error("train: unknown task family '" + name + "'");
        out.push_back(*fam);
    }
    return out;
}

// Snapshot subset for the released average: explicit iteration list if
// configured, else all periodic snapshots or their last quartile.
std::vector<policy::PolicySnapshot> select_for_average(
    const std::vector<std::pair<std::int64_t, policy::PolicySnapshot>>& saved,
    const RunConfig& cfg) {
    std::vector<policy::PolicySnapshot> picked;
    if (!cfg.average_iterations.empty()) {
        for (std::int64_t want : cfg.average_iterations) {
            bool found = false;
            for (const auto& [iter, snap] : saved)
                if (iter == want) { picked.push_back(snap); found = true; break; }
            if (!found)
                throw config_error("train: average_iterations entry " + std::to_string(want) +
                                   " has no saved snapshot");
        }
        return picked;
    }
    if (cfg.average_mode == "last_quartile") {
        const double cutoff = 0.75 * static_cast<double>(cfg.iterations);
        for (const auto& [iter, snap] : saved)
            if (static_cast<double>(iter) > cutoff) picked.push_back(snap);
        if (!picked.empty()) return picked;
        // fall through to "all" when the quartile is empty
    }
    for (const auto& [_, snap] : saved) picked.push_back(snap);
    return picked;
}

} // namespace

TrainResult train(const RunConfig& cfg,
                  const std::optional<std::vector<taskgen::TaskInstance>>& corpus,
                  const std::filesystem::path& out_dir) {
    cfg.validate();
    if (corpus && corpus->empty()) throw config_error("train: external corpus is empty");
    std::filesystem::create_directories(out_dir);

    const Vocabulary& vocab = Vocabulary::standard();
    const auto families = parse_families(cfg.families);

    Rng init_rng = seeded_rng(cfg.train.seed, "init");
    policy::PolicyParams params = policy::init_params(vocab, cfg.feature_dim, init_rng);

    auto policy_opt = ppo::OptimizerState::for_params(
        params.policy_weights.size(), cfg.train.effective_policy_lr(),
        cfg.train.warmup_steps, cfg.train.beta1, cfg.train.beta2);
    auto critic_opt = ppo::OptimizerState::for_params(
        params.critic_weights.size(), cfg.train.effective_critic_lr(),
        cfg.train.warmup_steps, cfg.train.beta1, cfg.train.beta2);

    Rng task_rng = seeded_rng(cfg.train.seed, "tasks");

    TrainResult result;
    result.metrics_path = out_dir / "metrics.jsonl";
    result.final_checkpoint_path = out_dir / "checkpoint_final.json";
    result.averaged_checkpoint_path = out_dir / "checkpoint_averaged.json";
    metrics::MetricsWriter writer(result.metrics_path);

    std::vector<std::pair<std::int64_t, policy::PolicySnapshot>> saved;
    std::uint64_t version = 0;

    for (std::int64_t iter = 0; iter < cfg.iterations; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::int64_t max_len = curriculum::max_length_at(cfg.train.curriculum, iter);

        std::vector<taskgen::TaskInstance> tasks;
        tasks.reserve(static_cast<std::size_t>(cfg.train.prompts_per_iter));
        if (corpus) {
            for (std::int64_t i = 0; i < cfg.train.prompts_per_iter; ++i) {
                const auto pick = static_cast<std::size_t>(task_rng.uniform_int(
                    0, static_cast<std::int64_t>(corpus->size()) - 1));
                tasks.push_back((*corpus)[pick]);
            }
        } else {
            for (std::int64_t i = 0; i < cfg.train.prompts_per_iter; ++i) {
                const auto fam = families[static_cast<std::size_t>(
                    task_rng.uniform_int(0, static_cast<std::int64_t>(families.size()) - 1))];
                tasks.push_back(taskgen::generate_task(fam, cfg.difficulty, vocab, task_rng));
            }
        }

        version += 1;
        const auto snap = policy::snapshot(params, version);
        const Rng rollout_rng = seeded_rng(cfg.train.seed, "rollout." + std::to_string(iter));
        const RolloutBatch batch = taskgen::rollout(
            snap, vocab, tasks, cfg.train.responses_per_prompt, max_len,
            cfg.temperature, cfg.top_p, rollout_rng, iter, cfg.threads);

        const auto report = ppo::train_iteration(batch, vocab, params, policy_opt,
                                                 critic_opt, cfg.train, version);

        metrics::IterationMetrics m;
        m.iteration = iter;
        m.mean_reward = batch.mean_terminal_reward();
        m.mean_response_length = batch.mean_length();
        m.policy_objective = report.policy_objective;
        m.value_loss = report.value_loss;
        m.clip_fraction = report.clip_fraction;
        m.lr = ppo::lr_at(policy_opt);
        m.max_length = max_len;
        if (cfg.record_wall_time) {
            const auto t1 = std::chrono::steady_clock::now();
            m.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        writer.append(m);
        result.final_mean_reward = m.mean_reward;

        if (cfg.snapshot_every > 0 && (iter + 1) % cfg.snapshot_every == 0) {
            version += 1;
            saved.emplace_back(iter + 1, policy::snapshot(params, version));
        }
    }

    result.policy_steps = policy_opt.step_count;
    result.critic_steps = critic_opt.step_count;
    result.snapshots_saved = static_cast<std::int64_t>(saved.size());

    policy::save_checkpoint(params, version + 1, result.final_checkpoint_path);

    std::vector<policy::PolicySnapshot> to_average = select_for_average(saved, cfg);
    if (to_average.empty())
        to_average.push_back(policy::snapshot(params, version + 1));
    result.snapshots_averaged = static_cast<std::int64_t>(to_average.size());
    const auto averaged = policy::average_checkpoints(to_average);
    policy::save_checkpoint(averaged, version + 1, result.averaged_checkpoint_path);

    spdlog::info("train: {} iterations, final mean reward {:.3f}, {} snapshots averaged",
                 cfg.iterations, result.final_mean_reward, result.snapshots_averaged);
    return result;
}

} // namespace deskrl::runner
