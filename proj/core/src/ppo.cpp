#include "deskrl/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "deskrl/advantage.hpp"
#include "deskrl/errors.hpp"

namespace deskrl::ppo {

namespace {
constexpr double kAdamEps = 1e-8;
} // namespace

OptimizerState OptimizerState::for_params(std::size_t size, double base_lr,
                                          std::int64_t warmup_steps,
                                          double beta1, double beta2) {
    OptimizerState s;
    s.first_moment.assign(size, 0.0);
    s.second_moment.assign(size, 0.0);
    s.base_lr = base_lr;
    s.warmup_steps = warmup_steps;
    s.beta1 = beta1;
    s.beta2 = beta2;
    return s;
}

double lr_at(const OptimizerState& state) {
    if (state.warmup_steps <= 0) return state.base_lr;
    const double frac = static_cast<double>(state.step_count) /
                        static_cast<double>(state.warmup_steps);
    return state.base_lr * std::min(1.0, frac);
}

void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw contract_violation("optimizer_step: shape mismatch");
    state.step_count += 1;
    const double lr = lr_at(state);
    const auto t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
        state.second_moment[i] = state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
}

namespace {

// The clipped branch is "active" when the min strictly selects it: for
// positive advantages at rho > 1+eps, for negative at rho < 1-eps.
bool clip_active(double rho, double adv, double eps) {
    return (adv > 0.0 && rho > 1.0 + eps) || (adv < 0.0 && rho < 1.0 - eps);
}

} // namespace

ObjectiveResult ppo_objective(std::span<const double> old_lp,
                              std::span<const double> new_lp,
                              std::span<const double> adv, double eps) {
    if (old_lp.size() != new_lp.size() || old_lp.size() != adv.size())
        throw contract_violation("ppo_objective: length mismatch");
    if (!(eps > 0.0)) throw contract_violation("ppo_objective: eps must be > 0");
    if (old_lp.empty()) throw contract_violation("ppo_objective: empty batch");

    double sum = 0.0;
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < old_lp.size(); ++i) {
        const double rho = std::exp(new_lp[i] - old_lp[i]);
        const double clipped_rho = std::clamp(rho, 1.0 - eps, 1.0 + eps);
        sum += std::min(rho * adv[i], clipped_rho * adv[i]);
        if (clip_active(rho, adv[i], eps)) ++clipped;
    }
    const auto n = static_cast<double>(old_lp.size());
    return {sum / n, static_cast<double>(clipped) / n};
}

std::vector<double> ppo_objective_grad(std::span<const double> old_lp,
                                       std::span<const double> new_lp,
                                       std::span<const double> adv, double eps) {
    if (old_lp.size() != new_lp.size() || old_lp.size() != adv.size())
        throw contract_violation("ppo_objective_grad: length mismatch");
    const auto n = static_cast<double>(old_lp.size());
    std::vector<double> g(old_lp.size(), 0.0);
    for (std::size_t i = 0; i < old_lp.size(); ++i) {
        const double rho = std::exp(new_lp[i] - old_lp[i]);
        if (!clip_active(rho, adv[i], eps))
            g[i] = rho * adv[i] / n; // d(rho*adv)/d new_lp = rho*adv
    }
    return g;
}

double value_loss(std::span<const double> values, std::span<const double> returns) {
    if (values.size() != returns.size())
        throw contract_violation("value_loss: length mismatch");
    if (values.empty()) throw contract_violation("value_loss: empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - returns[i];
        sum += d * d;
    }
    return sum / static_cast<double>(values.size());
}

UpdateReport train_iteration(const RolloutBatch& batch, const Vocabulary& vocab,
                             policy::PolicyParams& params,
                             OptimizerState& policy_opt, OptimizerState& critic_opt,
                             const TrainConfig& cfg, std::uint64_t current_version) {
    if (batch.policy_version != current_version)
        throw on_policy_violation(
            "train_iteration: batch sampled under snapshot " +
            std::to_string(batch.policy_version) + " but current version is " +
            std::to_string(current_version));
    if (batch.trajectories.empty())
        throw contract_violation("train_iteration: empty batch");

    // Per-trajectory GAE and returns from the values recorded at sampling
    // time, then one batch-level normalization pass over all tokens.
    const std::size_t n_tokens = batch.total_tokens();
    std::vector<double> adv_raw, returns_flat, old_lp_flat;
    adv_raw.reserve(n_tokens);
    returns_flat.reserve(n_tokens);
    old_lp_flat.reserve(n_tokens);
    for (const auto& tr : batch.trajectories) {
        const auto rec = advantage::compute_record(tr.rewards, tr.values, cfg.gamma, cfg.lam);
        adv_raw.insert(adv_raw.end(), rec.advantages.begin(), rec.advantages.end());
        returns_flat.insert(returns_flat.end(), rec.returns.begin(), rec.returns.end());
        old_lp_flat.insert(old_lp_flat.end(), tr.old_logprobs.begin(), tr.old_logprobs.end());
    }
    const std::vector<double> adv = advantage::normalize_batch(adv_raw);

    // Recompute state features once; they drive both policy and critic passes.
    std::vector<policy::StateFeatures> states;
    std::vector<Token> actions;
    states.reserve(n_tokens);
    actions.reserve(n_tokens);
    for (const auto& tr : batch.trajectories) {
        Token prev = vocab.pad(); // matches the sampling-time state chain
        for (std::size_t t = 0; t < tr.length(); ++t) {
            states.push_back(policy::encode_state(tr.prompt_hash,
                                                  static_cast<std::int64_t>(t), prev,
                                                  params.feature_dim));
            actions.push_back(tr.actions[t]);
            prev = tr.actions[t];
        }
    }

    std::vector<double> new_lp(n_tokens);
    for (std::size_t i = 0; i < n_tokens; ++i)
        new_lp[i] = policy::log_prob(params, states[i], actions[i]);

    const ObjectiveResult obj = ppo_objective(old_lp_flat, new_lp, adv, cfg.clip_eps);
    const std::vector<double> dJ_dlp = ppo_objective_grad(old_lp_flat, new_lp, adv, cfg.clip_eps);

    // Chain through log-softmax into the policy weights; single fixed-order
    // accumulation keeps runs bit-reproducible.
    std::vector<double> grad_J(params.policy_weights.size(), 0.0);
    for (std::size_t i = 0; i < n_tokens; ++i) {
        if (dJ_dlp[i] == 0.0) continue;
        const auto g = policy::grad_logprob(params, states[i], actions[i]);
        for (std::uint32_t row : g.rows) {
            double* dst = grad_J.data() + static_cast<std::size_t>(row) * params.vocab_size;
            for (std::uint32_t j = 0; j < params.vocab_size; ++j)
                dst[j] += dJ_dlp[i] * g.coeff[j];
        }
    }
    double norm_sq = 0.0;
    for (double g : grad_J) norm_sq += g * g;

    // Ascent on the objective = descent on its negation. Exactly one step.
    for (double& g : grad_J) g = -g;
    optimizer_step(params.policy_weights, grad_J, policy_opt);

    // Critic: cfg.critic_steps_per_iter full-batch steps against the
    // empirical returns; reported loss is measured before the first step.
    UpdateReport report;
    report.policy_objective = obj.objective;
    report.clip_fraction = obj.clip_fraction;
    report.grad_norm = std::sqrt(norm_sq);

    std::vector<double> grad_V(params.critic_weights.size());
    for (std::int64_t step = 0; step < cfg.critic_steps_per_iter; ++step) {
        std::vector<double> pred(n_tokens);
        for (std::size_t i = 0; i < n_tokens; ++i)
            pred[i] = policy::value(params, states[i]);
        if (step == 0) report.value_loss = value_loss(pred, returns_flat);
        std::fill(grad_V.begin(), grad_V.end(), 0.0);
        const double scale = 2.0 / static_cast<double>(n_tokens);
        for (std::size_t i = 0; i < n_tokens; ++i) {
            const double coeff = scale * (pred[i] - returns_flat[i]);
            for (std::uint32_t row : states[i].idx) grad_V[row] += coeff;
        }
        optimizer_step(params.critic_weights, grad_V, critic_opt);
    }
    return report;
}

} // namespace deskrl::ppo
