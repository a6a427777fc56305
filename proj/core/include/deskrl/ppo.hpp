#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deskrl/config.hpp"
#include "deskrl/policy.hpp"
#include "deskrl/trajectory.hpp"

namespace deskrl::ppo {

// Adam state for one parameter tensor. step_count counts completed steps;
// the learning rate ramps linearly over warmup_steps and stays constant
// afterwards. No weight decay anywhere.
struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::int64_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double base_lr = 0.0;
    std::int64_t warmup_steps = 0;

    static OptimizerState for_params(std::size_t size, double base_lr,
                                     std::int64_t warmup_steps,
                                     double beta1, double beta2);
};

// base_lr * min(1, step_count / warmup_steps).
double lr_at(const OptimizerState& state);

// One Adam descent step (bias-corrected, epsilon 1e-8). Pass the gradient of
// the quantity to MINIMIZE; the policy update negates its objective gradient
// before calling this.
void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state);

struct ObjectiveResult {
    double objective = 0.0;
    // Fraction of tokens where the clipped branch was selected by the min.
    double clip_fraction = 0.0;
};

// Clipped surrogate: mean_t min(rho_t * adv_t, clip(rho_t, 1-eps, 1+eps) * adv_t)
// with rho_t = exp(new_lp - old_lp). No KL penalty, no entropy bonus.
ObjectiveResult ppo_objective(std::span<const double> old_lp,
                              std::span<const double> new_lp,
                              std::span<const double> adv, double eps);

// d objective / d new_lp_t; zero on tokens where the clip saturates.
std::vector<double> ppo_objective_grad(std::span<const double> old_lp,
                                       std::span<const double> new_lp,
                                       std::span<const double> adv, double eps);

// Mean squared error between predicted values and empirical returns.
double value_loss(std::span<const double> values, std::span<const double> returns);

struct UpdateReport {
    double policy_objective = 0.0;
    double value_loss = 0.0;
    double clip_fraction = 0.0;
    double grad_norm = 0.0; // L2 norm of the policy objective gradient
};

// One training iteration: GAE + batch-normalized advantages, exactly one
// policy step, then exactly cfg.critic_steps_per_iter critic steps on the
// same batch. Throws on_policy_violation when the batch was sampled under a
// snapshot other than current_version.
UpdateReport train_iteration(const RolloutBatch& batch, const Vocabulary& vocab,
                             policy::PolicyParams& params,
                             OptimizerState& policy_opt, OptimizerState& critic_opt,
                             const TrainConfig& cfg, std::uint64_t current_version);

} // namespace deskrl::ppo
