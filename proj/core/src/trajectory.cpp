#include "deskrl/trajectory.hpp"

#include <cmath>

#include "deskrl/errors.hpp"

namespace deskrl {

void Trajectory::validate() const {
    const std::size_t t = actions.size();
    if (t == 0) throw contract_violation("Trajectory: empty action sequence");
    if (rewards.size() != t) throw contract_violation("Trajectory: rewards length != T");
    if (old_logprobs.size() != t) throw contract_violation("Trajectory: old_logprobs length != T");
    if (values.size() != t + 1) throw contract_violation("Trajectory: values length != T+1");
    if (values.back() != 0.0) throw contract_violation("Trajectory: values[T] must be 0");
    for (double r : rewards)
        if (!std::isfinite(r)) throw contract_violation("Trajectory: non-finite reward");
    for (double lp : old_logprobs)
        if (!(lp <= 0.0)) throw contract_violation("Trajectory: old_logprob > 0");
    for (double v : values)
        if (!std::isfinite(v)) throw contract_violation("Trajectory: non-finite value");
}

std::size_t RolloutBatch::total_tokens() const {
    std::size_t n = 0;
    for (const auto& tr : trajectories) n += tr.length();
    return n;
}

double RolloutBatch::mean_terminal_reward() const {
    if (trajectories.empty()) return 0.0;
    double s = 0.0;
    for (const auto& tr : trajectories)
        if (!tr.rewards.empty()) s += tr.rewards.back();
    return s / static_cast<double>(trajectories.size());
}

double RolloutBatch::mean_length() const {
    if (trajectories.empty()) return 0.0;
    double s = 0.0;
    for (const auto& tr : trajectories) s += static_cast<double>(tr.length());
    return s / static_cast<double>(trajectories.size());
}

} // namespace deskrl
