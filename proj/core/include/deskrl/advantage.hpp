#pragma once

#include <span>
#include <vector>

namespace deskrl::advantage {

// Per-trajectory TD residuals, GAE advantages and empirical returns.
struct AdvantageRecord {
    std::vector<double> deltas;
    std::vector<double> advantages;
    std::vector<double> returns;
};

// delta_t = rewards[t] + gamma * values[t+1] - values[t].
// values must have one more entry than rewards (terminal bootstrap).
std::vector<double> compute_deltas(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double gamma);

// A_t = sum_l (gamma*lam)^l delta_{t+l}, by backward recursion
// A_t = delta_t + gamma*lam * A_{t+1}.
std::vector<double> compute_gae(std::span<const double> deltas,
                                double gamma, double lam);

// R_t = rewards[t] + gamma * R_{t+1}, R_{T-1} = rewards[T-1].
std::vector<double> compute_returns(std::span<const double> rewards, double gamma);

// (a - mean) / (population std + 1e-8) over the whole batch. All-equal
// batches map to exact zeros. Requires N >= 2.
std::vector<double> normalize_batch(std::span<const double> advantages);

AdvantageRecord compute_record(std::span<const double> rewards,
                               std::span<const double> values,
                               double gamma, double lam);

} // namespace deskrl::advantage
