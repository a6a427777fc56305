#include "deskrl/advantage.hpp"

#include <cmath>

#include "deskrl/errors.hpp"

namespace deskrl::advantage {

std::vector<double> compute_deltas(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double gamma) {
    if (values.size() != rewards.size() + 1)
        throw contract_violation("compute_deltas: values must have length T+1");
    std::vector<double> deltas(rewards.size());
    for (std::size_t t = 0; t < rewards.size(); ++t)
        deltas[t] = rewards[t] + gamma * values[t + 1] - values[t];
    return deltas;
}

std::vector<double> compute_gae(std::span<const double> deltas, double gamma, double lam) {
    std::vector<double> adv(deltas.size());
    double acc = 0.0;
    const double decay = gamma * lam;
    for (std::size_t i = deltas.size(); i-- > 0;) {
        acc = deltas[i] + decay * acc;
        adv[i] = acc;
    }
    return adv;
}

std::vector<double> compute_returns(std::span<const double> rewards, double gamma) {
    std::vector<double> returns(rewards.size());
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        acc = rewards[i] + gamma * acc;
        returns[i] = acc;
    }
    return returns;
}

std::vector<double> normalize_batch(std::span<const double> advantages) {
    const std::size_t n = advantages.size();
    if (n < 2) throw contract_violation("normalize_batch: need at least 2 entries");

    bool all_equal = true;
    for (std::size_t i = 1; i < n; ++i)
        if (advantages[i] != advantages[0]) { all_equal = false; break; }
    if (all_equal) return std::vector<double>(n, 0.0);

    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n); // population variance
    const double denom = std::sqrt(var) + 1e-8;

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (advantages[i] - mean) / denom;
    return out;
}

AdvantageRecord compute_record(std::span<const double> rewards,
                               std::span<const double> values,
                               double gamma, double lam) {
    AdvantageRecord rec;
    rec.deltas = compute_deltas(rewards, values, gamma);
    rec.advantages = compute_gae(rec.deltas, gamma, lam);
    rec.returns = compute_returns(rewards, gamma);
    return rec;
}

} // namespace deskrl::advantage
