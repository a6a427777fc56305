#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "deskrl/rng.hpp"
#include "deskrl/trajectory.hpp"
#include "deskrl/vocab.hpp"

namespace deskrl::policy {

// Sparse state encoding over the state inputs (prompt hash, position,
// previous token): three hashed indicator features — the (prompt x position)
// cell plus the two shared singles. The per-prompt cells carry
// prompt-specific emission rules; the shared singles carry
// prompt-independent structure. Values are 1.0; coinciding indices add.
struct StateFeatures {
    std::array<std::uint32_t, 3> idx{};

    std::vector<double> to_dense(std::size_t feature_dim) const;
};

StateFeatures encode_state(std::uint64_t prompt_hash, std::int64_t position,
                           Token prev_token, std::int64_t feature_dim);

// Linear-softmax policy and linear value head over the same features.
// policy_weights is row-major [feature_dim x vocab_size]; critic_weights is
// [feature_dim], no bias.
struct PolicyParams {
    std::int64_t feature_dim = 0;
    std::uint32_t vocab_size = 0;
    std::uint64_t vocab_hash = 0;
    std::vector<double> policy_weights;
    std::vector<double> critic_weights;

    double* policy_row(std::uint32_t feature) { return policy_weights.data() + static_cast<std::size_t>(feature) * vocab_size; }
    const double* policy_row(std::uint32_t feature) const { return policy_weights.data() + static_cast<std::size_t>(feature) * vocab_size; }

    friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

// Immutable copy of PolicyParams tagged with a monotonically increasing
// version; rollouts record the version so the trainer can enforce strict
// on-policy updates.
struct PolicySnapshot {
    PolicyParams params;
    std::uint64_t version = 0;
};

// Critic head ~ U(-sqrt(5), sqrt(5)) without bias; policy weights
// ~ U(-0.1, 0.1) keep the initial distribution near uniform.
PolicyParams init_params(const Vocabulary& vocab, std::int64_t feature_dim, Rng& rng);

std::vector<double> logits(const PolicyParams& params, const StateFeatures& state);

// Stable log-softmax log pi(action | state); always <= 0.
double log_prob(const PolicyParams& params, const StateFeatures& state, Token action);

// All-token log-softmax for one state.
std::vector<double> log_probs(const PolicyParams& params, const StateFeatures& state);

double value(const PolicyParams& params, const StateFeatures& state);

// d log pi(a|s) / d W[:, j] = phi(s) * ([j == a] - pi(j|s)). Returned as the
// per-vocab coefficient vector plus the feature rows it applies to.
struct LogProbGrad {
    std::array<std::uint32_t, 3> rows{};
    std::vector<double> coeff; // [vocab_size]
};
LogProbGrad grad_logprob(const PolicyParams& params, const StateFeatures& state, Token action);

// dV/dw = phi(s); sparse as the three feature indices (value 1.0 each).
StateFeatures grad_value(const PolicyParams& params, const StateFeatures& state);

// Autoregressive sampling until EOS or max_len, recording log-probs of the
// untempered policy and the critic's value at each state. Rewards are left
// zero for the grader to fill.
Trajectory sample_response(const PolicyParams& params, const Vocabulary& vocab,
                           std::span<const Token> prompt, const std::string& task_id,
                           std::int64_t max_len, double temperature, double top_p,
                           Rng& rng);

PolicySnapshot snapshot(const PolicyParams& params, std::uint64_t version);

// Elementwise uniform mean; all snapshots must agree on shape.
PolicyParams average_checkpoints(std::span<const PolicySnapshot> snapshots);

// Versioned JSON checkpoint. Loading rejects a vocabulary hash mismatch.
void save_checkpoint(const PolicyParams& params, std::uint64_t version,
                     const std::filesystem::path& path);
PolicySnapshot load_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab);

// Sum of log pi over a fixed token sequence continued from the prompt.
double sequence_logprob(const PolicyParams& params, std::span<const Token> prompt,
                        std::span<const Token> continuation, const Vocabulary& vocab);

} // namespace deskrl::policy
