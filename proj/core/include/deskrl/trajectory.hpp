#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deskrl/vocab.hpp"

namespace deskrl {

// One sampled response. actions/rewards/old_logprobs have length T; values
// has length T+1 with values[T] == 0 (terminal state). Rewards are terminal
// in this engine (grader writes {0,1} on the last step) but dense rewards
// pass through every downstream computation unchanged.
struct Trajectory {
    std::string task_id;
    std::uint64_t prompt_hash = 0;
    std::vector<Token> actions;
    std::vector<double> rewards;
    std::vector<double> old_logprobs;
    std::vector<double> values;
    bool terminated_by_eos = false;

    std::size_t length() const { return actions.size(); }

    // Throws contract_violation when any structural invariant fails.
    void validate() const;
};

// One iteration's worth of sampled trajectories, contiguously grouped by
// task. All of them were sampled under the snapshot named policy_version;
// the trainer rejects the batch if that snapshot is no longer current.
struct RolloutBatch {
    std::vector<Trajectory> trajectories;
    std::int64_t iteration = 0;
    std::uint64_t policy_version = 0;

    std::size_t total_tokens() const;
    double mean_terminal_reward() const;
    double mean_length() const;
};

} // namespace deskrl
