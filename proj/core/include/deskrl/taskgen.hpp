#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deskrl/policy.hpp"
#include "deskrl/rng.hpp"
#include "deskrl/trajectory.hpp"
#include "deskrl/vocab.hpp"

namespace deskrl::taskgen {

// Generated families plus EXTERNAL for corpora imported from JSONL.
enum class Family { ADD, SUB, MUL, COPY, COMPARE, EXTERNAL };

std::string family_name(Family f);
std::optional<Family> parse_family(std::string_view name);

struct TaskInstance {
    std::string task_id;
    Family family = Family::EXTERNAL;
    std::vector<Token> prompt_tokens; // ends with the QUERY token
    std::string reference_answer;
    std::int64_t difficulty = 1;
    std::string category;
};

// Deterministic task draw: operands uniform over [0, 10^difficulty - 1].
TaskInstance generate_task(Family family, std::int64_t difficulty, const Vocabulary& vocab,
                           Rng& rng);

// Token sequence a perfect responder emits: boxed reference answer then EOS.
// Doubles as the solvability oracle for generated tasks.
std::vector<Token> ideal_response_tokens(const TaskInstance& task, const Vocabulary& vocab);

// Negative log-likelihood of the ideal response under the given policy;
// optional proxy-loss generator for the curation pipeline.
double reference_nll(const policy::PolicyParams& params, const Vocabulary& vocab,
                     const TaskInstance& task);

// Samples n_responses per task from the snapshot policy, grades each
// detokenized response against the task reference, and writes the binary
// reward on the final step. Tasks fan out across `threads` workers with
// per-task child streams, so the result is identical for any thread count.
RolloutBatch rollout(const policy::PolicySnapshot& snapshot, const Vocabulary& vocab,
                     std::span<const TaskInstance> tasks, std::int64_t n_responses,
                     std::int64_t max_len, double temperature, double top_p,
                     const Rng& rng, std::int64_t iteration = 0, std::int64_t threads = 1);

// Fraction of k sampled responses graded correct.
double pass_rate(const policy::PolicySnapshot& snapshot, const Vocabulary& vocab,
                 const TaskInstance& task, std::int64_t k, std::int64_t max_len,
                 const Rng& rng);

// JSONL corpus exchange: {task_id, family, prompt_text, reference_answer,
// difficulty, category} one object per line.
void export_tasks(std::span<const TaskInstance> tasks, const Vocabulary& vocab,
                  const std::filesystem::path& path);
std::vector<TaskInstance> import_tasks(const std::filesystem::path& path,
                                       const Vocabulary& vocab);

} // namespace deskrl::taskgen
