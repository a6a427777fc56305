#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deskrl/curriculum.hpp"

namespace deskrl {

// Optimization hyperparameters. policy_lr/critic_lr are base rates; the
// effective rates are base * scale. The scales are separate knobs: the
// tabular value head oscillates with amplitude proportional to its rate and
// that noise lands directly in the advantages, so at desk scale the critic
// has to run well below the 5x-policy ratio the base rates suggest.
struct TrainConfig {
    double gamma = 1.0;
    double lam = 1.0;
    double clip_eps = 0.2;
    double policy_lr = 1e-6;
    double critic_lr = 5e-6;
    double lr_scale = 150000.0;
    double critic_lr_scale = 10000.0;
    std::int64_t warmup_steps = 50;
    double beta1 = 0.9;
    double beta2 = 0.95;
    std::int64_t prompts_per_iter = 64;
    std::int64_t responses_per_prompt = 8;
    std::int64_t critic_steps_per_iter = 4;
    curriculum::CurriculumSchedule curriculum;
    std::uint64_t seed = 0;

    double effective_policy_lr() const { return policy_lr * lr_scale; }
    double effective_critic_lr() const { return critic_lr * critic_lr_scale; }

    // Throws config_error on any out-of-range field.
    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

TrainConfig default_config();

// Full run configuration: TrainConfig plus the loop- and environment-level
// keys. Serialized as one flat JSON object; unknown keys are a hard error.
struct RunConfig {
    TrainConfig train;
    std::int64_t iterations = 300;
    std::int64_t snapshot_every = 10;
    std::vector<std::string> families = {"add"};
    std::int64_t difficulty = 1;
    std::int64_t feature_dim = 4096;
    double temperature = 1.0;
    double top_p = 1.0;
    std::int64_t threads = 1;
    bool record_wall_time = true;
    // Snapshot subset averaged into the released checkpoint: explicit
    // iteration list wins; otherwise "all" or "last_quartile".
    std::vector<std::int64_t> average_iterations;
    std::string average_mode = "all";

    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig default_run_config();

// Canonical JSON form: fixed key order, shortest round-trip numerals.
// serialize(parse(serialize(c))) == serialize(c) byte for byte.
std::string serialize_config(const RunConfig& cfg);
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::filesystem::path& path);
void save_config_file(const RunConfig& cfg, const std::filesystem::path& path);

} // namespace deskrl
