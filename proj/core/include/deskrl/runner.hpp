#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "deskrl/config.hpp"
#include "deskrl/metrics.hpp"
#include "deskrl/taskgen.hpp"

namespace deskrl::runner {

struct TrainResult {
    std::filesystem::path metrics_path;
    std::filesystem::path final_checkpoint_path;
    std::filesystem::path averaged_checkpoint_path;
    std::int64_t policy_steps = 0;
    std::int64_t critic_steps = 0;
    std::int64_t snapshots_saved = 0;
    std::int64_t snapshots_averaged = 0;
    double final_mean_reward = 0.0;
};

// Full training loop: per iteration, read the curriculum length, snapshot
// the policy, roll out and grade, run one PPO update, and append a metrics
// record. Writes the final and averaged checkpoints into out_dir. With a
// fixed seed and threads == 1 the outputs are byte-identical across runs
// (disable record_wall_time for the metrics file).
TrainResult train(const RunConfig& cfg,
                  const std::optional<std::vector<taskgen::TaskInstance>>& corpus,
                  const std::filesystem::path& out_dir);

// Reward and response-length curves as a self-contained SVG chart with one
// marker per record; byte-deterministic for fixed input.
void plot(const std::filesystem::path& metrics_path, const std::filesystem::path& out_path);

} // namespace deskrl::runner
