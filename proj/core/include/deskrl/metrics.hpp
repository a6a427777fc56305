#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace deskrl::metrics {

struct IterationMetrics {
    std::int64_t iteration = 0;
    double mean_reward = 0.0;
    double mean_response_length = 0.0;
    double policy_objective = 0.0;
    double value_loss = 0.0;
    double clip_fraction = 0.0;
    double lr = 0.0;
    std::int64_t max_length = 0;
    double wall_ms = 0.0;

    std::string to_json_line() const;
    static IterationMetrics from_json_line(const std::string& line);
};

// Append-only JSONL writer; each record is flushed on write so a crash
// leaves every previously written line valid.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& path);
    ~MetricsWriter();
    MetricsWriter(const MetricsWriter&) = delete;
    MetricsWriter& operator=(const MetricsWriter&) = delete;

    void append(const IterationMetrics& m);

private:
    struct Impl;
    Impl* impl_;
};

std::vector<IterationMetrics> read_metrics(const std::filesystem::path& path);

// Pearson correlation between the mean_reward and mean_response_length
// series. Requires >= 3 records; throws std::domain_error when either
// series is constant.
double correlate(const std::filesystem::path& metrics_path);
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Simple moving average of the final `window` values ending at each index.
std::vector<double> moving_average(const std::vector<double>& series, std::size_t window);

} // namespace deskrl::metrics
