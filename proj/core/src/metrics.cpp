#include "deskrl/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "deskrl/errors.hpp"

namespace deskrl::metrics {

std::string IterationMetrics::to_json_line() const {
    nlohmann::ordered_json j;
    j["iteration"] = iteration;
    j["mean_reward"] = mean_reward;
    j["mean_response_length"] = mean_response_length;
    j["policy_objective"] = policy_objective;
    j["value_loss"] = value_loss;
    j["clip_fraction"] = clip_fraction;
    j["lr"] = lr;
    j["max_length"] = max_length;
    j["wall_ms"] = wall_ms;
    return j.dump();
}

IterationMetrics IterationMetrics::from_json_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("metrics parse: ") + e.what());
    }
    IterationMetrics m;
    try {
        m.iteration = j.at("iteration").get<std::int64_t>();
        m.mean_reward = j.at("mean_reward").get<double>();
        m.mean_response_length = j.at("mean_response_length").get<double>();
        m.policy_objective = j.at("policy_objective").get<double>();
        m.value_loss = j.at("value_loss").get<double>();
        m.clip_fraction = j.at("clip_fraction").get<double>();
        m.lr = j.at("lr").get<double>();
        m.max_length = j.at("max_length").get<std::int64_t>();
        m.wall_ms = j.at("wall_ms").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("metrics parse: ") + e.what());
    }
    return m;
}

struct MetricsWriter::Impl {
    std::ofstream out;
};

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : impl_(new Impl) {
    impl_->out.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->out) {
        delete impl_;
        throw config_error("MetricsWriter: cannot write " + path.string());
    }
}

MetricsWriter::~MetricsWriter() { delete impl_; }

void MetricsWriter::append(const IterationMetrics& m) {
    impl_->out << m.to_json_line() << "\n";
    impl_->out.flush();
}

std::vector<IterationMetrics> read_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("read_metrics: cannot open " + path.string());
    std::vector<IterationMetrics> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(IterationMetrics::from_json_line(line));
    }
    return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw contract_violation("pearson: length mismatch");
    if (x.size() < 3) throw contract_violation("pearson: need at least 3 points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::domain_error("pearson: correlation undefined for a constant series");
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

double correlate(const std::filesystem::path& metrics_path) {
    const auto records = read_metrics(metrics_path);
    if (records.size() < 3)
        throw contract_violation("correlate: need at least 3 metric records");
    std::vector<double> reward, length;
    reward.reserve(records.size());
    length.reserve(records.size());
    for (const auto& m : records) {
        reward.push_back(m.mean_reward);
        length.push_back(m.mean_response_length);
    }
    return pearson(reward, length);
}

std::vector<double> moving_average(const std::vector<double>& series, std::size_t window) {
    if (window == 0) throw contract_violation("moving_average: window must be >= 1");
    std::vector<double> out(series.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        if (i >= window) acc -= series[i - window];
        const std::size_t span = std::min(i + 1, window);
        out[i] = acc / static_cast<double>(span);
    }
    return out;
}

} // namespace deskrl::metrics
