#include "deskrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "deskrl/errors.hpp"

namespace deskrl::policy {

namespace {

constexpr std::uint64_t kSaltPromptPos = 0xa076'1d64'78bd'642fULL;
constexpr std::uint64_t kSaltPrevTok = 0xe703'7ed1'a0b4'28dbULL;
constexpr std::uint64_t kSaltPos = 0x8ebc'6af0'9c88'c6e3ULL;
constexpr std::int64_t kMaxPositionFeature = 63;

double dot_features(std::span<const double> weights, const StateFeatures& s) {
    return weights[s.idx[0]] + weights[s.idx[1]] + weights[s.idx[2]];
}

} // namespace

std::vector<double> StateFeatures::to_dense(std::size_t feature_dim) const {
    std::vector<double> phi(feature_dim, 0.0);
    for (std::uint32_t i : idx) phi[i] += 1.0;
    return phi;
}

StateFeatures encode_state(std::uint64_t prompt_hash, std::int64_t position,
                           Token prev_token, std::int64_t feature_dim) {
    if (feature_dim < 1) throw contract_violation("encode_state: feature_dim must be >= 1");
    const auto dim = static_cast<std::uint64_t>(feature_dim);
    const std::int64_t pos_bucket = std::min(position, kMaxPositionFeature);
    const auto prev = static_cast<std::uint64_t>(prev_token.id) + 1;
    StateFeatures s;
    s.idx[0] = static_cast<std::uint32_t>(
        mix64(mix64(prompt_hash ^ kSaltPromptPos) ^ static_cast<std::uint64_t>(position)) % dim);
    s.idx[1] = static_cast<std::uint32_t>(mix64(kSaltPrevTok ^ prev) % dim);
    s.idx[2] = static_cast<std::uint32_t>(
        mix64(kSaltPos ^ static_cast<std::uint64_t>(pos_bucket + 1)) % dim);
    return s;
}

PolicyParams init_params(const Vocabulary& vocab, std::int64_t feature_dim, Rng& rng) {
    if (feature_dim < 1) throw contract_violation("init_params: feature_dim must be >= 1");
    PolicyParams p;
    p.feature_dim = feature_dim;
    p.vocab_size = vocab.size();
    p.vocab_hash = vocab.content_hash();
    p.policy_weights.resize(static_cast<std::size_t>(feature_dim) * vocab.size());
    p.critic_weights.resize(static_cast<std::size_t>(feature_dim));
    for (double& w : p.policy_weights) w = rng.uniform_real(-0.1, 0.1);
    const double bound = std::sqrt(5.0);
    for (double& w : p.critic_weights) w = rng.uniform_real(-bound, bound);
    return p;
}

std::vector<double> logits(const PolicyParams& params, const StateFeatures& state) {
    std::vector<double> z(params.vocab_size, 0.0);
    for (std::uint32_t row : state.idx) {
        const double* w = params.policy_row(row);
        for (std::uint32_t j = 0; j < params.vocab_size; ++j) z[j] += w[j];
    }
    return z;
}

namespace {

// log-softmax with max subtraction; writes log-probs in place.
void log_softmax_inplace(std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double log_norm = zmax + std::log(sum);
    for (double& v : z) v -= log_norm;
}

} // namespace

std::vector<double> log_probs(const PolicyParams& params, const StateFeatures& state) {
    std::vector<double> z = logits(params, state);
    log_softmax_inplace(z);
    return z;
}

double log_prob(const PolicyParams& params, const StateFeatures& state, Token action) {
    if (action.id >= params.vocab_size)
        throw contract_violation("log_prob: action outside vocabulary");
    std::vector<double> lp = log_probs(params, state);
    return std::min(lp[action.id], 0.0);
}

double value(const PolicyParams& params, const StateFeatures& state) {
    return dot_features(params.critic_weights, state);
}

LogProbGrad grad_logprob(const PolicyParams& params, const StateFeatures& state, Token action) {
    if (action.id >= params.vocab_size)
        throw contract_violation("grad_logprob: action outside vocabulary");
    std::vector<double> lp = log_probs(params, state);
    LogProbGrad g;
    g.rows = state.idx;
    g.coeff.resize(params.vocab_size);
    for (std::uint32_t j = 0; j < params.vocab_size; ++j)
        g.coeff[j] = (j == action.id ? 1.0 : 0.0) - std::exp(lp[j]);
    return g;
}

StateFeatures grad_value(const PolicyParams& /*params*/, const StateFeatures& state) {
    return state;
}

Trajectory sample_response(const PolicyParams& params, const Vocabulary& vocab,
                           std::span<const Token> prompt, const std::string& task_id,
                           std::int64_t max_len, double temperature, double top_p,
                           Rng& rng) {
    if (max_len < 1) throw contract_violation("sample_response: max_len must be >= 1");
    if (!(temperature > 0.0)) throw contract_violation("sample_response: temperature must be > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw contract_violation("sample_response: top_p in (0, 1]");

    Trajectory tr;
    tr.task_id = task_id;
    tr.prompt_hash = hash_tokens(prompt);

    Token prev = vocab.pad();
    for (std::int64_t t = 0; t < max_len; ++t) {
        const StateFeatures s = encode_state(tr.prompt_hash, t, prev, params.feature_dim);
        tr.values.push_back(value(params, s));

        std::vector<double> lp = logits(params, s);
        if (temperature != 1.0)
            for (double& v : lp) v /= temperature;
        log_softmax_inplace(lp);

        std::vector<double> probs(lp.size());
        for (std::size_t j = 0; j < lp.size(); ++j) probs[j] = std::exp(lp[j]);

        std::uint32_t chosen;
        if (top_p < 1.0) {
            // Nucleus: smallest prob-mass prefix reaching top_p, renormalized.
            std::vector<std::uint32_t> order(probs.size());
            std::iota(order.begin(), order.end(), 0u);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::uint32_t a, std::uint32_t b) { return probs[a] > probs[b]; });
            std::vector<double> nucleus_w(probs.size(), 0.0);
            double mass = 0.0;
            for (std::uint32_t j : order) {
                nucleus_w[j] = probs[j];
                mass += probs[j];
                if (mass >= top_p) break;
            }
            chosen = static_cast<std::uint32_t>(rng.sample_discrete(nucleus_w));
        } else {
            chosen = static_cast<std::uint32_t>(rng.sample_discrete(probs));
        }

        const Token action{chosen};
        // Record the untempered policy log-prob, the quantity the PPO ratio uses.
        tr.old_logprobs.push_back(log_prob(params, s, action));
        tr.actions.push_back(action);
        tr.rewards.push_back(0.0);
        prev = action;
        if (action == vocab.eos()) {
            tr.terminated_by_eos = true;
            break;
        }
    }
    tr.values.push_back(0.0); // terminal state
    tr.validate();
    return tr;
}

PolicySnapshot snapshot(const PolicyParams& params, std::uint64_t version) {
    return PolicySnapshot{params, version};
}

PolicyParams average_checkpoints(std::span<const PolicySnapshot> snapshots) {
    if (snapshots.empty())
        throw contract_violation("average_checkpoints: empty snapshot list");
    const PolicyParams& first = snapshots.front().params;
    PolicyParams avg = first;
    std::fill(avg.policy_weights.begin(), avg.policy_weights.end(), 0.0);
    std::fill(avg.critic_weights.begin(), avg.critic_weights.end(), 0.0);
    for (const auto& snap : snapshots) {
        const auto& p = snap.params;
        if (p.feature_dim != first.feature_dim || p.vocab_size != first.vocab_size ||
            p.vocab_hash != first.vocab_hash)
            throw contract_violation("average_checkpoints: snapshot shape mismatch");
        for (std::size_t i = 0; i < avg.policy_weights.size(); ++i)
            avg.policy_weights[i] += p.policy_weights[i];
        for (std::size_t i = 0; i < avg.critic_weights.size(); ++i)
            avg.critic_weights[i] += p.critic_weights[i];
    }
    const double inv = 1.0 / static_cast<double>(snapshots.size());
    for (double& w : avg.policy_weights) w *= inv;
    for (double& w : avg.critic_weights) w *= inv;
    return avg;
}

void save_checkpoint(const PolicyParams& params, std::uint64_t version,
                     const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = "deskrl-checkpoint";
    j["version"] = version;
    j["feature_dim"] = params.feature_dim;
    j["vocab_size"] = params.vocab_size;
    j["vocab_hash"] = params.vocab_hash;
    j["policy_weights"] = params.policy_weights;
    j["critic_weights"] = params.critic_weights;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("save_checkpoint: cannot write " + path.string());
    out << j.dump() << "\n";
}

PolicySnapshot load_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw config_error("load_checkpoint: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("load_checkpoint: " + std::string(e.what()));
    }
    if (j.value("kind", "") != "deskrl-checkpoint")
        throw config_error("load_checkpoint: not a checkpoint file");
    PolicySnapshot snap;
    snap.version = j.at("version").get<std::uint64_t>();
    auto& p = snap.params;
    p.feature_dim = j.at("feature_dim").get<std::int64_t>();
    p.vocab_size = j.at("vocab_size").get<std::uint32_t>();
    p.vocab_hash = j.at("vocab_hash").get<std::uint64_t>();
    p.policy_weights = j.at("policy_weights").get<std::vector<double>>();
    p.critic_weights = j.at("critic_weights").get<std::vector<double>>();
    if (p.vocab_hash != vocab.content_hash())
        throw config_error("load_checkpoint: vocabulary hash mismatch");
    if (p.vocab_size != vocab.size())
        throw config_error("load_checkpoint: vocabulary size mismatch");
    if (p.policy_weights.size() != static_cast<std::size_t>(p.feature_dim) * p.vocab_size ||
        p.critic_weights.size() != static_cast<std::size_t>(p.feature_dim))
        throw config_error("load_checkpoint: weight tensor shape mismatch");
    return snap;
}

double sequence_logprob(const PolicyParams& params, std::span<const Token> prompt,
                        std::span<const Token> continuation, const Vocabulary& vocab) {
    const std::uint64_t ph = hash_tokens(prompt);
    Token prev = vocab.pad();
    double total = 0.0;
    for (std::size_t t = 0; t < continuation.size(); ++t) {
        const StateFeatures s = encode_state(ph, static_cast<std::int64_t>(t), prev, params.feature_dim);
        total += log_prob(params, s, continuation[t]);
        prev = continuation[t];
    }
    return total;
}

} // namespace deskrl::policy
