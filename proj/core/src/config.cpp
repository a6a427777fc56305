#include "deskrl/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "deskrl/errors.hpp"

namespace deskrl {

using ordered_json = nlohmann::ordered_json;

void TrainConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw config_error("gamma must be in [0, 1]");
    if (!(lam >= 0.0 && lam <= 1.0)) throw config_error("lam must be in [0, 1]");
    if (!(clip_eps > 0.0)) throw config_error("clip_eps must be > 0");
    if (!(policy_lr > 0.0)) throw config_error("policy_lr must be > 0");
    if (!(critic_lr > 0.0)) throw config_error("critic_lr must be > 0");
    if (!(lr_scale > 0.0)) throw config_error("lr_scale must be > 0");
    if (!(critic_lr_scale > 0.0)) throw config_error("critic_lr_scale must be > 0");
    if (warmup_steps < 0) throw config_error("warmup_steps must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw config_error("beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw config_error("beta2 must be in [0, 1)");
    if (prompts_per_iter < 1) throw config_error("prompts_per_iter must be >= 1");
    if (responses_per_prompt < 1) throw config_error("responses_per_prompt must be >= 1");
    if (critic_steps_per_iter < 1) throw config_error("critic_steps_per_iter must be >= 1");
    curriculum::validate(curriculum);
}

TrainConfig default_config() {
    TrainConfig cfg;
    cfg.curriculum.stages = {{0, 32}, {300, 48}, {700, 64}};
    return cfg;
}

void RunConfig::validate() const {
    train.validate();
    if (iterations < 1) throw config_error("iterations must be >= 1");
    if (snapshot_every < 0) throw config_error("snapshot_every must be >= 0");
    if (families.empty()) throw config_error("families must not be empty");
    if (difficulty < 1) throw config_error("difficulty must be >= 1");
    if (feature_dim < 1) throw config_error("feature_dim must be >= 1");
    if (!(temperature > 0.0)) throw config_error("temperature must be > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw config_error("top_p must be in (0, 1]");
    if (threads < 1) throw config_error("threads must be >= 1");
    if (average_mode != "all" && average_mode != "last_quartile")
        throw config_error("average_mode must be 'all' or 'last_quartile'");
    for (auto it : average_iterations)
        if (it < 1) throw config_error("average_iterations entries must be >= 1");
}

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.train = default_config();
    return cfg;
}

namespace {

ordered_json curriculum_to_json(const curriculum::CurriculumSchedule& s) {
    ordered_json arr = ordered_json::array();
    for (const auto& st : s.stages)
        arr.push_back(ordered_json::array({st.start_iteration, st.max_length}));
    return arr;
}

curriculum::CurriculumSchedule curriculum_from_json(const ordered_json& arr) {
    if (!arr.is_array()) throw config_error("curriculum must be an array of [start, length] pairs");
    curriculum::CurriculumSchedule s;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw config_error("curriculum entries must be [start, length] integer pairs");
        s.stages.push_back({e[0].get<std::int64_t>(), e[1].get<std::int64_t>()});
    }
    curriculum::validate(s);
    return s;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "gamma", "lam", "clip_eps", "policy_lr", "critic_lr", "lr_scale", "critic_lr_scale",
        "warmup_steps", "beta1", "beta2", "prompts_per_iter", "responses_per_prompt",
        "critic_steps_per_iter", "curriculum", "seed",
        "iterations", "snapshot_every", "families", "difficulty", "feature_dim",
        "temperature", "top_p", "threads", "record_wall_time",
        "average_iterations", "average_mode"};
    return keys;
}

template <typename T>
void read_key(const ordered_json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config key '") + key + "': " + e.what());
    }
}

} // namespace

std::string serialize_config(const RunConfig& cfg) {
    ordered_json j;
    j["gamma"] = cfg.train.gamma;
    j["lam"] = cfg.train.lam;
    j["clip_eps"] = cfg.train.clip_eps;
    j["policy_lr"] = cfg.train.policy_lr;
    j["critic_lr"] = cfg.train.critic_lr;
    j["lr_scale"] = cfg.train.lr_scale;
    j["critic_lr_scale"] = cfg.train.critic_lr_scale;
    j["warmup_steps"] = cfg.train.warmup_steps;
    j["beta1"] = cfg.train.beta1;
    j["beta2"] = cfg.train.beta2;
    j["prompts_per_iter"] = cfg.train.prompts_per_iter;
    j["responses_per_prompt"] = cfg.train.responses_per_prompt;
    j["critic_steps_per_iter"] = cfg.train.critic_steps_per_iter;
    j["curriculum"] = curriculum_to_json(cfg.train.curriculum);
    j["seed"] = cfg.train.seed;
    j["iterations"] = cfg.iterations;
    j["snapshot_every"] = cfg.snapshot_every;
    j["families"] = cfg.families;
    j["difficulty"] = cfg.difficulty;
    j["feature_dim"] = cfg.feature_dim;
    j["temperature"] = cfg.temperature;
    j["top_p"] = cfg.top_p;
    j["threads"] = cfg.threads;
    j["record_wall_time"] = cfg.record_wall_time;
    j["average_iterations"] = cfg.average_iterations;
    j["average_mode"] = cfg.average_mode;
    return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config parse: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known_keys().count(key))
            throw config_error("unknown config key '" + key + "'");

    RunConfig cfg = default_run_config();
    read_key(j, "gamma", cfg.train.gamma);
    read_key(j, "lam", cfg.train.lam);
    read_key(j, "clip_eps", cfg.train.clip_eps);
    read_key(j, "policy_lr", cfg.train.policy_lr);
    read_key(j, "critic_lr", cfg.train.critic_lr);
    read_key(j, "lr_scale", cfg.train.lr_scale);
    read_key(j, "critic_lr_scale", cfg.train.critic_lr_scale);
    read_key(j, "warmup_steps", cfg.train.warmup_steps);
    read_key(j, "beta1", cfg.train.beta1);
    read_key(j, "beta2", cfg.train.beta2);
    read_key(j, "prompts_per_iter", cfg.train.prompts_per_iter);
    read_key(j, "responses_per_prompt", cfg.train.responses_per_prompt);
    read_key(j, "critic_steps_per_iter", cfg.train.critic_steps_per_iter);
    if (j.contains("curriculum")) cfg.train.curriculum = curriculum_from_json(j.at("curriculum"));
    read_key(j, "seed", cfg.train.seed);
    read_key(j, "iterations", cfg.iterations);
    read_key(j, "snapshot_every", cfg.snapshot_every);
    read_key(j, "families", cfg.families);
    read_key(j, "difficulty", cfg.difficulty);
    read_key(j, "feature_dim", cfg.feature_dim);
    read_key(j, "temperature", cfg.temperature);
    read_key(j, "top_p", cfg.top_p);
    read_key(j, "threads", cfg.threads);
    read_key(j, "record_wall_time", cfg.record_wall_time);
    read_key(j, "average_iterations", cfg.average_iterations);
    read_key(j, "average_mode", cfg.average_mode);
    cfg.validate();
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

void save_config_file(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write config file: " + path.string());
    out << serialize_config(cfg);
}

} // namespace deskrl
