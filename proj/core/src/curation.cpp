#include "deskrl/curation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include <nlohmann/json.hpp>

#include "deskrl/errors.hpp"

namespace deskrl::curation {

namespace {

void fill_counts(StageCounts* counts, const std::string& stage, std::size_t in, std::size_t kept) {
    if (!counts) return;
    counts->stage = stage;
    counts->in = static_cast<std::int64_t>(in);
    counts->kept = static_cast<std::int64_t>(kept);
    counts->removed = static_cast<std::int64_t>(in - kept);
}

} // namespace

Corpus loss_filter(const Corpus& corpus, double quantile, StageCounts* counts) {
    if (!(quantile > 0.0 && quantile < 1.0))
        throw contract_violation("loss_filter: quantile must be in (0, 1)");
    std::vector<std::string> missing;
    for (const auto& s : corpus)
        if (!s.proxy_loss) missing.push_back(s.sample_id);
    if (!missing.empty()) {
        std::string ids;
        for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
        throw config_error("loss_filter: samples missing proxy_loss: " + ids);
    }
    Corpus kept;
    if (!corpus.empty()) {
        std::vector<double> losses;
        losses.reserve(corpus.size());
        for (const auto& s : corpus) losses.push_back(*s.proxy_loss);
        std::sort(losses.begin(), losses.end());
        // Nearest-rank quantile: the ceil(q*N)-th smallest value.
        const auto rank = static_cast<std::size_t>(
            std::ceil(quantile * static_cast<double>(losses.size())));
        const double threshold = losses[std::max<std::size_t>(rank, 1) - 1];
        for (const auto& s : corpus)
            if (*s.proxy_loss <= threshold) kept.push_back(s);
    }
    fill_counts(counts, "loss_filter", corpus.size(), kept.size());
    return kept;
}

std::vector<std::string> default_pattern_rules() {
    return {"prove that", "show that"};
}

Corpus pattern_filter(const Corpus& corpus, std::span<const std::string> rules,
                      StageCounts* counts) {
    std::vector<std::regex> compiled;
    compiled.reserve(rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        try {
            compiled.emplace_back(rules[i], std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            throw config_error("pattern_filter: rule " + std::to_string(i) +
                               " does not compile: " + e.what());
        }
    }
    Corpus kept;
    for (const auto& s : corpus) {
        const bool remove = std::any_of(compiled.begin(), compiled.end(), [&](const std::regex& re) {
            return std::regex_search(s.prompt_text, re) ||
                   std::regex_search(s.reference_answer, re);
        });
        if (!remove) kept.push_back(s);
    }
    fill_counts(counts, "pattern_filter", corpus.size(), kept.size());
    return kept;
}

std::map<std::string, double> reweight(const Corpus& corpus,
                                       const std::map<std::string, double>& targets) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& s : corpus) counts[s.category] += 1;
    for (const auto& [cat, _] : counts)
        if (!targets.count(cat))
            throw config_error("reweight: category '" + cat + "' has no target");
    for (const auto& [cat, t] : targets) {
        if (!(t > 0.0)) throw config_error("reweight: target for '" + cat + "' must be positive");
        if (!counts.count(cat))
            throw config_error("reweight: target category '" + cat + "' not present in corpus");
    }
    double total = 0.0;
    for (const auto& [_, t] : targets) total += t;
    if (std::abs(total - 1.0) > 1e-9)
        throw config_error("reweight: targets must sum to 1");

    std::map<std::string, double> weights;
    for (const auto& s : corpus)
        weights[s.sample_id] = targets.at(s.category) / static_cast<double>(counts.at(s.category));
    return weights;
}

Corpus difficulty_filter(const Corpus& corpus, double lo, double hi, StageCounts* counts) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
        throw contract_violation("difficulty_filter: need 0 <= lo < hi <= 1");
    std::vector<std::string> missing;
    for (const auto& s : corpus)
        if (!s.pass_rate) missing.push_back(s.sample_id);
    if (!missing.empty()) {
        std::string ids;
        for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
        throw config_error("difficulty_filter: samples missing pass_rate: " + ids);
    }
    Corpus kept;
    for (const auto& s : corpus)
        if (*s.pass_rate > lo && *s.pass_rate < hi) kept.push_back(s);
    fill_counts(counts, "difficulty_filter", corpus.size(), kept.size());
    return kept;
}

std::string CurationReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    nlohmann::ordered_json stages_json = nlohmann::ordered_json::array();
    for (const auto& s : stages) {
        nlohmann::ordered_json e;
        e["stage"] = s.stage;
        e["in"] = s.in;
        e["kept"] = s.kept;
        e["removed"] = s.removed;
        stages_json.push_back(e);
    }
    j["stages"] = stages_json;
    if (!category_weights_example.empty()) {
        nlohmann::ordered_json w;
        for (const auto& [cat, weight] : category_weights_example) w[cat] = weight;
        j["per_sample_weight_by_category"] = w;
    }
    return j.dump(2) + "\n";
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("load_corpus: cannot open " + path.string());
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw config_error("load_corpus: line " + std::to_string(line_no) + ": " + e.what());
        }
        CorpusSample s;
        try {
            s.sample_id = j.contains("task_id") ? j.at("task_id").get<std::string>()
                                                : j.at("sample_id").get<std::string>();
            s.prompt_text = j.at("prompt_text").get<std::string>();
            s.reference_answer = j.at("reference_answer").get<std::string>();
            s.category = j.value("category", std::string("default"));
        } catch (const nlohmann::json::exception& e) {
            throw config_error("load_corpus: line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("family")) s.family = j.at("family").get<std::string>();
        if (j.contains("difficulty")) s.difficulty = j.at("difficulty").get<std::int64_t>();
        if (j.contains("proxy_loss")) s.proxy_loss = j.at("proxy_loss").get<double>();
        if (j.contains("pass_rate")) {
            s.pass_rate = j.at("pass_rate").get<double>();
            if (!(*s.pass_rate >= 0.0 && *s.pass_rate <= 1.0))
                throw config_error("load_corpus: line " + std::to_string(line_no) +
                                   ": pass_rate outside [0, 1]");
        }
        corpus.push_back(std::move(s));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("save_corpus: cannot write " + path.string());
    for (const auto& s : corpus) {
        nlohmann::ordered_json j;
        j["task_id"] = s.sample_id;
        if (s.family) j["family"] = *s.family;
        j["prompt_text"] = s.prompt_text;
        j["reference_answer"] = s.reference_answer;
        if (s.difficulty) j["difficulty"] = *s.difficulty;
        j["category"] = s.category;
        if (s.proxy_loss) j["proxy_loss"] = *s.proxy_loss;
        if (s.pass_rate) j["pass_rate"] = *s.pass_rate;
        out << j.dump() << "\n";
    }
}

} // namespace deskrl::curation
