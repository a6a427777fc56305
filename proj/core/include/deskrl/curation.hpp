#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deskrl::curation {

// One prompt-answer record. proxy_loss and pass_rate are optional columns
// supplied externally (or by the CLI annotators); family/difficulty pass
// through untouched so curated corpora stay loadable as task corpora.
struct CorpusSample {
    std::string sample_id;
    std::string prompt_text;
    std::string reference_answer;
    std::string category;
    std::optional<std::string> family;
    std::optional<std::int64_t> difficulty;
    std::optional<double> proxy_loss;
    std::optional<double> pass_rate;

    friend bool operator==(const CorpusSample&, const CorpusSample&) = default;
};

using Corpus = std::vector<CorpusSample>;

struct StageCounts {
    std::string stage;
    std::int64_t in = 0;
    std::int64_t kept = 0;
    std::int64_t removed = 0; // in == kept + removed
};

struct CurationReport {
    std::vector<StageCounts> stages;
    std::map<std::string, double> category_weights_example; // weight of one sample per category

    std::string to_json() const;
};

// Drops samples whose proxy_loss exceeds the corpus quantile threshold
// (nearest-rank); ties with the threshold are kept. Order-stable.
Corpus loss_filter(const Corpus& corpus, double quantile, StageCounts* counts = nullptr);

// Removes any sample whose prompt or answer matches one of the regex rules.
Corpus pattern_filter(const Corpus& corpus, std::span<const std::string> rules,
                      StageCounts* counts = nullptr);

// Proof-style prompts the binary grader cannot score.
std::vector<std::string> default_pattern_rules();

// weight(sample) = target(category) / count(category); targets must cover
// exactly the categories present, be positive, and sum to 1.
std::map<std::string, double> reweight(const Corpus& corpus,
                                       const std::map<std::string, double>& targets);

// Keeps samples with lo < pass_rate < hi (strict); defaults drop exactly the
// pass-rate-0 and pass-rate-1 samples.
Corpus difficulty_filter(const Corpus& corpus, double lo = 0.0, double hi = 1.0,
                         StageCounts* counts = nullptr);

// Corpus JSONL exchange; key "task_id" matches the task-corpus schema.
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

} // namespace deskrl::curation
