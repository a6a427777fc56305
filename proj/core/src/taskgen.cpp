#include "deskrl/taskgen.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "deskrl/errors.hpp"
#include "deskrl/verifier.hpp"

namespace deskrl::taskgen {

std::string family_name(Family f) {
    switch (f) {
        case Family::ADD: return "add";
        case Family::SUB: return "sub";
        case Family::MUL: return "mul";
        case Family::COPY: return "copy";
        case Family::COMPARE: return "compare";
        case Family::EXTERNAL: return "external";
    }
    throw contract_violation("family_name: bad enum value");
}

std::optional<Family> parse_family(std::string_view name) {
    if (name == "add") return Family::ADD;
    if (name == "sub") return Family::SUB;
    if (name == "mul") return Family::MUL;
    if (name == "copy") return Family::COPY;
    if (name == "compare") return Family::COMPARE;
    if (name == "external") return Family::EXTERNAL;
    return std::nullopt;
}

namespace {

std::int64_t operand_bound(std::int64_t difficulty) {
    std::int64_t bound = 1;
    for (std::int64_t i = 0; i < difficulty; ++i) bound *= 10;
    return bound - 1; // difficulty-digit operands: [0, 10^d - 1]
}

void append_number(std::vector<Token>& out, std::int64_t v, const Vocabulary& vocab) {
    for (Token t : vocab.tokenize_answer(std::to_string(v))) out.push_back(t);
}

} // namespace

TaskInstance generate_task(Family family, std::int64_t difficulty, const Vocabulary& vocab,
                           Rng& rng) {
    if (difficulty < 1) throw contract_violation("generate_task: difficulty must be >= 1");
    if (family == Family::EXTERNAL)
        throw contract_violation("generate_task: EXTERNAL tasks come from import, not generation");

    const std::int64_t hi = operand_bound(difficulty);
    TaskInstance task;
    task.family = family;
    task.difficulty = difficulty;
    task.category = family_name(family);

    const auto op_token = [&](const char* sym) {
        auto t = vocab.find(sym);
        if (!t) throw contract_violation(std::string("generate_task: vocabulary lacks '") + sym + "'");
        return *t;
    };

    switch (family) {
        case Family::ADD:
        case Family::SUB:
        case Family::MUL: {
            const std::int64_t a = rng.uniform_int(0, hi);
            const std::int64_t b = rng.uniform_int(0, hi);
            const char* sym = family == Family::ADD ? "+" : family == Family::SUB ? "-" : "*";
            const std::int64_t ref = family == Family::ADD ? a + b
                                   : family == Family::SUB ? a - b
                                                           : a * b;
            append_number(task.prompt_tokens, a, vocab);
            task.prompt_tokens.push_back(op_token(sym));
            append_number(task.prompt_tokens, b, vocab);
            task.prompt_tokens.push_back(op_token("="));
            task.reference_answer = std::to_string(ref);
            task.task_id = family_name(family) + std::to_string(difficulty) + ":" +
                           std::to_string(a) + sym + std::to_string(b);
            break;
        }
        case Family::COPY: {
            const std::int64_t v = rng.uniform_int(0, hi);
            task.prompt_tokens.push_back(op_token("echo"));
            append_number(task.prompt_tokens, v, vocab);
            task.reference_answer = std::to_string(v);
            task.task_id = "copy" + std::to_string(difficulty) + ":" + std::to_string(v);
            break;
        }
        case Family::COMPARE: {
            const std::int64_t a = rng.uniform_int(0, hi);
            const std::int64_t b = rng.uniform_int(0, hi);
            task.prompt_tokens.push_back(op_token("max"));
            append_number(task.prompt_tokens, a, vocab);
            task.prompt_tokens.push_back(op_token(","));
            append_number(task.prompt_tokens, b, vocab);
            task.reference_answer = std::to_string(std::max(a, b));
            task.task_id = "compare" + std::to_string(difficulty) + ":" +
                           std::to_string(a) + "," + std::to_string(b);
            break;
        }
        case Family::EXTERNAL:
            break; // unreachable
    }
    task.prompt_tokens.push_back(vocab.query());
    return task;
}

std::vector<Token> ideal_response_tokens(const TaskInstance& task, const Vocabulary& vocab) {
    std::vector<Token> out;
    out.push_back(vocab.box_open());
    for (Token t : vocab.tokenize_answer(task.reference_answer)) out.push_back(t);
    out.push_back(vocab.box_close());
    out.push_back(vocab.eos());
    return out;
}

double reference_nll(const policy::PolicyParams& params, const Vocabulary& vocab,
                     const TaskInstance& task) {
    const auto ideal = ideal_response_tokens(task, vocab);
    return -policy::sequence_logprob(params, task.prompt_tokens, ideal, vocab);
}

namespace {

void grade_trajectory(Trajectory& tr, const Vocabulary& vocab, const TaskInstance& task) {
    const std::string text = vocab.detokenize(tr.actions);
    const auto verdict = verifier::grade(text, task.reference_answer);
    tr.rewards.back() = verdict.reward;
}

} // namespace

RolloutBatch rollout(const policy::PolicySnapshot& snapshot, const Vocabulary& vocab,
                     std::span<const TaskInstance> tasks, std::int64_t n_responses,
                     std::int64_t max_len, double temperature, double top_p,
                     const Rng& rng, std::int64_t iteration, std::int64_t threads) {
    if (n_responses < 1) throw contract_violation("rollout: n_responses must be >= 1");
    if (tasks.empty()) throw contract_violation("rollout: no tasks");

    RolloutBatch batch;
    batch.iteration = iteration;
    batch.policy_version = snapshot.version;
    batch.trajectories.resize(tasks.size() * static_cast<std::size_t>(n_responses));

    const auto run_task = [&](std::size_t task_idx) {
        Rng task_rng = rng.child(task_idx);
        for (std::int64_t j = 0; j < n_responses; ++j) {
            Rng sample_rng = task_rng.child(static_cast<std::uint64_t>(j));
            Trajectory tr = policy::sample_response(
                snapshot.params, vocab, tasks[task_idx].prompt_tokens,
                tasks[task_idx].task_id, max_len, temperature, top_p, sample_rng);
            grade_trajectory(tr, vocab, tasks[task_idx]);
            batch.trajectories[task_idx * static_cast<std::size_t>(n_responses) +
                               static_cast<std::size_t>(j)] = std::move(tr);
        }
    };

    const std::size_t n_workers = std::min<std::size_t>(
        static_cast<std::size_t>(std::max<std::int64_t>(threads, 1)), tasks.size());
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < tasks.size(); i += n_workers) run_task(i);
            });
        for (auto& th : pool) th.join();
    }
    return batch;
}

double pass_rate(const policy::PolicySnapshot& snapshot, const Vocabulary& vocab,
                 const TaskInstance& task, std::int64_t k, std::int64_t max_len,
                 const Rng& rng) {
    if (k < 1) throw contract_violation("pass_rate: k must be >= 1");
    std::int64_t hits = 0;
    for (std::int64_t j = 0; j < k; ++j) {
        Rng sample_rng = rng.child(static_cast<std::uint64_t>(j));
        Trajectory tr = policy::sample_response(snapshot.params, vocab, task.prompt_tokens,
                                                task.task_id, max_len, 1.0, 1.0, sample_rng);
        const std::string text = vocab.detokenize(tr.actions);
        if (verifier::grade(text, task.reference_answer).matched) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

void export_tasks(std::span<const TaskInstance> tasks, const Vocabulary& vocab,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("export_tasks: cannot write " + path.string());
    for (const auto& task : tasks) {
        nlohmann::ordered_json j;
        j["task_id"] = task.task_id;
        j["family"] = family_name(task.family);
        j["prompt_text"] = vocab.prompt_text(task.prompt_tokens);
        j["reference_answer"] = task.reference_answer;
        j["difficulty"] = task.difficulty;
        j["category"] = task.category;
        out << j.dump() << "\n";
    }
}

std::vector<TaskInstance> import_tasks(const std::filesystem::path& path,
                                       const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw config_error("import_tasks: cannot open " + path.string());
    std::vector<TaskInstance> tasks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw config_error("import_tasks: line " + std::to_string(line_no) + ": " + e.what());
        }
        TaskInstance task;
        try {
            task.task_id = j.at("task_id").get<std::string>();
            task.reference_answer = j.at("reference_answer").get<std::string>();
            task.prompt_tokens = vocab.tokenize_prompt(j.at("prompt_text").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw config_error("import_tasks: line " + std::to_string(line_no) + ": " + e.what());
        }
        if (task.reference_answer.empty())
            throw config_error("import_tasks: line " + std::to_string(line_no) +
                               ": empty reference_answer");
        if (j.contains("family")) {
            const auto fam = parse_family(j.at("family").get<std::string>());
            if (!fam)
                throw config_error("import_tasks: line " + std::to_string(line_no) +
                                   ": unknown family '" + j.at("family").get<std::string>() + "'");
            task.family = *fam;
        }
        task.difficulty = j.value("difficulty", std::int64_t{1});
        task.category = j.value("category", family_name(task.family));
        if (task.prompt_tokens.empty() || !(task.prompt_tokens.back() == vocab.query()))
            task.prompt_tokens.push_back(vocab.query());
        tasks.push_back(std::move(task));
    }
    return tasks;
}

} // namespace deskrl::taskgen
