#include <doctest.h>

#include <filesystem>
#include <set>

#include "deskrl/errors.hpp"
#include "deskrl/taskgen.hpp"
#include "deskrl/curation.hpp"
#include "deskrl/verifier.hpp"

using namespace deskrl;
using namespace deskrl::taskgen;

namespace {

const Vocabulary& vocab() { return Vocabulary::standard(); }

// Scripted perfect responder: replays the ideal tokens as a trajectory.
Trajectory scripted_perfect(const TaskInstance& task) {
    Trajectory tr;
    tr.task_id = task.task_id;
    tr.prompt_hash = hash_tokens(task.prompt_tokens);
    for (Token t : ideal_response_tokens(task, vocab())) {
        tr.actions.push_back(t);
        tr.rewards.push_back(0.0);
        tr.old_logprobs.push_back(-0.1);
        tr.values.push_back(0.0);
    }
    tr.values.push_back(0.0);
    tr.terminated_by_eos = true;
    return tr;
}

} // namespace

TEST_CASE("generate_task is deterministic per stream") {
    Rng a = seeded_rng(3, "tasks");
    Rng b = seeded_rng(3, "tasks");
    for (int i = 0; i < 20; ++i) {
        const auto t1 = generate_task(Family::ADD, 1, vocab(), a);
        const auto t2 = generate_task(Family::ADD, 1, vocab(), b);
        CHECK(t1.task_id == t2.task_id);
        CHECK(t1.reference_answer == t2.reference_answer);
        CHECK(t1.prompt_tokens.size() == t2.prompt_tokens.size());
    }
}

TEST_CASE("add tasks render as 'a + b = ?' with the true sum") {
    Rng rng = seeded_rng(4, "tasks");
    for (int i = 0; i < 50; ++i) {
        const auto t = generate_task(Family::ADD, 1, vocab(), rng);
        const auto text = vocab().prompt_text(t.prompt_tokens);
        // single-digit operands: "a + b = ?"
        REQUIRE(text.size() == 9);
        const int a = text[0] - '0';
        const int b = text[4] - '0';
        CHECK(text.substr(1, 3) == " + ");
        CHECK(text.substr(5) == " = ?");
        CHECK(t.reference_answer == std::to_string(a + b));
        CHECK(t.prompt_tokens.back() == vocab().query());
        CHECK(t.category == "add");
    }
}

TEST_CASE("copy and compare families") {
    Rng rng = seeded_rng(5, "tasks");
    const auto copy = generate_task(Family::COPY, 1, vocab(), rng);
    const auto text = vocab().prompt_text(copy.prompt_tokens);
    CHECK(text.substr(0, 5) == "echo ");
    CHECK(copy.reference_answer == text.substr(5, text.size() - 7));

    const auto cmp = generate_task(Family::COMPARE, 1, vocab(), rng);
    const auto cmp_text = vocab().prompt_text(cmp.prompt_tokens);
    CHECK(cmp_text.substr(0, 4) == "max ");
    const int a = cmp_text[4] - '0';
    const int b = cmp_text[8] - '0';
    CHECK(cmp.reference_answer == std::to_string(std::max(a, b)));
}

TEST_CASE("sub tasks can carry negative references") {
    Rng rng = seeded_rng(6, "tasks");
    bool saw_negative = false;
    for (int i = 0; i < 200; ++i) {
        const auto t = generate_task(Family::SUB, 1, vocab(), rng);
        if (!t.reference_answer.empty() && t.reference_answer[0] == '-') {
            saw_negative = true;
            // the ideal response must still box it exactly
            const auto ideal = ideal_response_tokens(t, vocab());
            const auto graded = verifier::grade(vocab().detokenize(ideal), t.reference_answer);
            CHECK(graded.reward == 1.0);
        }
    }
    CHECK(saw_negative);
}

TEST_CASE("difficulty controls operand width") {
    Rng rng = seeded_rng(7, "tasks");
    const auto t = generate_task(Family::MUL, 3, vocab(), rng);
    CHECK(t.difficulty == 3);
    // operands in [0, 999] so the product stays below 10^6
    const long long ref = std::stoll(t.reference_answer);
    CHECK(ref >= 0);
    CHECK(ref <= 999ll * 999ll);
    CHECK_THROWS_AS(generate_task(Family::ADD, 0, vocab(), rng), contract_violation);
    CHECK_THROWS_AS(generate_task(Family::EXTERNAL, 1, vocab(), rng), contract_violation);
}

TEST_CASE("every generated task is solvable by the scripted-perfect policy") {
    Rng rng = seeded_rng(8, "tasks");
    for (Family fam : {Family::ADD, Family::SUB, Family::MUL, Family::COPY, Family::COMPARE}) {
        for (int d = 1; d <= 2; ++d) {
            for (int i = 0; i < 20; ++i) {
                const auto t = generate_task(fam, d, vocab(), rng);
                const auto tr = scripted_perfect(t);
                const auto verdict =
                    verifier::grade(vocab().detokenize(tr.actions), t.reference_answer);
                CHECK(verdict.reward == 1.0);
            }
        }
    }
}

TEST_CASE("rollout produces tasks x responses trajectories with terminal-only rewards") {
    Rng init = seeded_rng(9, "init");
    const auto params = policy::init_params(vocab(), 64, init);
    const auto snap = policy::snapshot(params, 12);

    Rng task_rng = seeded_rng(9, "tasks");
    std::vector<TaskInstance> tasks;
    for (int i = 0; i < 6; ++i)
        tasks.push_back(generate_task(Family::ADD, 1, vocab(), task_rng));

    const Rng roll = seeded_rng(9, "roll");
    const auto batch = rollout(snap, vocab(), tasks, 5, 8, 1.0, 1.0, roll, 3);
    CHECK(batch.trajectories.size() == 30);
    CHECK(batch.policy_version == 12);
    CHECK(batch.iteration == 3);
    for (const auto& tr : batch.trajectories) {
        tr.validate();
        CHECK(tr.length() <= 8);
        for (std::size_t t = 0; t + 1 < tr.rewards.size(); ++t) CHECK(tr.rewards[t] == 0.0);
    }
}

TEST_CASE("rollout at reference scale: 512 prompts x 16 responses = 8192 trajectories") {
    Rng init = seeded_rng(21, "init");
    auto params = policy::init_params(vocab(), 64, init);
    const auto snap = policy::snapshot(params, 1);
    Rng task_rng = seeded_rng(21, "tasks");
    std::vector<TaskInstance> tasks;
    for (int i = 0; i < 512; ++i)
        tasks.push_back(generate_task(Family::ADD, 1, vocab(), task_rng));
    const Rng roll = seeded_rng(21, "roll");
    const auto batch = rollout(snap, vocab(), tasks, 16, 8, 1.0, 1.0, roll, 0, 4);
    CHECK(batch.trajectories.size() == 8192);
}

TEST_CASE("rollout is deterministic and thread-count invariant") {
    Rng init = seeded_rng(10, "init");
    const auto params = policy::init_params(vocab(), 64, init);
    const auto snap = policy::snapshot(params, 1);
    Rng task_rng = seeded_rng(10, "tasks");
    std::vector<TaskInstance> tasks;
    for (int i = 0; i < 8; ++i)
        tasks.push_back(generate_task(Family::COPY, 1, vocab(), task_rng));

    const Rng r1 = seeded_rng(10, "roll");
    const auto b1 = rollout(snap, vocab(), tasks, 4, 8, 1.0, 1.0, r1, 0, 1);
    const Rng r2 = seeded_rng(10, "roll");
    const auto b2 = rollout(snap, vocab(), tasks, 4, 8, 1.0, 1.0, r2, 0, 4);
    REQUIRE(b1.trajectories.size() == b2.trajectories.size());
    for (std::size_t i = 0; i < b1.trajectories.size(); ++i) {
        CHECK(b1.trajectories[i].actions.size() == b2.trajectories[i].actions.size());
        for (std::size_t t = 0; t < b1.trajectories[i].actions.size(); ++t)
            CHECK(b1.trajectories[i].actions[t] == b2.trajectories[i].actions[t]);
        CHECK(b1.trajectories[i].rewards == b2.trajectories[i].rewards);
        CHECK(b1.trajectories[i].old_logprobs == b2.trajectories[i].old_logprobs);
    }
}

TEST_CASE("uniform-random policy rarely earns reward on add tasks") {
    Rng init = seeded_rng(11, "init");
    auto params = policy::init_params(vocab(), 64, init);
    std::fill(params.policy_weights.begin(), params.policy_weights.end(), 0.0);
    const auto snap = policy::snapshot(params, 1);

    Rng task_rng = seeded_rng(11, "tasks");
    std::vector<TaskInstance> tasks;
    for (int i = 0; i < 100; ++i)
        tasks.push_back(generate_task(Family::ADD, 1, vocab(), task_rng));
    const Rng roll = seeded_rng(11, "roll");
    const auto batch = rollout(snap, vocab(), tasks, 100, 8, 1.0, 1.0, roll); // 10^4 trajectories
    CHECK(batch.mean_terminal_reward() < 0.05);
}

TEST_CASE("pass_rate endpoints") {
    Rng init = seeded_rng(12, "init");
    auto params = policy::init_params(vocab(), 64, init);
    const auto snap = policy::snapshot(params, 1);
    Rng task_rng = seeded_rng(12, "tasks");
    const auto task = generate_task(Family::ADD, 1, vocab(), task_rng);

    // a policy that can never open a box scores 0
    auto no_box = params;
    std::fill(no_box.policy_weights.begin(), no_box.policy_weights.end(), 0.0);
    const auto s0 = policy::encode_state(hash_tokens(task.prompt_tokens), 0, vocab().pad(),
                                         no_box.feature_dim);
    for (std::int64_t f = 0; f < no_box.feature_dim; ++f)
        no_box.policy_row(static_cast<std::uint32_t>(f))[vocab().box_open().id] = -1e4;
    const Rng r = seeded_rng(12, "pass");
    CHECK(pass_rate(policy::snapshot(no_box, 2), vocab(), task, 50, 8, r) == 0.0);
    CHECK_THROWS_AS(pass_rate(snap, vocab(), task, 0, 8, r), contract_violation);
}

TEST_CASE("exported task corpora load as curation corpora") {
    const auto dir = std::filesystem::temp_directory_path() / "deskrl_test_interop";
    std::filesystem::create_directories(dir);
    const auto path = dir / "tasks.jsonl";
    Rng task_rng = seeded_rng(22, "tasks");
    std::vector<TaskInstance> tasks;
    for (int i = 0; i < 3; ++i)
        tasks.push_back(generate_task(Family::MUL, 1, vocab(), task_rng));
    export_tasks(tasks, vocab(), path);

    const auto corpus = deskrl::curation::load_corpus(path);
    REQUIRE(corpus.size() == 3);
    CHECK(corpus[0].sample_id == tasks[0].task_id);
    CHECK(corpus[0].reference_answer == tasks[0].reference_answer);
    CHECK(corpus[0].category == "mul");
    CHECK(corpus[0].family == "mul");
    std::filesystem::remove_all(dir);
}

TEST_CASE("task corpus export/import round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "deskrl_test_tasks";
    std::filesystem::create_directories(dir);
    const auto path = dir / "tasks.jsonl";

    Rng task_rng = seeded_rng(13, "tasks");
    std::vector<TaskInstance> tasks;
    for (Family fam : {Family::ADD, Family::SUB, Family::MUL, Family::COPY, Family::COMPARE})
        tasks.push_back(generate_task(fam, 2, vocab(), task_rng));
    export_tasks(tasks, vocab(), path);
    const auto loaded = import_tasks(path, vocab());
    REQUIRE(loaded.size() == tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        CHECK(loaded[i].task_id == tasks[i].task_id);
        CHECK(loaded[i].family == tasks[i].family);
        CHECK(loaded[i].reference_answer == tasks[i].reference_answer);
        CHECK(loaded[i].difficulty == tasks[i].difficulty);
        CHECK(loaded[i].category == tasks[i].category);
        REQUIRE(loaded[i].prompt_tokens.size() == tasks[i].prompt_tokens.size());
        for (std::size_t t = 0; t < tasks[i].prompt_tokens.size(); ++t)
            CHECK(loaded[i].prompt_tokens[t] == tasks[i].prompt_tokens[t]);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("reference_nll is positive and decreases for a better policy") {
    Rng init = seeded_rng(14, "init");
    auto params = policy::init_params(vocab(), 128, init);
    Rng task_rng = seeded_rng(14, "tasks");
    const auto task = generate_task(Family::COPY, 1, vocab(), task_rng);
    const double base = reference_nll(params, vocab(), task);
    CHECK(base > 0.0);

    // boost exactly the ideal continuation's logits
    auto better = params;
    const auto ideal = ideal_response_tokens(task, vocab());
    Token prev = vocab().pad();
    const auto ph = hash_tokens(task.prompt_tokens);
    for (std::size_t t = 0; t < ideal.size(); ++t) {
        const auto s = policy::encode_state(ph, static_cast<std::int64_t>(t), prev,
                                            better.feature_dim);
        better.policy_row(s.idx[0])[ideal[t].id] += 5.0;
        prev = ideal[t];
    }
    CHECK(reference_nll(better, vocab(), task) < base);
}
