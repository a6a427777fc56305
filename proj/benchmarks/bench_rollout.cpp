#include <benchmark/benchmark.h>

#include "deskrl/behavior.hpp"
#include "deskrl/policy.hpp"
#include "deskrl/taskgen.hpp"
#include "deskrl/verifier.hpp"

using namespace deskrl;

static void BM_SampleResponse(benchmark::State& state) {
    const Vocabulary& vocab = Vocabulary::standard();
    Rng init = seeded_rng(1, "bench.init");
    const auto params = policy::init_params(vocab, 4096, init);
    const auto prompt = vocab.tokenize_prompt("3 + 4 = ?");
    std::uint64_t i = 0;
    const Rng base = seeded_rng(1, "bench.sample");
    for (auto _ : state) {
        Rng rng = base.child(i++);
        auto tr = policy::sample_response(params, vocab, prompt, "t",
                                          state.range(0), 1.0, 1.0, rng);
        benchmark::DoNotOptimize(tr);
    }
}
BENCHMARK(BM_SampleResponse)->Arg(16)->Arg(64);

static void BM_Rollout512(benchmark::State& state) {
    const Vocabulary& vocab = Vocabulary::standard();
    Rng init = seeded_rng(2, "bench.init");
    const auto snap = policy::snapshot(policy::init_params(vocab, 4096, init), 1);
    Rng task_rng = seeded_rng(2, "bench.tasks");
    std::vector<taskgen::TaskInstance> tasks;
    for (int i = 0; i < 64; ++i)
        tasks.push_back(taskgen::generate_task(taskgen::Family::ADD, 1, vocab, task_rng));
    const Rng roll = seeded_rng(2, "bench.roll");
    for (auto _ : state) {
        auto batch = taskgen::rollout(snap, vocab, tasks, 8, 16, 1.0, 1.0, roll, 0,
                                      state.range(0));
        benchmark::DoNotOptimize(batch);
    }
    state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_Rollout512)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_GradeResponse(benchmark::State& state) {
    const std::string response =
        "first, we need to expand the square; wait, that's not right, "
        "let me try a different approach: \\boxed{\\frac{1}{2}} and finally \\boxed{42}";
    for (auto _ : state) {
        auto verdict = verifier::grade(response, "42");
        benchmark::DoNotOptimize(verdict);
    }
}
BENCHMARK(BM_GradeResponse);

static void BM_DetectBehaviors(benchmark::State& state) {
    const auto lexicon = behavior::Lexicon::defaults();
    behavior::Trace trace{
        "t1",
        "Let me see the image again. First, we need to count the rows; "
        "let me verify the totals against the column sums before moving on. "
        "This approach won't work for the diagonal, so let's first look at "
        "the numbers on the left and work through one region at a time.",
        "rl_step_1", true};
    for (auto _ : state) {
        auto dets = behavior::detect(trace, lexicon);
        benchmark::DoNotOptimize(dets);
    }
}
BENCHMARK(BM_DetectBehaviors);

BENCHMARK_MAIN();
