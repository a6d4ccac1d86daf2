#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "gsmpl/check.hpp"
#include "gsmpl/corpus.hpp"
#include "gsmpl/evaluator.hpp"
#include "gsmpl/generation.hpp"
#include "gsmpl/parser.hpp"
#include "gsmpl/printer.hpp"

using namespace gsmpl;

namespace {

const std::filesystem::path kCorpus = std::filesystem::path(GSMPL_FIXTURES) / "corpus/gsm8k_prolog.jsonl";

const std::vector<Sample>& corpus() {
  static const std::vector<Sample> samples = load_samples(kCorpus, Schema::Gsm8kProlog);
  return samples;
}

void BM_ParseProgram(benchmark::State& state) {
  const std::string& code = *corpus()[state.range(0)].prolog;
  for (auto _ : state) benchmark::DoNotOptimize(parse_program(code));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(code.size()));
}
BENCHMARK(BM_ParseProgram)->Arg(0)->Arg(9);

void BM_VerifyGoldCorpus(benchmark::State& state) {
  for (auto _ : state)
    for (const Sample& s : corpus()) benchmark::DoNotOptimize(verify_candidate(s, *s.prolog));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus().size()));
}
BENCHMARK(BM_VerifyGoldCorpus);

void BM_Recursion(benchmark::State& state) {
  Program p = parse_program(
      "sum(0, 0).\n"
      "sum(N, S) :- N > 0, M is N - 1, sum(M, T), S is T + N.\n"
      "solve(X) :- sum(" + std::to_string(state.range(0)) + ", X).");
  for (auto _ : state) benchmark::DoNotOptimize(run_entry(p));
}
BENCHMARK(BM_Recursion)->Arg(100)->Arg(1000)->Arg(5000);

void BM_Between(benchmark::State& state) {
  Program p = parse_program("solve(X) :- between(1, 100000, X), X * X > " + std::to_string(state.range(0)) + ".");
  for (auto _ : state) benchmark::DoNotOptimize(run_entry(p));
}
BENCHMARK(BM_Between)->Arg(1000000)->Arg(100000000);

void BM_PrintTerm(benchmark::State& state) {
  Term t = parse_term("f([1, 2.5, 'a b' | T], {X = Y * 3 + 1}, g(h(i(j))), -(1), - 1)");
  for (auto _ : state) benchmark::DoNotOptimize(print_term(t));
}
BENCHMARK(BM_PrintTerm);

void BM_BuildPrompt(benchmark::State& state) {
  std::vector<Exemplar> fixed;
  for (int i = 0; i < 8; ++i) fixed.push_back(Exemplar::from_sample(corpus()[i]));
  PromptPool pool(fixed, 1);
  for (int i = 0; i < state.range(0); ++i)
    pool.add({"v" + std::to_string(i), "question", "#### 1", std::string(10 + i % 300, 'x')});
  Sample target{"target", "How many?", "#### 3", std::nullopt};
  std::uint64_t attempt = 0;
  for (auto _ : state) {
    std::mt19937_64 rng(draw_seed(pool.seed(), target.id, attempt++));
    benchmark::DoNotOptimize(build_prompt(target, pool, rng));
  }
}
BENCHMARK(BM_BuildPrompt)->Arg(64)->Arg(5000);

void BM_Aggregate(benchmark::State& state) {
  std::vector<Outcome> outcomes;
  std::mt19937_64 rng(3);
  for (int i = 0; i < state.range(0); ++i) {
    auto cls = static_cast<OutcomeClass>(rng() % 3);
    outcomes.push_back({"s" + std::to_string(i), Part::Code, cls, cls == OutcomeClass::Correct ? "" : "x"});
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(outcomes, Part::Code));
}
BENCHMARK(BM_Aggregate)->Arg(1319);

}  // namespace

BENCHMARK_MAIN();
