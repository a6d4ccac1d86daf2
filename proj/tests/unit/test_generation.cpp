#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "gsmpl/generation.hpp"

using namespace gsmpl;

namespace {

const std::filesystem::path kGen = std::filesystem::path(GSMPL_FIXTURES) / "generation";

Exemplar make(std::string id, std::size_t code_len) {
  return Exemplar{std::move(id), "question", "#### 1", std::string(code_len, 'x')};
}

std::vector<Exemplar> eight() {
  std::vector<Exemplar> fixed;
  for (int i = 0; i < 8; ++i) fixed.push_back(make("fixed-" + std::to_string(i), 10));
  return fixed;
}

std::vector<Exemplar> load(const std::filesystem::path& path) {
  std::vector<Exemplar> out;
  for (const Sample& s : load_samples(path, Schema::Gsm8kProlog)) out.push_back(Exemplar::from_sample(s));
  return out;
}

std::string dump(const LoopResult& r) {
  std::ostringstream out;
  write_samples(out, r.annotated);
  out << "--\n";
  write_samples(out, r.residue);
  out << "--\n";
  for (const LogEvent& e : r.log) out << e.to_json() << '\n';
  return out.str();
}

LoopResult run_fixture_loop(std::size_t jobs) {
  auto transcript = std::make_shared<const Transcript>(Transcript::load(kGen / "transcript.jsonl"));
  StubGenerator t1(transcript, 1), t2(transcript, 2);
  Generator* tiers[] = {&t1, &t2};
  PromptPool pool = update_pool(PromptPool(load(kGen / "fixed.jsonl"), 7), load(kGen / "verified.jsonl"));
  LoopConfig config;
  config.jobs = jobs;
  return retrieval_loop(load_samples(kGen / "targets.jsonl", Schema::Gsm8k), std::move(pool), tiers, config);
}

}  // namespace

TEST_CASE("char_count counts code points") {
  CHECK(char_count("abc") == 3);
  CHECK(char_count("é€😀") == 3);
  CHECK(char_count("") == 0);
}

TEST_CASE("pool keeps eight fixed exemplars and the longest code per id") {
  CHECK_THROWS_AS(PromptPool(std::vector<Exemplar>(7, make("f", 1)), 1), std::invalid_argument);
  PromptPool pool(eight(), 1);
  CHECK(pool.add(make("a", 5)));
  CHECK_FALSE(pool.add(make("a", 5)));
  CHECK_FALSE(pool.add(make("a", 3)));
  CHECK(pool.add(make("a", 9)));
  CHECK(pool.verified().size() == 1);
  CHECK(pool.verified().at("a").code.size() == 9);
  std::vector<Exemplar> more = {make("b", 1), make("c", 2)};
  PromptPool grown = update_pool(pool, more);
  CHECK(grown.fixed().size() == 8);
  CHECK(grown.verified().size() == 3);
  CHECK(pool.verified().size() == 1);
}

TEST_CASE("property: longest set equals a brute-force sort") {
  std::mt19937_64 rng(64);
  for (int round = 0; round < 200; ++round) {
    PromptPool pool(eight(), round);
    std::map<std::string, std::size_t> best;
    for (unsigned n = rng() % 150; n > 0; --n) {
      std::string id = "s" + std::to_string(rng() % 120);
      std::size_t len = 1 + rng() % 12;
      pool.add(make(id, len));
      best[id] = std::max(best[id], len);
    }
    std::vector<std::pair<std::string, std::size_t>> brute(best.begin(), best.end());
    std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (brute.size() > kLongestSetSize) brute.resize(kLongestSetSize);
    auto got = pool.longest();
    REQUIRE(got.size() == brute.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i]->sample_id == brute[i].first);
      CHECK(got[i]->length() == brute[i].second);
    }
  }
}

TEST_CASE("prompts carry eight fixed and five random exemplars") {
  PromptPool pool(eight(), 3);
  for (int i = 0; i < 100; ++i) pool.add(make("v" + std::to_string(i), 1 + i % 17));
  auto longest = pool.longest();
  std::set<std::string> eligible;
  for (const Exemplar* e : longest) eligible.insert(e->sample_id);
  for (int i = 0; i < 300; ++i) {
    Sample target{longest[i % 64]->sample_id, "Q", "#### 1", std::nullopt};
    std::mt19937_64 rng(draw_seed(pool.seed(), target.id, 0));
    Prompt p = build_prompt(target, pool, rng);
    CHECK(p.fixed_ids.size() == kFixedExemplars);
    REQUIRE(p.random_ids.size() == kRandomExemplars);
    CHECK_FALSE(p.fallback);
    std::set<std::string> unique(p.random_ids.begin(), p.random_ids.end());
    CHECK(unique.size() == kRandomExemplars);
    CHECK_FALSE(unique.count(target.id));
    for (const auto& id : p.random_ids) CHECK(eligible.count(id));
    CHECK(p.user.find("Question: Q\nSolution:\n#### 1\nProlog:\n") != std::string::npos);
  }
}

TEST_CASE("small pools fall back or bootstrap") {
  PromptPool pool(eight(), 3);
  pool.add(make("only", 4));
  Sample target{"t", "Q", "#### 1", std::nullopt};
  std::mt19937_64 rng(1);
  Prompt fallback = build_prompt(target, pool, rng);
  CHECK(fallback.fallback);
  CHECK(fallback.random_ids == std::vector<std::string>{"only"});
  std::vector<Exemplar> boot;
  for (int i = 0; i < 20; ++i) boot.push_back(make("boot-" + std::to_string(i), 3));
  PromptOptions options;
  options.bootstrap = boot;
  Prompt booted = build_prompt(target, pool, rng, options);
  CHECK(booted.bootstrap);
  CHECK(booted.fixed_ids.size() == 20);
  CHECK(booted.random_ids.empty());
}

TEST_CASE("each of the 64 longest is drawn with probability 5/64") {
  PromptPool pool(eight(), 11);
  for (int i = 0; i < 90; ++i) pool.add(make("v" + std::to_string(i), 1 + i));
  std::map<std::string, int> counts;
  const int draws = 1000;
  Sample target{"outside", "Q", "#### 1", std::nullopt};
  for (int attempt = 0; attempt < draws; ++attempt) {
    std::mt19937_64 rng(draw_seed(pool.seed(), target.id, attempt));
    for (const auto& id : build_prompt(target, pool, rng).random_ids) ++counts[id];
  }
  CHECK(counts.size() == kLongestSetSize);
  const double p = 5.0 / 64.0;
  const double mean = draws * p;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (const Exemplar* e : pool.longest()) {
    INFO(e->sample_id << " drawn " << counts[e->sample_id]);
    CHECK(std::abs(counts[e->sample_id] - mean) <= 3 * sigma);
  }
}

TEST_CASE("seeds and draws are deterministic") {
  CHECK(draw_seed(1, "a", 0) == draw_seed(1, "a", 0));
  CHECK(draw_seed(1, "a", 0) != draw_seed(1, "a", 1));
  CHECK(draw_seed(1, "a", 0) != draw_seed(2, "a", 0));
  CHECK(draw_seed(1, "a", 0) != draw_seed(1, "b", 0));
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    auto x = uniform_below(a, 7);
    CHECK(x < 7);
    CHECK(x == uniform_below(b, 7));
  }
  std::mt19937_64 fixed(42);
  CHECK(uniform_below(fixed, 1) == 0);
}

TEST_CASE("extract_code") {
  CHECK(extract_code("Here:\n```prolog\nsolve(1).\n```\nDone") == "solve(1).");
  CHECK(extract_code("<code>\nsolve(2).\n</code>") == "solve(2).");
  CHECK(extract_code("  solve(3).  \n") == "solve(3).");
}

TEST_CASE("transcript replay") {
  std::istringstream in(
      "{\"tier\": 1, \"id\": \"a\", \"response\": \"one\"}\n"
      "{\"tier\": 1, \"id\": \"a\", \"response\": \"two\"}\n"
      "{\"tier\": 2, \"id\": \"*\", \"error\": \"down\"}\n");
  auto t = std::make_shared<const Transcript>(Transcript::parse(in));
  CHECK(t->tiers() == 2);
  StubGenerator g1(t, 1), g2(t, 2);
  ChatRequest r;
  r.sample_id = "a";
  CHECK(g1.generate(r) == "one");
  CHECK(g1.generate(r) == "two");
  CHECK(g1.generate(r) == "two");
  CHECK_THROWS_AS(g2.generate(r), GenerationError);
  r.sample_id = "b";
  CHECK_THROWS_AS(g1.generate(r), GenerationError);
  std::istringstream bad("{\"tier\": 0, \"id\": \"a\", \"response\": \"x\"}\n");
  CHECK_THROWS_AS(Transcript::parse(bad), DataFormatError);
}

TEST_CASE("loop configuration is validated") {
  LoopConfig c;
  CHECK_NOTHROW(c.validate());
  c.bottleneck_threshold = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.bottleneck_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.bottleneck_threshold = 0.5;
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("verify_candidate") {
  Sample s{"a", "Q", "3 + 4 = 7\n#### 7", std::nullopt};
  CHECK(verify_candidate(s, "solve(X) :- X is 3 + 4.").correct());
  CHECK(verify_candidate(s, "solve(X) :- X is 3 * 4.").reason == "wrong-answer");
  Sample no_gold{"b", "Q", "seven", std::nullopt};
  CHECK(verify_candidate(no_gold, "solve(7).").reason == "no-gold-answer");
}

TEST_CASE("retrieval loop over the stub transcript") {
  LoopResult r = run_fixture_loop(1);
  CHECK(r.annotated.size() == 14);
  CHECK(r.residue.size() == 2);
  for (const Sample& s : r.annotated) {
    REQUIRE(s.prolog);
    CHECK(verify_candidate(s, *s.prolog).correct());
  }
  for (const Sample& s : r.residue) CHECK_FALSE(s.prolog);
  CHECK(r.pool.verified().size() == 12 + 14);
  REQUIRE_FALSE(r.log.empty());
  CHECK(r.log.back().kind == LogEvent::Kind::Stop);
  CHECK(r.log.back().reason == "tiers-exhausted");
  std::size_t escalations = 0;
  for (const LogEvent& e : r.log) escalations += e.kind == LogEvent::Kind::Escalate;
  CHECK(escalations >= 1);
}

TEST_CASE("retrieval loop is deterministic across runs and thread counts") {
  const std::string first = dump(run_fixture_loop(1));
  CHECK(dump(run_fixture_loop(1)) == first);
  CHECK(dump(run_fixture_loop(4)) == first);
}
