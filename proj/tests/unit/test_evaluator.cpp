#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "gsmpl/evaluator.hpp"

using namespace gsmpl;

namespace {

std::vector<Outcome> synthetic(std::size_t correct, std::size_t syntax, std::size_t semantic, Part part,
                               std::size_t unsupported = 0) {
  std::vector<Outcome> out;
  std::size_t n = 0;
  auto id = [&] { return "s" + std::to_string(n++); };
  for (std::size_t i = 0; i < correct; ++i) out.push_back({id(), part, OutcomeClass::Correct, ""});
  for (std::size_t i = 0; i < syntax; ++i)
    out.push_back({id(), part, OutcomeClass::SyntaxError,
                   i < unsupported ? "unsupported-builtin findall/3" : "unknown-predicate helper/1"});
  for (std::size_t i = 0; i < semantic; ++i)
    out.push_back({id(), part, OutcomeClass::SemanticError, "wrong-answer got 1 expected 2"});
  return out;
}

GoldAnswer gold(long long v) { return {Rational(v), std::to_string(v)}; }

}  // namespace

TEST_CASE("chain-of-thought classification") {
  CHECK(classify_cot("a", gold(7), std::string("3 + 4 = 7\n#### 7")).cls == OutcomeClass::Correct);
  CHECK(classify_cot("a", gold(7), std::string("#### 7.0")).cls == OutcomeClass::Correct);
  auto wrong = classify_cot("a", gold(7), std::string("#### 8"));
  CHECK(wrong.cls == OutcomeClass::SemanticError);
  CHECK(wrong.detail == "wrong-answer got 8 expected 7");
  CHECK(classify_cot("a", gold(7), std::string("seven")).detail == "no-marker");
  CHECK(classify_cot("a", gold(7), std::nullopt).detail == "absent");
  CHECK(classify_cot("a", gold(7), std::string("#### seven")).cls == OutcomeClass::SyntaxError);
}

TEST_CASE("code classification maps every non-executable outcome to syntax errors") {
  CHECK(classify_prolog("a", gold(7), std::string("solve(X) :- X is 3 + 4.")).cls == OutcomeClass::Correct);
  CHECK(classify_prolog("a", gold(7), std::string("solve(X) :- X is 3 * 4.")).cls == OutcomeClass::SemanticError);
  for (const char* code : {"solve(X) :- X is.", "solve(X) :- fail.", "solve(X) :- helper(X).",
                           "solve(X) :- X is 1 / 0.", "solve(X) :- solve(X).", "solve(X) :- \\+ X = 1."}) {
    Outcome o = classify_prolog("a", gold(7), std::string(code));
    INFO(code);
    CHECK(o.cls == OutcomeClass::SyntaxError);
    CHECK_FALSE(o.detail.empty());
  }
  CHECK(classify_prolog("a", gold(7), std::nullopt).detail == "absent");
  CHECK(revisable(classify_prolog("a", gold(7), std::string("solve(X) :- findall(Y, p(Y), X)."))));
  CHECK_FALSE(revisable(classify_prolog("a", gold(7), std::string("solve(X) :- helper(X)."))));
}

TEST_CASE("metrics and rendering of the chain-of-thought baseline") {
  Metrics m = aggregate(synthetic(251, 25, 724, Part::Cot), Part::Cot);
  CHECK(m == Metrics::from_counts(251, 25, 724));
  CHECK(m.summary() == "25.1% / 2.5% / 72.4%");
  ReportRow row{"GSM", m};
  CHECK(cells(row) == ReportCells{"GSM", "25.1%", "2.5%", "72.4%"});
  const std::string table = render_report(std::span<const ReportRow>(&row, 1), ReportFormat::TableText);
  CHECK(table ==
        "Finetuning Data | Accuracy | Syntax Error | Semantic Error\n"
        "GSM             | 25.1%    | 2.5%         | 72.4%\n");
  CHECK_THROWS_AS(Metrics::from_counts(0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(aggregate({}, Part::Cot), std::invalid_argument);
  CHECK_THROWS_AS(aggregate(synthetic(1, 1, 1, Part::Cot), Part::Code), std::invalid_argument);
}

TEST_CASE("property: counts partition the total and rates are exact") {
  std::mt19937_64 rng(1319);
  for (int i = 0; i < 3000; ++i) {
    std::size_t c = rng() % 800, s = rng() % 800, e = rng() % 800;
    if (c + s + e == 0) c = 1;
    std::vector<Outcome> outcomes = synthetic(c, s, e, Part::Code);
    std::shuffle(outcomes.begin(), outcomes.end(), rng);
    Metrics m = aggregate(outcomes, Part::Code);
    CHECK(m.correct + m.syntax + m.semantic == m.total);
    CHECK(m.total == outcomes.size());
    CHECK(m.accuracy() == Rational(100 * c, m.total));
    CHECK(m.syntax_rate() == Rational(100 * s, m.total));
    CHECK(m.accuracy() + m.syntax_rate() + m.semantic_rate() == 100);
    Rational shown = *parse_decimal(m.accuracy_text().substr(0, m.accuracy_text().size() - 1)) +
                     *parse_decimal(m.syntax_text().substr(0, m.syntax_text().size() - 1)) +
                     *parse_decimal(m.semantic_text().substr(0, m.semantic_text().size() - 1));
    Rational gap = shown - 100;
    if (gap < 0) gap = -gap;
    CHECK(gap <= Rational(2, 10));
  }
}

TEST_CASE("revision of the code baseline") {
  std::vector<Outcome> outcomes = synthetic(408, 272, 639, Part::Code, 40);
  Metrics before = aggregate(outcomes, Part::Code);
  CHECK(before.summary() == "30.9% / 20.6% / 48.4%");
  std::set<std::string> relax;
  for (std::size_t i = 0; i < 20; ++i) relax.insert("s" + std::to_string(408 + i));
  Revision r = apply_revision(outcomes, relax);
  CHECK(r.reclassified == 20);
  CHECK(r.before == before);
  CHECK(r.after.summary() == "32.4% / 19.1% / 48.4%");
  CHECK(r.after.semantic_rate() == r.before.semantic_rate());
  CHECK(format_fixed(r.share_of_total(), 1) == "1.5");
  CHECK(r.share_of_syntax_errors() == Rational(2000, 272));

  CHECK_THROWS_AS(apply_revision(outcomes, {"missing"}), std::invalid_argument);
  CHECK_THROWS_AS(apply_revision(outcomes, {"s0"}), std::invalid_argument);
  CHECK_THROWS_AS(apply_revision(outcomes, {"s500"}), std::invalid_argument);
}

TEST_CASE("report formats") {
  std::vector<ReportRow> rows = {{"GSM Prolog", Metrics::from_counts(408, 272, 639)},
                                 {"Label, with \"quotes\"", Metrics::from_counts(1, 1, 1)}};
  const std::string csv = render_report(rows, ReportFormat::Csv);
  CHECK(csv.rfind("Finetuning Data,Accuracy,Syntax Error,Semantic Error\n", 0) == 0);
  auto back = parse_report_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == cells(rows[0]));
  CHECK(back[1] == cells(rows[1]));
  CHECK(parse_report_format("csv") == ReportFormat::Csv);
  CHECK(parse_report_format("table") == ReportFormat::TableText);
  CHECK_FALSE(parse_report_format("html"));
  CHECK_THROWS_AS(parse_report_csv("a,b\n"), DataFormatError);
}

TEST_CASE("outcome files round-trip") {
  std::vector<Outcome> outcomes = synthetic(2, 2, 2, Part::Cot);
  std::ostringstream out;
  write_outcomes(out, outcomes);
  std::istringstream in(out.str());
  CHECK(parse_outcomes(in) == outcomes);
  std::istringstream bad("{\"id\": \"a\", \"part\": \"cot\", \"class\": \"correct\", \"detail\": \"x\"}\n");
  CHECK_THROWS_AS(parse_outcomes(bad), DataFormatError);
}

TEST_CASE("evaluate_outputs pairs by id or by position") {
  std::vector<Sample> gold = {{"a", "Q", "#### 7", std::nullopt}, {"b", "Q", "#### 9", std::nullopt}};
  EvalOptions options;
  options.style = OutputStyle::CotThenCode;
  std::vector<ModelOutput> by_id = {
      {std::string("b"), "#### 9\n<code>\nsolve(X) :- X is 10 - 1.\n</code>"},
      {std::string("a"), "#### 6\n<code>\nsolve(7).\n</code>"}};
  auto outcomes = evaluate_outputs(gold, by_id, options);
  REQUIRE(outcomes.size() == 4);
  CHECK(outcomes[0].sample_id == "a");
  CHECK(outcomes[0].part == Part::Cot);
  CHECK(outcomes[0].cls == OutcomeClass::SemanticError);
  CHECK(outcomes[1].part == Part::Code);
  CHECK(outcomes[1].cls == OutcomeClass::Correct);
  CHECK(outcomes[2].cls == OutcomeClass::Correct);
  CHECK(outcomes[3].cls == OutcomeClass::Correct);

  std::vector<ModelOutput> positional = {{std::nullopt, "#### 7"}, {std::nullopt, "nothing"}};
  options.style = OutputStyle::Cot;
  auto cot_only = evaluate_outputs(gold, positional, options);
  REQUIRE(cot_only.size() == 2);
  CHECK(cot_only[0].cls == OutcomeClass::Correct);
  CHECK(cot_only[1].cls == OutcomeClass::SyntaxError);

  positional.pop_back();
  CHECK_THROWS_AS(evaluate_outputs(gold, positional, options), DataFormatError);
  std::vector<ModelOutput> stranger = {{std::string("zz"), "#### 1"}};
  CHECK_THROWS_AS(evaluate_outputs(gold, stranger, options), DataFormatError);
}

TEST_CASE("property: one outcome per sample and part, detail iff not correct") {
  std::mt19937_64 rng(3);
  const char* outputs[] = {"#### 5\n<code>\nsolve(5).\n</code>", "#### 4\n<code>\nsolve(X) :- X is 2 + 2.\n</code>",
                           "<code>\nsolve(X) :- nope(X).\n</code>\n#### x", "garbage", ""};
  for (int round = 0; round < 50; ++round) {
    std::vector<Sample> gold;
    std::vector<ModelOutput> outs;
    for (int i = 0; i < 10; ++i) {
      gold.push_back({"g" + std::to_string(i), "Q", "#### " + std::to_string(rng() % 6), std::nullopt});
      outs.push_back({std::nullopt, outputs[rng() % std::size(outputs)]});
    }
    for (OutputStyle style : kAllStyles) {
      EvalOptions options;
      options.style = style;
      options.jobs = 1 + rng() % 4;
      auto outcomes = evaluate_outputs(gold, outs, options);
      std::size_t per = (has_cot_part(style) ? 1 : 0) + (has_code_part(style) ? 1 : 0);
      REQUIRE(outcomes.size() == gold.size() * per);
      std::set<std::pair<std::string, Part>> keys;
      for (const Outcome& o : outcomes) {
        keys.insert({o.sample_id, o.part});
        CHECK(o.detail.empty() == (o.cls == OutcomeClass::Correct));
      }
      CHECK(keys.size() == outcomes.size());
    }
  }
}

TEST_CASE("relaxation list file") {
  auto path = std::filesystem::temp_directory_path() / "gsmpl_relax_test.txt";
  {
    std::ofstream out(path);
    out << "# reviewed\nid-1\n\n  id-2  \n";
  }
  CHECK(load_relaxation_list(path) == std::set<std::string>{"id-1", "id-2"});
  std::filesystem::remove(path);
}
