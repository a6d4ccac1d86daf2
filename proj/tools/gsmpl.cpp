// gsmpl: ingest, compose, run, verify-gold, generate, eval and report.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gsmpl/answer.hpp"
#include "gsmpl/check.hpp"
#include "gsmpl/corpus.hpp"
#include "gsmpl/evaluator.hpp"
#include "gsmpl/generation.hpp"
#include "gsmpl/lexer.hpp"
#include "gsmpl/parallel.hpp"

namespace {

using namespace gsmpl;
using nlohmann::json;

enum Exit : int { kOk = 0, kUsage = 1, kParse = 2, kExecution = 3, kDataFormat = 4, kNetwork = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineFlags {
  std::string entry = "solve/1";
  std::uint64_t steps = Budget{}.max_steps;
  std::uint64_t depth = Budget{}.max_depth;
  std::int64_t timeout_ms = Budget{}.wall_timeout.count();

  void attach(CLI::App& app) {
    app.add_option("--entry", entry, "Entry predicate name/1")->capture_default_str();
    app.add_option("--steps", steps, "Resolution step limit")->capture_default_str();
    app.add_option("--depth", depth, "Goal depth limit")->capture_default_str();
    app.add_option("--timeout-ms", timeout_ms, "Wall-clock limit per program")->capture_default_str();
  }

  RunSettings settings() const {
    RunSettings s;
    try {
      s.entry = EntrySpec::parse(entry);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (timeout_ms <= 0) throw UsageError("--timeout-ms must be positive");
    s.budget.max_steps = steps;
    s.budget.max_depth = depth;
    s.budget.wall_timeout = std::chrono::milliseconds(timeout_ms);
    try {
      s.budget.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return s;
  }

  json echo() const { return {{"entry", entry}, {"steps", steps}, {"depth", depth}, {"timeout-ms", timeout_ms}}; }
};

OutputStyle style_from(const std::string& name) {
  auto s = parse_style(name);
  if (!s) throw UsageError("unknown style '" + name + "' (cot, prolog, cot+code, code+cot)");
  return *s;
}

Schema schema_from(const std::string& name) {
  auto s = parse_schema(name);
  if (!s) throw UsageError("unknown schema '" + name + "' (gsm8k, gsm8k-prolog)");
  return *s;
}

Fence fence_from(const std::string& delimiter) {
  if (delimiter.empty() || delimiter.find('\n') != std::string::npos)
    throw UsageError("--delimiter must be a non-empty single line");
  return Fence::from_delimiter(delimiter);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataFormatError(path, 0, "cannot write file");
  return out;
}

// Writes to `path`, or to stdout when it is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out = open_out(path);
  fn(out);
}

std::vector<Exemplar> load_exemplars(const std::string& path) {
  std::vector<Exemplar> out;
  for (const Sample& s : load_samples(path, Schema::Gsm8kProlog)) out.push_back(Exemplar::from_sample(s));
  return out;
}

std::vector<Sample> load_with_answers(const std::string& path, Schema schema, const std::string& answers) {
  auto samples = load_samples(path, schema, answers.empty());
  if (!answers.empty()) join_answers(samples, load_samples(answers, Schema::Gsm8k));
  return samples;
}

// ---------------------------------------------------------------- ingest

struct IngestCmd {
  std::string src, out = "-", schema = "gsm8k", answers;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("ingest", "Validate a record file and write the canonical sample file");
    c->add_option("src", src, "Line-delimited JSON records")->required();
    c->add_option("--schema", schema, "gsm8k or gsm8k-prolog")->capture_default_str();
    c->add_option("--answers", answers, "GSM8K file supplying answers by question text");
    c->add_option("-o,--out", out, "Output file, - for stdout")->capture_default_str();
    c->callback([this] { code = run(); });
  }

  int run() {
    auto samples = load_with_answers(src, schema_from(schema), answers);
    emit(out, [&](std::ostream& os) { write_samples(os, samples); });
    std::cerr << "ingested " << samples.size() << " samples\n";
    return kOk;
  }

  int code = kOk;
};

// ---------------------------------------------------------------- compose

struct ComposeCmd {
  std::string samples, out = "-", style, delimiter = "<code>";

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("compose", "Build fine-tuning records in one output style");
    c->add_option("samples", samples, "Sample file")->required();
    c->add_option("--style", style, "cot, prolog, cot+code, code+cot or all")->required();
    c->add_option("--delimiter", delimiter, "Line opening the code block")->capture_default_str();
    c->add_option("-o,--out", out, "Output file; a directory for --style all")->capture_default_str();
    c->callback([this] { code = run(); });
  }

  int run() {
    Fence fence = fence_from(delimiter);
    auto data = load_samples(samples, Schema::Gsm8k);
    auto compose_all = [&](OutputStyle s) {
      std::vector<TrainingRecord> records;
      records.reserve(data.size());
      for (const Sample& sample : data) {
        try {
          records.push_back(compose_output(sample, s, fence));
        } catch (const std::invalid_argument& e) {
          throw DataFormatError(samples, 0, e.what());
        }
      }
      return records;
    };
    if (style == "all") {
      if (out.empty() || out == "-") throw UsageError("--style all needs -o DIR");
      std::filesystem::create_directories(out);
      for (OutputStyle s : kAllStyles) {
        auto records = compose_all(s);
        std::string name = std::string(to_string(s));
        std::replace(name.begin(), name.end(), '+', '_');
        std::ofstream os = open_out((std::filesystem::path(out) / (name + ".jsonl")).string());
        write_training_records(os, records);
      }
      return kOk;
    }
    auto records = compose_all(style_from(style));
    emit(out, [&](std::ostream& os) { write_training_records(os, records); });
    return kOk;
  }

  int code = kOk;
};

// ---------------------------------------------------------------- run

struct RunCmd {
  std::string program;
  EngineFlags engine;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("run", "Execute a Prolog program and print its outcome");
    c->add_option("program", program, "Program file")->required();
    engine.attach(*c);
    c->callback([this] { code = run(); });
  }

  int run() {
    RunSettings settings = engine.settings();
    std::string source = read_file(program);
    ExecutionOutcome outcome = execute_source(source, settings);
    std::cout << outcome.describe() << "\n";
    if (outcome.is_solved()) return kOk;
    if (const Aborted* a = outcome.aborted(); a && a->reason == AbortReason::Parse) return kParse;
    return kExecution;
  }

  int code = kOk;
};

// ---------------------------------------------------------------- verify-gold

struct VerifyCmd {
  std::string samples, failures_out, answers;
  double min_pass_rate = 1.0;
  std::size_t jobs = 1;
  EngineFlags engine;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("verify-gold", "Check that every gold program reproduces its gold answer");
    c->add_option("samples", samples, "Sample file with programs")->required();
    c->add_option("--answers", answers, "GSM8K file supplying answers by question text");
    c->add_option("--failures", failures_out, "Write failing samples as JSON lines");
    c->add_option("--min-pass-rate", min_pass_rate, "Exit 3 below this pass fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    c->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
    engine.attach(*c);
    c->callback([this] { code = run(); });
  }

  int run() {
    RunSettings settings = engine.settings();
    auto data = load_with_answers(samples, Schema::Gsm8kProlog, answers);
    std::vector<ProgramCheck> checks(data.size());
    auto started = std::chrono::steady_clock::now();
    parallel_for(data.size(), jobs, [&](std::size_t i) { checks[i] = verify_candidate(data[i], *data[i].prolog, settings); });
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::size_t passed = 0;
    std::map<std::string, std::size_t> by_reason;
    for (const ProgramCheck& c : checks) {
      if (c.correct())
        ++passed;
      else
        ++by_reason[c.reason];
    }
    const std::size_t total = data.size();
    std::cout << "samples: " << total << "\n";
    std::cout << "passed: " << passed;
    if (total) std::cout << " (" << percent_text(passed, total) << ")";
    std::cout << "\n";
    std::cout << "failed: " << total - passed << "\n";
    const std::string unsupported(to_string(AbortReason::UnsupportedBuiltin));
    std::cout << "unsupported-builtin: " << (by_reason.count(unsupported) ? by_reason[unsupported] : 0) << "\n";
    for (const auto& [reason, n] : by_reason)
      if (reason != unsupported) std::cout << "  " << reason << ": " << n << "\n";
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!checks[i].correct()) std::cout << "FAIL " << data[i].id << " " << checks[i].describe() << "\n";
    std::cerr << "verified in " << elapsed << " s\n";
    if (!failures_out.empty()) {
      std::ofstream os = open_out(failures_out);
      for (std::size_t i = 0; i < data.size(); ++i)
        if (!checks[i].correct())
          os << json{{"id", data[i].id}, {"reason", checks[i].reason}, {"detail", checks[i].detail}}.dump() << "\n";
    }
    if (total == 0) return kOk;
    return static_cast<double>(passed) >= min_pass_rate * static_cast<double>(total) ? kOk : kExecution;
  }

  int code = kOk;
};

// ---------------------------------------------------------------- generate

struct GenerateCmd {
  std::string samples, fixed, verified, bootstrap, stub, api_key_env = "OPENAI_API_KEY";
  std::string annotated_out = "annotated.jsonl", residue_out = "residue.jsonl", log_out = "run-log.jsonl";
  std::string delimiter = "<code>";
  std::vector<std::string> tier_urls, tier_models;
  std::uint64_t seed = 0;
  double threshold = 0.01;
  std::size_t max_iterations = 10;
  std::size_t jobs = 1;
  double temperature = 0.0;
  int max_tokens = 1024;
  bool no_network = false;
  EngineFlags engine;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("generate", "Annotate samples with programs through the retrieval loop");
    c->add_option("samples", samples, "Samples to annotate")->required();
    c->add_option("--fixed", fixed, "Eight fixed exemplars (sample file with programs)")->required();
    c->add_option("--verified", verified, "Initial verified programs (sample file)");
    c->add_option("--bootstrap", bootstrap, "Exemplars used while fewer than five verified programs exist");
    c->add_option("--stub-transcript", stub, "Replay recorded responses instead of calling endpoints");
    c->add_option("--tier-url", tier_urls, "Chat completions URL, one per tier in escalation order");
    c->add_option("--tier-model", tier_models, "Model name per --tier-url");
    c->add_option("--api-key-env", api_key_env, "Environment variable with the API key")->capture_default_str();
    c->add_flag("--no-network", no_network, "Refuse to contact any endpoint");
    c->add_option("--seed", seed, "Seed for exemplar sampling")->capture_default_str();
    c->add_option("--threshold", threshold, "Escalate when a round solves less than this fraction")
        ->capture_default_str();
    c->add_option("--max-iterations", max_iterations, "Rounds per tier")->capture_default_str();
    c->add_option("--jobs", jobs, "Concurrent requests")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--temperature", temperature)->capture_default_str();
    c->add_option("--max-tokens", max_tokens)->capture_default_str();
    c->add_option("--delimiter", delimiter, "Line opening a code block in responses")->capture_default_str();
    c->add_option("--annotated", annotated_out)->capture_default_str();
    c->add_option("--residue", residue_out)->capture_default_str();
    c->add_option("--log", log_out, "Run log")->capture_default_str();
    engine.attach(*c);
    c->callback([this] { code = run(); });
  }

  int run() {
    LoopConfig config;
    config.run = engine.settings();
    config.fence = fence_from(delimiter);
    config.bottleneck_threshold = threshold;
    config.max_iterations = max_iterations;
    config.jobs = jobs;
    config.temperature = temperature;
    config.max_tokens = max_tokens;
    try {
      config.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    std::vector<std::unique_ptr<Generator>> owned;
    if (!stub.empty()) {
      if (!tier_urls.empty()) throw UsageError("--stub-transcript and --tier-url are exclusive");
      auto transcript = std::make_shared<const Transcript>(Transcript::load(stub));
      for (int t = 1; t <= transcript->tiers(); ++t) owned.push_back(std::make_unique<StubGenerator>(transcript, t));
      if (owned.empty()) throw UsageError("stub transcript has no records");
    } else {
      if (no_network) throw UsageError("--no-network needs --stub-transcript");
      if (tier_urls.empty()) throw UsageError("give --tier-url endpoints or --stub-transcript");
      if (!tier_models.empty() && tier_models.size() != tier_urls.size())
        throw UsageError("--tier-model must be given once per --tier-url");
      for (std::size_t i = 0; i < tier_urls.size(); ++i) {
        HttpEndpoint ep;
        ep.url = tier_urls[i];
        ep.model = tier_models.empty() ? (i == 0 ? "gpt-3.5-turbo-16k" : "gpt-4") : tier_models[i];
        ep.api_key_env = api_key_env;
        try {
          owned.push_back(std::make_unique<HttpGenerator>(ep));
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
      }
    }
    std::vector<Generator*> tiers;
    for (auto& g : owned) tiers.push_back(g.get());

    auto data = load_samples(samples, Schema::Gsm8k);
    PromptPool pool(load_exemplars(fixed), seed);
    if (!verified.empty()) pool = update_pool(std::move(pool), load_exemplars(verified));
    std::vector<Exemplar> boot;
    if (!bootstrap.empty()) boot = load_exemplars(bootstrap);

    LoopResult result = retrieval_loop(data, std::move(pool), tiers, config, boot);

    {
      std::ofstream os = open_out(annotated_out);
      write_samples(os, result.annotated);
    }
    {
      std::ofstream os = open_out(residue_out);
      write_samples(os, result.residue);
    }
    {
      std::ofstream os = open_out(log_out);
      json cfg = {{"event", "config"},
                  {"samples", samples},
                  {"fixed", fixed},
                  {"verified", verified},
                  {"bootstrap", bootstrap},
                  {"seed", seed},
                  {"threshold", threshold},
                  {"max-iterations", max_iterations},
                  {"delimiter", delimiter},
                  {"temperature", temperature},
                  {"max-tokens", max_tokens},
                  {"engine", engine.echo()}};
      json tier_names = json::array();
      for (Generator* g : tiers) tier_names.push_back(g->name());
      cfg["tiers"] = tier_names;
      os << cfg.dump() << "\n";
      for (const LogEvent& e : result.log) os << e.to_json() << "\n";
    }
    std::cout << "annotated: " << result.annotated.size() << "\nresidue: " << result.residue.size() << "\n";

    std::size_t attempts = 0, transport_failures = 0;
    for (const LogEvent& e : result.log) {
      if (e.kind != LogEvent::Kind::Attempt) continue;
      ++attempts;
      if (e.outcome == "generator-error") ++transport_failures;
    }
    if (attempts > 0 && transport_failures == attempts && stub.empty()) {
      std::cerr << "error: every generator request failed\n";
      return kNetwork;
    }
    return kOk;
  }

  int code = kOk;
};

// ---------------------------------------------------------------- eval

struct EvalCmd {
  std::string gold, outputs, style, outcomes_out, relax, report_out = "-", format = "table", label;
  std::string marker = std::string(kDefaultAnswerMarker), delimiter = "<code>";
  std::size_t jobs = 1;
  EngineFlags engine;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("eval", "Classify model outputs against gold answers");
    c->add_option("gold", gold, "Gold sample file")->required();
    c->add_option("outputs", outputs, "Model outputs: JSON lines with output and optional id")->required();
    c->add_option("--style", style, "cot, prolog, cot+code or code+cot")->required();
    c->add_option("--outcomes", outcomes_out, "Write per-part outcomes as JSON lines");
    c->add_option("--relax", relax, "Reviewed ids to reclassify as correct");
    c->add_option("--report", report_out, "Report file, - for stdout")->capture_default_str();
    c->add_option("--format", format, "table or csv")->capture_default_str();
    c->add_option("--label", label, "Row label (defaults to the style's name)");
    c->add_option("--marker", marker, "Final answer marker")->capture_default_str();
    c->add_option("--delimiter", delimiter, "Line opening the code block")->capture_default_str();
    c->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
    engine.attach(*c);
    c->callback([this] { code = run(); });
  }

  int run() {
    auto fmt = parse_report_format(format);
    if (!fmt) throw UsageError("unknown --format '" + format + "'");
    if (marker.empty()) throw UsageError("--marker must not be empty");
    EvalOptions options;
    options.style = style_from(style);
    options.fence = fence_from(delimiter);
    options.marker = marker;
    options.run = engine.settings();
    options.jobs = jobs;
    std::set<std::string> relax_ids;
    if (!relax.empty()) {
      if (!has_code_part(options.style)) throw UsageError("--relax applies to styles with a code part");
      relax_ids = load_relaxation_list(relax);
    }

    auto gold_samples = load_samples(gold, Schema::Gsm8k);
    auto model_outputs = load_model_outputs(outputs);
    auto outcomes = evaluate_outputs(gold_samples, model_outputs, options);
    if (!outcomes_out.empty()) {
      std::ofstream os = open_out(outcomes_out);
      write_outcomes(os, outcomes);
    }
    if (outcomes.empty()) {
      std::cerr << "no samples to evaluate\n";
      return kOk;
    }

    std::vector<Outcome> cot, code_part;
    for (const Outcome& o : outcomes) (o.part == Part::Cot ? cot : code_part).push_back(o);
    const std::string row = label.empty() ? std::string(table_label(options.style)) : label;
    std::ostringstream report;
    if (!cot.empty()) {
      ReportRow r{row, aggregate(cot, Part::Cot)};
      report << "Chain-of-thought part\n" << render_report(std::span(&r, 1), *fmt);
    }
    if (!code_part.empty()) {
      std::vector<ReportRow> rows{{row, aggregate(code_part, Part::Code)}};
      std::optional<Revision> revision;
      if (!relax.empty()) {
        try {
          revision = apply_revision(code_part, relax_ids);
        } catch (const std::invalid_argument& e) {
          throw DataFormatError(relax, 0, e.what());
        }
        rows.push_back({row + " (Revised)", revision->after});
      }
      if (!cot.empty()) report << "\n";
      report << "Prolog code part\n" << render_report(rows, *fmt);
      if (revision)
        report << "reclassified " << revision->reclassified << ": " << format_fixed(revision->share_of_total(), 1)
               << "% of samples, " << format_fixed(revision->share_of_syntax_errors(), 1) << "% of syntax errors\n";
    }
    emit(report_out, [&](std::ostream& os) { os << report.str(); });
    return kOk;
  }

  int code = kOk;
};

// ---------------------------------------------------------------- report

struct ReportCmd {
  std::vector<std::string> files, labels;
  std::string part = "code", relax, format = "table", out = "-";

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("report", "Render result tables from outcome files");
    c->add_option("outcomes", files, "Outcome files, one table row each")->required();
    c->add_option("--label", labels, "Row label per file (defaults to the file stem)");
    c->add_option("--part", part, "cot or code")->capture_default_str();
    c->add_option("--relax", relax, "Add a revised row for the last file");
    c->add_option("--format", format, "table or csv")->capture_default_str();
    c->add_option("-o,--out", out)->capture_default_str();
    c->callback([this] { code = run(); });
  }

  int run() {
    auto fmt = parse_report_format(format);
    if (!fmt) throw UsageError("unknown --format '" + format + "'");
    auto p = parse_part(part);
    if (!p) throw UsageError("--part must be cot or code");
    if (!labels.empty() && labels.size() != files.size()) throw UsageError("--label must be given once per file");
    if (!relax.empty() && *p != Part::Code) throw UsageError("--relax applies to the code part");

    std::vector<ReportRow> rows;
    std::optional<Revision> revision;
    for (std::size_t i = 0; i < files.size(); ++i) {
      std::vector<Outcome> selected;
      for (Outcome& o : load_outcomes(files[i]))
        if (o.part == *p) selected.push_back(std::move(o));
      if (selected.empty()) throw DataFormatError(files[i], 0, "no outcomes for part " + part);
      std::string row = labels.empty() ? std::filesystem::path(files[i]).stem().string() : labels[i];
      rows.push_back({row, aggregate(selected, *p)});
      if (!relax.empty() && i + 1 == files.size()) {
        try {
          revision = apply_revision(selected, load_relaxation_list(relax));
        } catch (const std::invalid_argument& e) {
          throw DataFormatError(relax, 0, e.what());
        }
        rows.push_back({row + " (Revised)", revision->after});
      }
    }
    emit(out, [&](std::ostream& os) {
      os << render_report(rows, *fmt);
      if (revision)
        os << "reclassified " << revision->reclassified << ": " << format_fixed(revision->share_of_total(), 1)
           << "% of samples, " << format_fixed(revision->share_of_syntax_errors(), 1) << "% of syntax errors\n";
    });
    return kOk;
  }

  int code = kOk;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prolog program annotation and evaluation for GSM8K-style math problems", "gsmpl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gsmpl 0.1.0");

  IngestCmd ingest;
  ComposeCmd compose;
  RunCmd run;
  VerifyCmd verify;
  GenerateCmd generate;
  EvalCmd eval;
  ReportCmd report;
  ingest.attach(app);
  compose.attach(app);
  run.attach(app);
  verify.attach(app);
  generate.attach(app);
  eval.attach(app);
  report.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataFormat;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const GenerationError& e) {
    std::cerr << "generator error: " << e.what() << "\n";
    return kNetwork;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataFormat;
  }
  for (int rc : {ingest.code, compose.code, run.code, verify.code, generate.code, eval.code, report.code})
    if (rc != kOk) return rc;
  return kOk;
}
