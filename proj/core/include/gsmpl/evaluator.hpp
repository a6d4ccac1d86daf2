#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsmpl/answer.hpp"
#include "gsmpl/check.hpp"
#include "gsmpl/corpus.hpp"

namespace gsmpl {

enum class Part { Cot, Code };
enum class OutcomeClass { Correct, SyntaxError, SemanticError };

std::string_view to_string(Part part);
std::string_view to_string(OutcomeClass cls);
std::optional<Part> parse_part(std::string_view text);
std::optional<OutcomeClass> parse_outcome_class(std::string_view text);

/// Verdict for one part of one model output. `detail` is empty exactly when
/// the class is Correct.
struct Outcome {
  std::string sample_id;
  Part part = Part::Cot;
  OutcomeClass cls = OutcomeClass::Correct;
  std::string detail;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Absent text or no extractable final answer is a syntax error; a different
/// value is a semantic error.
Outcome classify_cot(std::string_view sample_id, const GoldAnswer& gold, const std::optional<std::string>& cot,
                     std::string_view marker = kDefaultAnswerMarker);

/// Absent code, parse failure, no solution or any abort is a syntax error
/// whose detail starts with the reason; a wrong value is a semantic error.
Outcome classify_prolog(std::string_view sample_id, const GoldAnswer& gold, const std::optional<std::string>& code,
                        const RunSettings& settings = {});

/// Class counts over one part. Rates are exact fractions of `total`.
struct Metrics {
  std::size_t correct = 0;
  std::size_t syntax = 0;
  std::size_t semantic = 0;
  std::size_t total = 0;

  /// Throws std::invalid_argument when total is zero.
  static Metrics from_counts(std::size_t correct, std::size_t syntax, std::size_t semantic);

  Rational accuracy() const;
  Rational syntax_rate() const;
  Rational semantic_rate() const;

  /// Percentages at one decimal with a `%` suffix, e.g. `25.1%`.
  std::string accuracy_text() const;
  std::string syntax_text() const;
  std::string semantic_text() const;
  /// `25.1% / 2.5% / 72.4%`.
  std::string summary() const;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Percentage of `count` in `total`, rounded half away from zero to one
/// decimal and suffixed with `%`.
std::string percent_text(std::size_t count, std::size_t total);

/// Throws std::invalid_argument on an empty list or mixed parts.
Metrics aggregate(std::span<const Outcome> outcomes, Part part);

/// Whether an outcome may be relaxed to Correct: a code-part syntax error
/// caused by an unsupported built-in.
bool revisable(const Outcome& outcome);

struct Revision {
  std::vector<Outcome> outcomes;
  Metrics before;
  Metrics after;
  std::size_t reclassified = 0;

  /// Reclassified share of all samples and of the syntax errors, in percent.
  Rational share_of_total() const;
  Rational share_of_syntax_errors() const;
};

/// Marks the listed code-part outcomes Correct. Throws std::invalid_argument
/// naming the first id that is unknown or not revisable.
Revision apply_revision(std::span<const Outcome> outcomes, const std::set<std::string>& relax_ids);

/// One sample id per line; blank lines and `#` comments are skipped.
std::set<std::string> load_relaxation_list(const std::filesystem::path& path);

struct ReportRow {
  std::string label;
  Metrics metrics;
};

/// Display strings of one report row.
struct ReportCells {
  std::string label;
  std::string accuracy;
  std::string syntax;
  std::string semantic;

  friend bool operator==(const ReportCells&, const ReportCells&) = default;
};

ReportCells cells(const ReportRow& row);

enum class ReportFormat { TableText, Csv };

std::optional<ReportFormat> parse_report_format(std::string_view text);

/// Columns `Finetuning Data, Accuracy, Syntax Error, Semantic Error`, rows in
/// the given order.
std::string render_report(std::span<const ReportRow> rows, ReportFormat format);

/// Reads back a CSV rendering. Throws DataFormatError on malformed input.
std::vector<ReportCells> parse_report_csv(std::string_view text);

void write_outcomes(std::ostream& out, std::span<const Outcome> outcomes);
std::vector<Outcome> parse_outcomes(std::istream& in, const std::string& source = "<outcomes>");
std::vector<Outcome> load_outcomes(const std::filesystem::path& path);

struct EvalOptions {
  OutputStyle style = OutputStyle::Prolog;
  Fence fence;
  std::string marker = std::string(kDefaultAnswerMarker);
  RunSettings run;
  std::size_t jobs = 1;
};

/// Classifies every part the style produces for each gold sample, in gold
/// order, cot before code. Outputs pair with samples by id when every output
/// has one, otherwise by position. Throws DataFormatError on gold samples
/// without a final answer, unknown output ids or a count mismatch.
std::vector<Outcome> evaluate_outputs(std::span<const Sample> gold, std::span<const ModelOutput> outputs,
                                      const EvalOptions& options);

}  // namespace gsmpl
