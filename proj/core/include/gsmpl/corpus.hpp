#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsmpl {

/// A record file could not be read. `line` is 1-based, 0 when not
/// line-specific.
class DataFormatError : public std::runtime_error {
 public:
  DataFormatError(std::string source, std::size_t line, const std::string& message);
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

enum class Schema { Gsm8k, Gsm8kProlog };

std::optional<Schema> parse_schema(std::string_view name);

/// One math word problem. `cot_answer` is the reference step-by-step
/// solution ending in the `####` line.
struct Sample {
  std::string id;
  std::string question;
  std::string cot_answer;
  std::optional<std::string> prolog;
};

/// Reads line-delimited JSON records with `question`, `answer`, optional
/// `prolog` and optional `id`. Records without an id get their 0-based
/// record index. Blank lines are ignored; anything else malformed throws
/// DataFormatError with the line number. The gsm8k-prolog schema requires
/// `prolog`. `input`/`instruction` are accepted for `question` and `output`
/// for `prolog`. With `require_answer` false a missing `answer` loads as
/// empty text, for program files whose answers come from join_answers().
std::vector<Sample> parse_samples(std::istream& in, Schema schema, const std::string& source = "<input>",
                                  bool require_answer = true);
std::vector<Sample> load_samples(const std::filesystem::path& path, Schema schema, bool require_answer = true);

/// Fills every empty `cot_answer` from the reference sample with the same
/// question (compared after trimming whitespace). Throws DataFormatError
/// naming the first sample without a match.
void join_answers(std::vector<Sample>& samples, std::span<const Sample> reference);

/// Canonical sample file: one object per line with `id`, `question`,
/// `answer` and, when present, `prolog`.
void write_samples(std::ostream& out, std::span<const Sample> samples);

enum class OutputStyle { Cot, Prolog, CotThenCode, CodeThenCot };

inline constexpr OutputStyle kAllStyles[] = {OutputStyle::Cot, OutputStyle::Prolog, OutputStyle::CotThenCode,
                                             OutputStyle::CodeThenCot};

/// `cot`, `prolog`, `cot+code`, `code+cot`.
std::string_view to_string(OutputStyle style);
std::optional<OutputStyle> parse_style(std::string_view name);
/// Row label used in result tables, e.g. `GSM Prolog (COT+Code)`.
std::string_view table_label(OutputStyle style);
bool has_cot_part(OutputStyle style);
bool has_code_part(OutputStyle style);

/// Lines wrapped around the program in combined outputs.
struct Fence {
  std::string open = "<code>";
  std::string close = "</code>";

  /// `<tag>` pairs with `</tag>`; any other text closes with itself.
  static Fence from_delimiter(std::string_view open);
};

struct TrainingRecord {
  std::string instruction;
  std::string output;
};

/// Throws std::invalid_argument when the sample lacks a part the style needs.
TrainingRecord compose_output(const Sample& sample, OutputStyle style, const Fence& fence = {});

struct SplitOutput {
  std::optional<std::string> cot;
  std::optional<std::string> code;
};

/// Separates a model output into its chain-of-thought and code parts. A part
/// that cannot be located is absent.
SplitOutput split_parse_combined(std::string_view output, OutputStyle style, const Fence& fence = {});

void write_training_records(std::ostream& out, std::span<const TrainingRecord> records);

/// A model generation to evaluate. Records carry `output` and optionally
/// `id`; without ids, outputs pair with gold samples by position.
struct ModelOutput {
  std::optional<std::string> id;
  std::string output;
};

std::vector<ModelOutput> load_model_outputs(const std::filesystem::path& path);

/// Reads text files into one string; throws DataFormatError when unreadable.
std::string read_file(const std::filesystem::path& path);

}  // namespace gsmpl
