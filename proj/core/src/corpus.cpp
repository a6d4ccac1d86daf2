#include "gsmpl/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace gsmpl {

using nlohmann::json;

DataFormatError::DataFormatError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

std::optional<Schema> parse_schema(std::string_view name) {
  if (name == "gsm8k") return Schema::Gsm8k;
  if (name == "gsm8k-prolog") return Schema::Gsm8kProlog;
  return std::nullopt;
}

namespace {

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::optional<std::string> string_field(const json& obj, std::string_view key, const std::string& source,
                                        std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataFormatError(source, line, "field '" + std::string(key) + "' is not a string");
  return it->get<std::string>();
}

}  // namespace

std::vector<Sample> parse_samples(std::istream& in, Schema schema, const std::string& source, bool require_answer) {
  std::vector<Sample> samples;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataFormatError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw DataFormatError(source, line_no, "record is not a JSON object");

    Sample s;
    auto question = string_field(obj, "question", source, line_no);
    if (!question) question = string_field(obj, "input", source, line_no);
    if (!question || question->empty()) question = string_field(obj, "instruction", source, line_no);
    if (!question || question->empty()) throw DataFormatError(source, line_no, "missing or empty 'question'");
    s.question = std::move(*question);

    auto answer = string_field(obj, "answer", source, line_no);
    if (!answer && require_answer) throw DataFormatError(source, line_no, "missing 'answer'");
    if (answer) s.cot_answer = std::move(*answer);

    s.prolog = string_field(obj, "prolog", source, line_no);
    if (!s.prolog) s.prolog = string_field(obj, "output", source, line_no);
    if (schema == Schema::Gsm8kProlog && !s.prolog)
      throw DataFormatError(source, line_no, "missing 'prolog' (required by the gsm8k-prolog schema)");

    if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
      if (it->is_string()) {
        s.id = it->get<std::string>();
      } else if (it->is_number_integer()) {
        s.id = std::to_string(it->get<long long>());
      } else {
        throw DataFormatError(source, line_no, "field 'id' must be a string or integer");
      }
    } else {
      s.id = std::to_string(samples.size());
    }
    if (!seen.insert(s.id).second) throw DataFormatError(source, line_no, "duplicate id '" + s.id + "'");
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<Sample> load_samples(const std::filesystem::path& path, Schema schema, bool require_answer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(path.string(), 0, "cannot open file");
  return parse_samples(in, schema, path.string(), require_answer);
}

namespace {

std::string_view trim_ws(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

void join_answers(std::vector<Sample>& samples, std::span<const Sample> reference) {
  std::unordered_map<std::string_view, const Sample*> by_question;
  for (const Sample& r : reference) by_question.emplace(trim_ws(r.question), &r);
  for (Sample& s : samples) {
    if (!s.cot_answer.empty()) continue;
    auto it = by_question.find(trim_ws(s.question));
    if (it == by_question.end())
      throw DataFormatError("<join>", 0, "no reference answer for sample '" + s.id + "'");
    s.cot_answer = it->second->cot_answer;
  }
}

void write_samples(std::ostream& out, std::span<const Sample> samples) {
  for (const Sample& s : samples) {
    json obj = {{"id", s.id}, {"question", s.question}, {"answer", s.cot_answer}};
    if (s.prolog) obj["prolog"] = *s.prolog;
    out << obj.dump() << '\n';
  }
}

std::string_view to_string(OutputStyle style) {
  switch (style) {
    case OutputStyle::Cot: return "cot";
    case OutputStyle::Prolog: return "prolog";
    case OutputStyle::CotThenCode: return "cot+code";
    case OutputStyle::CodeThenCot: return "code+cot";
  }
  return "unknown";
}

std::optional<OutputStyle> parse_style(std::string_view name) {
  for (OutputStyle s : kAllStyles)
    if (to_string(s) == name) return s;
  if (name == "COT") return OutputStyle::Cot;
  if (name == "PROLOG") return OutputStyle::Prolog;
  if (name == "COT_THEN_CODE") return OutputStyle::CotThenCode;
  if (name == "CODE_THEN_COT") return OutputStyle::CodeThenCot;
  return std::nullopt;
}

std::string_view table_label(OutputStyle style) {
  switch (style) {
    case OutputStyle::Cot: return "GSM";
    case OutputStyle::Prolog: return "GSM Prolog";
    case OutputStyle::CotThenCode: return "GSM Prolog (COT+Code)";
    case OutputStyle::CodeThenCot: return "GSM Prolog (Code+COT)";
  }
  return "unknown";
}

bool has_cot_part(OutputStyle style) { return style != OutputStyle::Prolog; }
bool has_code_part(OutputStyle style) { return style != OutputStyle::Cot; }

Fence Fence::from_delimiter(std::string_view open) {
  Fence f;
  f.open = std::string(open);
  if (open.size() > 2 && open.front() == '<' && open.back() == '>' && open[1] != '/')
    f.close = "</" + std::string(open.substr(1));
  else
    f.close = std::string(open);
  return f;
}

TrainingRecord compose_output(const Sample& sample, OutputStyle style, const Fence& fence) {
  TrainingRecord r;
  r.instruction = sample.question;
  if (has_code_part(style) && !sample.prolog)
    throw std::invalid_argument("sample '" + sample.id + "' has no Prolog program for style " +
                                std::string(to_string(style)));
  auto fenced = [&] { return fence.open + "\n" + *sample.prolog + "\n" + fence.close; };
  switch (style) {
    case OutputStyle::Cot:
      r.output = sample.cot_answer;
      break;
    case OutputStyle::Prolog:
      r.output = *sample.prolog;
      break;
    case OutputStyle::CotThenCode:
      r.output = sample.cot_answer + "\n" + fenced();
      break;
    case OutputStyle::CodeThenCot:
      r.output = fenced() + "\n" + sample.cot_answer;
      break;
  }
  return r;
}

namespace {

// Position of `line` where it starts a line of `text` at or after `from`.
std::size_t find_line_start(std::string_view text, std::string_view line, std::size_t from) {
  for (std::size_t pos = text.find(line, from); pos != std::string_view::npos; pos = text.find(line, pos + 1))
    if (pos == 0 || text[pos - 1] == '\n') return pos;
  return std::string_view::npos;
}

// Position of the `\n<close>` that ends a fenced block: followed by a newline
// or by the end of the text.
std::size_t find_close(std::string_view text, std::string_view close, std::size_t from) {
  const std::string needle = "\n" + std::string(close);
  for (std::size_t pos = text.find(needle, from); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) {
    std::size_t end = pos + needle.size();
    if (end == text.size() || text[end] == '\n') return pos;
  }
  return std::string_view::npos;
}

}  // namespace

SplitOutput split_parse_combined(std::string_view output, OutputStyle style, const Fence& fence) {
  SplitOutput out;
  switch (style) {
    case OutputStyle::Cot:
      out.cot = std::string(output);
      return out;
    case OutputStyle::Prolog:
      out.code = std::string(output);
      return out;
    case OutputStyle::CotThenCode: {
      const std::string open_line = "\n" + fence.open + "\n";
      std::size_t open = output.find(open_line);
      if (open == std::string_view::npos) {
        out.cot = std::string(output);
        return out;
      }
      out.cot = std::string(output.substr(0, open));
      std::size_t code_start = open + open_line.size();
      std::size_t close = find_close(output, fence.close, code_start - 1);
      if (close != std::string_view::npos && close < code_start) close = find_close(output, fence.close, code_start);
      out.code = std::string(output.substr(code_start, close == std::string_view::npos ? std::string_view::npos
                                                                                         : close - code_start));
      return out;
    }
    case OutputStyle::CodeThenCot: {
      const std::string open_line = fence.open + "\n";
      std::size_t open = find_line_start(output, open_line, 0);
      if (open == std::string_view::npos) {
        out.cot = std::string(output);
        return out;
      }
      std::size_t code_start = open + open_line.size();
      std::size_t close = find_close(output, fence.close, code_start - 1);
      if (close != std::string_view::npos && close < code_start) close = find_close(output, fence.close, code_start);
      if (close == std::string_view::npos) {
        out.code = std::string(output.substr(code_start));
        return out;
      }
      out.code = std::string(output.substr(code_start, close - code_start));
      std::size_t after = close + 1 + fence.close.size();
      if (after < output.size()) out.cot = std::string(output.substr(after + 1));
      return out;
    }
  }
  return out;
}

void write_training_records(std::ostream& out, std::span<const TrainingRecord> records) {
  for (const TrainingRecord& r : records) out << json{{"instruction", r.instruction}, {"output", r.output}}.dump() << '\n';
}

std::vector<ModelOutput> load_model_outputs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(path.string(), 0, "cannot open file");
  std::vector<ModelOutput> outputs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataFormatError(path.string(), line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw DataFormatError(path.string(), line_no, "record is not a JSON object");
    ModelOutput m;
    auto text = string_field(obj, "output", path.string(), line_no);
    if (!text) throw DataFormatError(path.string(), line_no, "missing 'output'");
    m.output = std::move(*text);
    if (auto it = obj.find("id"); it != obj.end() && !it->is_null())
      m.id = it->is_string() ? it->get<std::string>() : it->dump();
    outputs.push_back(std::move(m));
  }
  return outputs;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gsmpl
