#include "gsmpl/evaluator.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gsmpl/parallel.hpp"

namespace gsmpl {

using nlohmann::json;

std::string_view to_string(Part part) { return part == Part::Cot ? "cot" : "code"; }

std::string_view to_string(OutcomeClass cls) {
  switch (cls) {
    case OutcomeClass::Correct: return "Correct";
    case OutcomeClass::SyntaxError: return "SyntaxError";
    case OutcomeClass::SemanticError: return "SemanticError";
  }
  return "unknown";
}

std::optional<Part> parse_part(std::string_view text) {
  if (text == "cot") return Part::Cot;
  if (text == "code") return Part::Code;
  return std::nullopt;
}

std::optional<OutcomeClass> parse_outcome_class(std::string_view text) {
  for (OutcomeClass c : {OutcomeClass::Correct, OutcomeClass::SyntaxError, OutcomeClass::SemanticError})
    if (to_string(c) == text) return c;
  return std::nullopt;
}

Outcome classify_cot(std::string_view sample_id, const GoldAnswer& gold, const std::optional<std::string>& cot,
                     std::string_view marker) {
  Outcome o{std::string(sample_id), Part::Cot, OutcomeClass::SyntaxError, {}};
  if (!cot) {
    o.detail = "absent";
    return o;
  }
  auto text = final_answer_text(*cot, marker);
  if (!text) {
    o.detail = "no-marker";
    return o;
  }
  auto value = normalize_number(*text);
  if (!value) {
    o.detail = "unparsable-answer " + *text;
    return o;
  }
  if (!answers_equal(*value, gold.value)) {
    o.cls = OutcomeClass::SemanticError;
    o.detail = "wrong-answer got " + format_rational(*value) + " expected " + format_rational(gold.value);
    return o;
  }
  o.cls = OutcomeClass::Correct;
  return o;
}

Outcome classify_prolog(std::string_view sample_id, const GoldAnswer& gold, const std::optional<std::string>& code,
                        const RunSettings& settings) {
  Outcome o{std::string(sample_id), Part::Code, OutcomeClass::SyntaxError, {}};
  if (!code) {
    o.detail = "absent";
    return o;
  }
  ProgramCheck check = check_program(*code, gold.value, settings);
  switch (check.verdict) {
    case ProgramCheck::Verdict::Correct:
      o.cls = OutcomeClass::Correct;
      break;
    case ProgramCheck::Verdict::NotExecutable:
      o.detail = check.describe();
      break;
    case ProgramCheck::Verdict::WrongAnswer:
      o.cls = OutcomeClass::SemanticError;
      o.detail = check.describe();
      break;
  }
  return o;
}

Metrics Metrics::from_counts(std::size_t correct, std::size_t syntax, std::size_t semantic) {
  Metrics m{correct, syntax, semantic, correct + syntax + semantic};
  if (m.total == 0) throw std::invalid_argument("metrics over zero outcomes");
  return m;
}

namespace {

Rational percent(std::size_t count, std::size_t total) {
  if (total == 0) throw std::invalid_argument("metrics over zero outcomes");
  return Rational(BigInt(count) * 100, BigInt(total));
}

}  // namespace

Rational Metrics::accuracy() const { return percent(correct, total); }
Rational Metrics::syntax_rate() const { return percent(syntax, total); }
Rational Metrics::semantic_rate() const { return percent(semantic, total); }

std::string percent_text(std::size_t count, std::size_t total) { return format_fixed(percent(count, total), 1) + "%"; }

std::string Metrics::accuracy_text() const { return percent_text(correct, total); }
std::string Metrics::syntax_text() const { return percent_text(syntax, total); }
std::string Metrics::semantic_text() const { return percent_text(semantic, total); }
std::string Metrics::summary() const { return accuracy_text() + " / " + syntax_text() + " / " + semantic_text(); }

Metrics aggregate(std::span<const Outcome> outcomes, Part part) {
  if (outcomes.empty()) throw std::invalid_argument("cannot aggregate an empty outcome list");
  std::size_t counts[3] = {0, 0, 0};
  for (const Outcome& o : outcomes) {
    if (o.part != part)
      throw std::invalid_argument("outcome for '" + o.sample_id + "' belongs to part " + std::string(to_string(o.part)));
    ++counts[static_cast<int>(o.cls)];
  }
  return Metrics::from_counts(counts[0], counts[1], counts[2]);
}

bool revisable(const Outcome& outcome) {
  return outcome.part == Part::Code && outcome.cls == OutcomeClass::SyntaxError &&
         outcome.detail.starts_with(to_string(AbortReason::UnsupportedBuiltin));
}

Rational Revision::share_of_total() const { return percent(reclassified, before.total); }

Rational Revision::share_of_syntax_errors() const {
  if (before.syntax == 0) return Rational(0);
  return percent(reclassified, before.syntax);
}

Revision apply_revision(std::span<const Outcome> outcomes, const std::set<std::string>& relax_ids) {
  Revision r;
  r.outcomes.assign(outcomes.begin(), outcomes.end());
  r.before = aggregate(outcomes, Part::Code);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) index.emplace(r.outcomes[i].sample_id, i);
  for (const std::string& id : relax_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw std::invalid_argument("relaxation id '" + id + "' has no code outcome");
    Outcome& o = r.outcomes[it->second];
    if (!revisable(o))
      throw std::invalid_argument("relaxation id '" + id + "' is " + std::string(to_string(o.cls)) +
                                  (o.detail.empty() ? "" : " (" + o.detail + ")") +
                                  ", not an unsupported-builtin syntax error");
  }
  for (const std::string& id : relax_ids) {
    Outcome& o = r.outcomes[index.at(id)];
    o.cls = OutcomeClass::Correct;
    o.detail.clear();
  }
  r.reclassified = relax_ids.size();
  r.after = aggregate(r.outcomes, Part::Code);
  return r;
}

std::set<std::string> load_relaxation_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(path.string(), 0, "cannot open file");
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    ids.insert(line.substr(b, e - b + 1));
  }
  return ids;
}

ReportCells cells(const ReportRow& row) {
  return {row.label, row.metrics.accuracy_text(), row.metrics.syntax_text(), row.metrics.semantic_text()};
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "table" || text == "table-text" || text == "text") return ReportFormat::TableText;
  if (text == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

namespace {

constexpr std::string_view kHeaders[4] = {"Finetuning Data", "Accuracy", "Syntax Error", "Semantic Error"};

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (char c : s)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace

std::string render_report(std::span<const ReportRow> rows, ReportFormat format) {
  std::vector<std::array<std::string, 4>> table;
  table.push_back({std::string(kHeaders[0]), std::string(kHeaders[1]), std::string(kHeaders[2]),
                   std::string(kHeaders[3])});
  for (const ReportRow& row : rows) {
    ReportCells c = cells(row);
    table.push_back({c.label, c.accuracy, c.syntax, c.semantic});
  }
  std::string out;
  if (format == ReportFormat::Csv) {
    for (const auto& line : table)
      out += csv_field(line[0]) + "," + csv_field(line[1]) + "," + csv_field(line[2]) + "," + csv_field(line[3]) +
             "\n";
    return out;
  }
  std::size_t widths[4] = {0, 0, 0, 0};
  for (const auto& line : table)
    for (int i = 0; i < 4; ++i) widths[i] = std::max(widths[i], display_width(line[i]));
  for (const auto& line : table) {
    std::string text;
    for (int i = 0; i < 4; ++i) {
      if (i) text += " | ";
      text += line[i];
      if (i < 3) text.append(widths[i] - display_width(line[i]), ' ');
    }
    out += text + "\n";
  }
  return out;
}

std::vector<ReportCells> parse_report_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      fields.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(fields));
      fields.clear();
      any = false;
      ++line;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DataFormatError("<csv>", line, "unterminated quoted field");
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  if (records.empty()) throw DataFormatError("<csv>", 0, "missing header");
  for (int i = 0; i < 4; ++i)
    if (records[0].size() != 4 || records[0][static_cast<std::size_t>(i)] != kHeaders[i])
      throw DataFormatError("<csv>", 1, "unexpected header");
  std::vector<ReportCells> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != 4) throw DataFormatError("<csv>", r + 1, "expected 4 fields");
    rows.push_back({records[r][0], records[r][1], records[r][2], records[r][3]});
  }
  return rows;
}

void write_outcomes(std::ostream& out, std::span<const Outcome> outcomes) {
  for (const Outcome& o : outcomes)
    out << json{{"id", o.sample_id}, {"part", to_string(o.part)}, {"class", to_string(o.cls)}, {"detail", o.detail}}
               .dump()
        << '\n';
}

std::vector<Outcome> parse_outcomes(std::istream& in, const std::string& source) {
  std::vector<Outcome> outcomes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json obj = json::parse(line);
      Outcome o;
      o.sample_id = obj.at("id").get<std::string>();
      auto part = parse_part(obj.at("part").get<std::string>());
      auto cls = parse_outcome_class(obj.at("class").get<std::string>());
      if (!part || !cls) throw DataFormatError(source, line_no, "unknown part or class");
      o.part = *part;
      o.cls = *cls;
      if (auto d = obj.find("detail"); d != obj.end() && !d->is_null()) o.detail = d->get<std::string>();
      if ((o.cls == OutcomeClass::Correct) != o.detail.empty())
        throw DataFormatError(source, line_no, "detail must be empty exactly for Correct outcomes");
      outcomes.push_back(std::move(o));
    } catch (const json::exception& e) {
      throw DataFormatError(source, line_no, std::string("malformed outcome: ") + e.what());
    }
  }
  return outcomes;
}

std::vector<Outcome> load_outcomes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(path.string(), 0, "cannot open file");
  return parse_outcomes(in, path.string());
}

std::vector<Outcome> evaluate_outputs(std::span<const Sample> gold, std::span<const ModelOutput> outputs,
                                      const EvalOptions& options) {
  std::vector<GoldAnswer> answers;
  answers.reserve(gold.size());
  for (const Sample& s : gold) {
    auto g = gold_answer(s.cot_answer);
    if (!g) throw DataFormatError("<gold>", 0, "sample '" + s.id + "' has no final answer after ####");
    answers.push_back(std::move(*g));
  }

  std::vector<const ModelOutput*> paired(gold.size(), nullptr);
  bool by_id = !outputs.empty();
  for (const ModelOutput& m : outputs) by_id = by_id && m.id.has_value();
  if (by_id) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < gold.size(); ++i) index.emplace(gold[i].id, i);
    for (const ModelOutput& m : outputs) {
      auto it = index.find(*m.id);
      if (it == index.end()) throw DataFormatError("<outputs>", 0, "output id '" + *m.id + "' is not a gold sample");
      if (paired[it->second]) throw DataFormatError("<outputs>", 0, "duplicate output for id '" + *m.id + "'");
      paired[it->second] = &m;
    }
  } else {
    if (outputs.size() != gold.size())
      throw DataFormatError("<outputs>", 0,
                            "outputs without ids must match the gold samples one to one (" +
                                std::to_string(outputs.size()) + " outputs, " + std::to_string(gold.size()) +
                                " samples)");
    for (std::size_t i = 0; i < gold.size(); ++i) paired[i] = &outputs[i];
  }

  const bool cot = has_cot_part(options.style);
  const bool code = has_code_part(options.style);
  const std::size_t per = (cot ? 1 : 0) + (code ? 1 : 0);
  std::vector<Outcome> outcomes(gold.size() * per);
  parallel_for(gold.size(), options.jobs, [&](std::size_t i) {
    SplitOutput split;
    if (paired[i]) split = split_parse_combined(paired[i]->output, options.style, options.fence);
    std::size_t slot = i * per;
    if (cot) outcomes[slot++] = classify_cot(gold[i].id, answers[i], split.cot, options.marker);
    if (code) outcomes[slot] = classify_prolog(gold[i].id, answers[i], split.code, options.run);
  });
  return outcomes;
}

}  // namespace gsmpl
