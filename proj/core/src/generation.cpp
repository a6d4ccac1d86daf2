#include "gsmpl/generation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>

#include <nlohmann/json.hpp>

#include "gsmpl/answer.hpp"
#include "gsmpl/parallel.hpp"

namespace gsmpl {

using nlohmann::json;

std::size_t char_count(std::string_view text) {
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

Exemplar Exemplar::from_sample(const Sample& sample) {
  if (!sample.prolog) throw std::invalid_argument("exemplar '" + sample.id + "' has no program");
  return Exemplar{sample.id, sample.question, sample.cot_answer, *sample.prolog};
}

PromptPool::PromptPool(std::vector<Exemplar> fixed, std::uint64_t seed) : fixed_(std::move(fixed)), seed_(seed) {
  if (fixed_.size() != kFixedExemplars)
    throw std::invalid_argument("the fixed pool needs exactly " + std::to_string(kFixedExemplars) +
                                " exemplars, got " + std::to_string(fixed_.size()));
}

bool PromptPool::add(Exemplar e) {
  auto it = verified_.find(e.sample_id);
  if (it == verified_.end()) {
    std::string id = e.sample_id;
    verified_.emplace(std::move(id), std::move(e));
    return true;
  }
  if (e.length() <= it->second.length()) return false;
  it->second = std::move(e);
  return true;
}

std::vector<const Exemplar*> PromptPool::longest() const {
  std::vector<std::pair<std::size_t, const Exemplar*>> ranked;
  ranked.reserve(verified_.size());
  for (const auto& [id, e] : verified_) ranked.emplace_back(e.length(), &e);
  // verified_ is ordered by id, so a stable sort on length keeps ids ascending.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (ranked.size() > kLongestSetSize) ranked.resize(kLongestSetSize);
  std::vector<const Exemplar*> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.second);
  return out;
}

PromptPool update_pool(PromptPool pool, std::span<const Exemplar> additions) {
  for (const Exemplar& e : additions) pool.add(e);
  return pool;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t draw_seed(std::uint64_t pool_seed, std::string_view sample_id, std::uint64_t attempt) {
  return splitmix64(splitmix64(pool_seed) ^ fnv1a(sample_id) ^ splitmix64(attempt + 0x632BE59BD9B4E019ULL));
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

namespace {

std::string system_message(const EntrySpec& entry) {
  return "You translate grade-school math word problems into Prolog programs. Each program defines " + entry.str() +
         " so that the query " + entry.name +
         "(Answer) binds Answer to the final numeric answer. Use only facts, rules and arithmetic with is/2. "
         "Reply with the program only.";
}

void append_exemplar(std::string& out, std::string_view question, std::string_view cot, std::string_view code) {
  out += "Question: ";
  out += question;
  out += "\nSolution:\n";
  out += cot;
  out += "\nProlog:\n";
  out += code;
  out += "\n\n";
}

}  // namespace

Prompt build_prompt(const Sample& target, const PromptPool& pool, std::mt19937_64& rng,
                    const PromptOptions& options) {
  Prompt prompt;
  prompt.system = system_message(options.entry);

  std::vector<const Exemplar*> candidates;
  for (const Exemplar* e : pool.longest())
    if (e->sample_id != target.id) candidates.push_back(e);

  std::vector<const Exemplar*> chosen;
  if (candidates.size() < kRandomExemplars && !options.bootstrap.empty()) {
    prompt.bootstrap = true;
    for (const Exemplar& e : options.bootstrap) {
      if (e.sample_id == target.id) continue;
      append_exemplar(prompt.user, e.question, e.cot, e.code);
      prompt.fixed_ids.push_back(e.sample_id);
    }
  } else {
    for (const Exemplar& e : pool.fixed()) {
      append_exemplar(prompt.user, e.question, e.cot, e.code);
      prompt.fixed_ids.push_back(e.sample_id);
    }
    if (candidates.size() <= kRandomExemplars) {
      prompt.fallback = candidates.size() < kRandomExemplars;
      chosen = candidates;
    } else {
      for (std::size_t i = 0; i < kRandomExemplars; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
        chosen.push_back(candidates[i]);
      }
    }
    for (const Exemplar* e : chosen) {
      append_exemplar(prompt.user, e->question, e->cot, e->code);
      prompt.random_ids.push_back(e->sample_id);
    }
  }
  prompt.user += "Question: " + target.question + "\nSolution:\n" + target.cot_answer + "\nProlog:\n";
  return prompt;
}

ProgramCheck verify_candidate(const Sample& sample, std::string_view code, const RunSettings& settings) {
  auto gold = gold_answer(sample.cot_answer);
  if (!gold) {
    ProgramCheck check;
    check.reason = "no-gold-answer";
    return check;
  }
  return check_program(code, gold->value, settings);
}

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::string extract_code(std::string_view response, const Fence& fence) {
  if (auto open = response.find("```"); open != std::string_view::npos) {
    auto body = response.find('\n', open);
    if (body != std::string_view::npos) {
      ++body;
      auto close = response.find("```", body);
      return std::string(trim(response.substr(body, close == std::string_view::npos ? close : close - body)));
    }
  }
  SplitOutput split = split_parse_combined(response, OutputStyle::CodeThenCot, fence);
  if (split.code) return std::string(trim(*split.code));
  return std::string(trim(response));
}

Transcript Transcript::parse(std::istream& in, const std::string& source) {
  Transcript t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataFormatError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw DataFormatError(source, line_no, "record is not a JSON object");
    auto tier = obj.find("tier");
    if (tier == obj.end() || !tier->is_number_integer() || tier->get<int>() < 1)
      throw DataFormatError(source, line_no, "'tier' must be a positive integer");
    auto id = obj.find("id");
    if (id == obj.end() || !(id->is_string() || id->is_number_integer()))
      throw DataFormatError(source, line_no, "missing 'id'");
    Entry entry;
    if (auto r = obj.find("response"); r != obj.end() && r->is_string()) {
      entry.response = r->get<std::string>();
    } else if (auto e = obj.find("error"); e != obj.end() && e->is_string()) {
      entry.error = e->get<std::string>();
    } else {
      throw DataFormatError(source, line_no, "record needs a string 'response' or 'error'");
    }
    std::string key = id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
    t.entries_[{tier->get<int>(), std::move(key)}].push_back(std::move(entry));
  }
  return t;
}

Transcript Transcript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(path.string(), 0, "cannot open file");
  return parse(in, path.string());
}

int Transcript::tiers() const {
  int n = 0;
  for (const auto& [key, _] : entries_) n = std::max(n, key.first);
  return n;
}

const std::vector<Transcript::Entry>* Transcript::find(int tier, const std::string& id) const {
  if (auto it = entries_.find({tier, id}); it != entries_.end()) return &it->second;
  if (auto it = entries_.find({tier, "*"}); it != entries_.end()) return &it->second;
  return nullptr;
}

StubGenerator::StubGenerator(std::shared_ptr<const Transcript> transcript, int tier)
    : transcript_(std::move(transcript)), tier_(tier) {}

std::string StubGenerator::generate(const ChatRequest& request) {
  const auto* entries = transcript_->find(tier_, request.sample_id);
  if (!entries || entries->empty())
    throw GenerationError("no recorded response for tier " + std::to_string(tier_) + " sample '" +
                          request.sample_id + "'");
  std::size_t index;
  {
    std::lock_guard lock(mutex_);
    index = std::min(cursor_[request.sample_id]++, entries->size() - 1);
  }
  const Transcript::Entry& e = (*entries)[index];
  if (!e.response) throw GenerationError(e.error);
  return *e.response;
}

std::string StubGenerator::name() const { return "stub-tier-" + std::to_string(tier_); }

void LoopConfig::validate() const {
  if (!(bottleneck_threshold > 0.0 && bottleneck_threshold <= 1.0))
    throw std::invalid_argument("bottleneck threshold must lie in (0, 1]");
  if (max_iterations == 0) throw std::invalid_argument("max iterations must be positive");
  if (jobs == 0) throw std::invalid_argument("jobs must be positive");
  if (max_tokens <= 0) throw std::invalid_argument("max tokens must be positive");
  run.budget.validate();
}

std::string LogEvent::to_json() const {
  json obj;
  switch (kind) {
    case Kind::Attempt:
      obj = {{"event", "attempt"}, {"iteration", iteration}, {"sample-id", sample_id}, {"tier", tier},
             {"outcome", outcome}, {"reason", reason}};
      break;
    case Kind::Fallback:
      obj = {{"event", "fallback"}, {"iteration", iteration}, {"sample-id", sample_id}, {"tier", tier},
             {"reason", reason}};
      break;
    case Kind::Escalate:
    case Kind::Stop:
      obj = {{"event", kind == Kind::Escalate ? "escalate" : "stop"},
             {"iteration", iteration},
             {"tier", tier},
             {"solved", solved},
             {"remaining", remaining},
             {"reason", reason}};
      break;
  }
  return obj.dump();
}

LoopResult retrieval_loop(std::span<const Sample> samples, PromptPool pool, std::span<Generator* const> tiers,
                          const LoopConfig& config, std::span<const Exemplar> bootstrap) {
  config.validate();
  LoopResult result{{}, {}, {}, std::move(pool)};

  std::vector<std::size_t> remaining;
  std::vector<std::optional<std::string>> solution(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) remaining.push_back(i);

  struct Attempt {
    std::string outcome;
    std::string reason;
    std::optional<std::string> code;
    bool fallback = false;
    std::size_t available = 0;
  };

  PromptOptions prompt_options{config.run.entry, bootstrap};
  std::size_t iteration = 0;
  std::string stop_reason = "tiers-exhausted";
  std::size_t last_solved = 0;
  int last_tier = 0;
  for (std::size_t tier = 0; tier < tiers.size() && !remaining.empty(); ++tier) {
    Generator& generator = *tiers[tier];
    const int tier_no = static_cast<int>(tier) + 1;
    last_tier = tier_no;
    for (std::size_t round = 1;; ++round) {
      ++iteration;
      const PromptPool& frozen = result.pool;
      std::vector<Attempt> attempts(remaining.size());
      parallel_for(remaining.size(), config.jobs, [&](std::size_t k) {
        const Sample& s = samples[remaining[k]];
        Attempt& a = attempts[k];
        std::mt19937_64 rng(draw_seed(frozen.seed(), s.id, iteration));
        Prompt prompt = build_prompt(s, frozen, rng, prompt_options);
        a.fallback = prompt.fallback;
        a.available = prompt.random_ids.size();
        std::string response;
        try {
          response = generator.generate({prompt.system, prompt.user, config.temperature, config.max_tokens, s.id});
        } catch (const GenerationError& e) {
          a.outcome = "generator-error";
          a.reason = e.what();
          return;
        }
        std::string code = extract_code(response, config.fence);
        ProgramCheck check = verify_candidate(s, code, config.run);
        if (check.correct()) {
          a.outcome = "verified";
          a.code = std::move(code);
        } else {
          a.outcome = "rejected";
          a.reason = check.describe();
        }
      });

      std::vector<std::size_t> still;
      std::vector<Exemplar> additions;
      for (std::size_t k = 0; k < remaining.size(); ++k) {
        const Sample& s = samples[remaining[k]];
        Attempt& a = attempts[k];
        if (a.fallback) {
          LogEvent fb;
          fb.kind = LogEvent::Kind::Fallback;
          fb.iteration = iteration;
          fb.tier = tier_no;
          fb.sample_id = s.id;
          fb.reason = "only " + std::to_string(a.available) + " random exemplars available";
          result.log.push_back(std::move(fb));
        }
        LogEvent ev;
        ev.iteration = iteration;
        ev.tier = tier_no;
        ev.sample_id = s.id;
        ev.outcome = a.outcome;
        ev.reason = a.reason;
        result.log.push_back(std::move(ev));
        if (a.code) {
          additions.push_back(Exemplar{s.id, s.question, s.cot_answer, *a.code});
          solution[remaining[k]] = std::move(a.code);
        } else {
          still.push_back(remaining[k]);
        }
      }
      const std::size_t attempted = remaining.size();
      const std::size_t solved = attempted - still.size();
      last_solved = solved;
      result.pool = update_pool(std::move(result.pool), additions);
      remaining = std::move(still);

      if (remaining.empty()) {
        stop_reason = "all-solved";
        break;
      }
      std::string escalate;
      if (static_cast<double>(solved) < config.bottleneck_threshold * static_cast<double>(attempted))
        escalate = "bottleneck";
      else if (round >= config.max_iterations)
        escalate = "max-iterations";
      if (!escalate.empty()) {
        if (tier + 1 < tiers.size()) {
          LogEvent up;
          up.kind = LogEvent::Kind::Escalate;
          up.iteration = iteration;
          up.tier = tier_no + 1;
          up.solved = solved;
          up.remaining = remaining.size();
          up.reason = escalate;
          result.log.push_back(std::move(up));
        }
        break;
      }
    }
  }
  if (tiers.empty()) stop_reason = "no-tiers";

  LogEvent stop;
  stop.kind = LogEvent::Kind::Stop;
  stop.iteration = iteration;
  stop.tier = last_tier;
  stop.solved = last_solved;
  stop.remaining = remaining.size();
  stop.reason = stop_reason;
  result.log.push_back(std::move(stop));

  for (std::size_t i = 0; i < samples.size(); ++i) {
    Sample s = samples[i];
    if (solution[i]) {
      s.prolog = std::move(solution[i]);
      result.annotated.push_back(std::move(s));
    } else {
      s.prolog.reset();
      result.residue.push_back(std::move(s));
    }
  }
  return result;
}

}  // namespace gsmpl
