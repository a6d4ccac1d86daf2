#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gsmpl/check.hpp"
#include "gsmpl/corpus.hpp"

namespace gsmpl {

inline constexpr std::size_t kFixedExemplars = 8;
inline constexpr std::size_t kRandomExemplars = 5;
inline constexpr std::size_t kLongestSetSize = 64;
inline constexpr std::size_t kBootstrapExemplars = 20;

/// Number of Unicode code points in UTF-8 text.
std::size_t char_count(std::string_view text);

/// A worked example for few-shot prompts: question, reference solution and a
/// verified program.
struct Exemplar {
  std::string sample_id;
  std::string question;
  std::string cot;
  std::string code;

  std::size_t length() const { return char_count(code); }
  /// Requires `sample.prolog`; throws std::invalid_argument otherwise.
  static Exemplar from_sample(const Sample& sample);
};

/// Few-shot exemplar pool: a fixed part of exactly eight exemplars and a
/// growing set of verified programs, at most one per sample id.
class PromptPool {
 public:
  /// Throws std::invalid_argument unless `fixed` has exactly eight members.
  PromptPool(std::vector<Exemplar> fixed, std::uint64_t seed);

  const std::vector<Exemplar>& fixed() const { return fixed_; }
  const std::map<std::string, Exemplar>& verified() const { return verified_; }
  std::uint64_t seed() const { return seed_; }

  /// Inserts `e`, replacing an existing code for the same id only when `e` is
  /// strictly longer. Returns whether the pool changed.
  bool add(Exemplar e);

  /// Up to 64 verified exemplars, longest first, ties by sample id ascending.
  std::vector<const Exemplar*> longest() const;

 private:
  std::vector<Exemplar> fixed_;
  std::map<std::string, Exemplar> verified_;
  std::uint64_t seed_;
};

/// Returns `pool` with `additions` merged in; the fixed part is untouched.
PromptPool update_pool(PromptPool pool, std::span<const Exemplar> additions);

/// Deterministic 64-bit seed for one prompt draw.
std::uint64_t draw_seed(std::uint64_t pool_seed, std::string_view sample_id, std::uint64_t attempt);

/// Uniform integer in [0, bound) without modulo bias; same sequence on every
/// platform for a given engine state.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

struct Prompt {
  std::string system;
  std::string user;
  /// Exemplar sample ids in prompt order.
  std::vector<std::string> fixed_ids;
  std::vector<std::string> random_ids;
  /// Fewer than five candidates were available and all were used.
  bool fallback = false;
  /// Built from the bootstrap exemplar list instead of fixed + random.
  bool bootstrap = false;
};

struct PromptOptions {
  EntrySpec entry;
  /// When non-empty and the pool has fewer than five candidates, prompts use
  /// these exemplars instead of the fixed + random scheme.
  std::span<const Exemplar> bootstrap;
};

/// Eight fixed exemplars, five drawn without replacement from the 64 longest
/// verified programs (skipping the target's own), then the target question
/// and its reference solution.
Prompt build_prompt(const Sample& target, const PromptPool& pool, std::mt19937_64& rng,
                    const PromptOptions& options = {});

/// Checks a candidate program against the sample's gold answer. A sample
/// without a usable `####` answer rejects with reason `no-gold-answer`.
ProgramCheck verify_candidate(const Sample& sample, std::string_view code, const RunSettings& settings = {});

/// Program text from a generator response: the first fenced block when the
/// response has one, otherwise the whole response trimmed.
std::string extract_code(std::string_view response, const Fence& fence = {});

/// Failure to obtain a response: transport, HTTP status or a replay error.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 1024;
  /// Sample the prompt targets; used by replaying generators.
  std::string sample_id;
};

/// Chat-completion style text generator. Implementations must be safe to call
/// from several threads.
class Generator {
 public:
  virtual ~Generator() = default;
  /// Throws GenerationError when no response can be obtained.
  virtual std::string generate(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Recorded responses keyed by (tier, sample id). Lines are
/// `{"tier": 1, "id": "...", "response": "..."}` or carry `"error"` instead
/// of `response`; id `*` applies to every sample of a tier. Repeated keys
/// replay in order and the last entry repeats once they run out.
class Transcript {
 public:
  static Transcript parse(std::istream& in, const std::string& source = "<transcript>");
  static Transcript load(const std::filesystem::path& path);

  /// Highest tier number mentioned, 0 for an empty transcript.
  int tiers() const;

  struct Entry {
    std::optional<std::string> response;
    std::string error;
  };
  const std::vector<Entry>* find(int tier, const std::string& id) const;

 private:
  std::map<std::pair<int, std::string>, std::vector<Entry>> entries_;
};

/// Replays one tier of a Transcript.
class StubGenerator : public Generator {
 public:
  StubGenerator(std::shared_ptr<const Transcript> transcript, int tier);
  std::string generate(const ChatRequest& request) override;
  std::string name() const override;

 private:
  std::shared_ptr<const Transcript> transcript_;
  int tier_;
  std::mutex mutex_;
  std::map<std::string, std::size_t> cursor_;
};

struct HttpEndpoint {
  /// Full URL of an OpenAI-compatible chat completions endpoint.
  std::string url;
  std::string model;
  /// Environment variable holding the bearer token; empty sends none.
  std::string api_key_env;
  int max_retries = 4;
  int timeout_seconds = 120;
};

/// Calls a hosted chat completions endpoint. Retries transport errors, 429
/// and 5xx with exponential backoff.
class HttpGenerator : public Generator {
 public:
  explicit HttpGenerator(HttpEndpoint endpoint);
  std::string generate(const ChatRequest& request) override;
  std::string name() const override;

 private:
  HttpEndpoint endpoint_;
  std::string api_key_;
};

struct LoopConfig {
  double bottleneck_threshold = 0.01;
  std::size_t max_iterations = 10;
  RunSettings run;
  Fence fence;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::size_t jobs = 1;

  /// Threshold must lie in (0, 1], max_iterations and jobs must be positive.
  void validate() const;
};

/// One line of the run log.
struct LogEvent {
  enum class Kind { Attempt, Fallback, Escalate, Stop };
  Kind kind = Kind::Attempt;
  std::size_t iteration = 0;
  int tier = 0;
  std::string sample_id;
  /// Attempt: `verified`, `rejected` or `generator-error`.
  std::string outcome;
  std::string reason;
  /// Escalate/Stop: samples solved in the iteration and still remaining.
  std::size_t solved = 0;
  std::size_t remaining = 0;

  std::string to_json() const;
};

struct LoopResult {
  /// Input samples with a verified program, in input order.
  std::vector<Sample> annotated;
  /// Unsolved input samples with `prolog` cleared, in input order.
  std::vector<Sample> residue;
  std::vector<LogEvent> log;
  PromptPool pool;
};

/// Iterative annotation: each round prompts every unsolved sample through the
/// current tier, keeps programs that reproduce the gold answer and grows the
/// pool between rounds. A round solving less than the threshold fraction of
/// the remaining samples, or the per-tier iteration cap, moves to the next
/// tier; the loop ends when nothing remains or tiers run out.
LoopResult retrieval_loop(std::span<const Sample> samples, PromptPool pool, std::span<Generator* const> tiers,
                          const LoopConfig& config, std::span<const Exemplar> bootstrap = {});

}  // namespace gsmpl
