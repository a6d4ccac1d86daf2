#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gsmpl/rational.hpp"

namespace gsmpl {

inline constexpr std::string_view kDefaultAnswerMarker = "####";

/// A gold final answer: the exact value and the raw text it came from.
struct GoldAnswer {
  Rational value;
  std::string raw;
};

/// Strips whitespace, leading currency symbols, thousands separators, a
/// trailing period and a trailing `%`; accepts integers, decimals and
/// integer fractions `a/b`, optionally signed.
std::optional<Rational> normalize_number(std::string_view text);

/// Text after the last `marker` up to the end of that line.
std::optional<std::string> final_answer_text(std::string_view cot, std::string_view marker = kDefaultAnswerMarker);

/// Value after the last `marker`, normalized. nullopt is the chain-of-thought
/// extraction failure.
std::optional<Rational> extract_final_answer(std::string_view cot, std::string_view marker = kDefaultAnswerMarker);

/// Builds the gold answer of a reference solution; nullopt when it carries no
/// usable marker.
std::optional<GoldAnswer> gold_answer(std::string_view cot, std::string_view marker = kDefaultAnswerMarker);

/// Exact on integer pairs; otherwise |a-b| <= 1e-4 * max(1, |a|, |b|).
bool answers_equal(const Rational& a, const Rational& b);

}  // namespace gsmpl
