#include "gsmpl/answer.hpp"

#include <array>
#include <cctype>

namespace gsmpl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool strip_currency(std::string_view& s) {
  static constexpr std::array<std::string_view, 6> kSymbols = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5",
                                                               "\xE2\x82\xB9", "\xE2\x82\xA9"};
  for (std::string_view sym : kSymbols) {
    if (s.starts_with(sym)) {
      s.remove_prefix(sym.size());
      return true;
    }
  }
  return false;
}

std::optional<BigInt> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  return parse_digits(s);
}

}  // namespace

std::optional<Rational> normalize_number(std::string_view text) {
  std::string_view s = trim(text);
  bool negative = false;
  auto take_sign = [&] {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
      s = trim(s);
      return true;
    }
    return false;
  };
  bool signed_before = take_sign();
  while (strip_currency(s)) s = trim(s);
  if (!signed_before) take_sign();

  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    if (s.back() == '.' || s.back() == '%') {
      s.remove_suffix(1);
      s = trim(s);
      changed = true;
    }
  }
  if (s.empty()) return std::nullopt;

  std::string digits;
  digits.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == ',') {
      bool between_digits = i > 0 && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
                            std::isdigit(static_cast<unsigned char>(s[i + 1]));
      if (!between_digits) return std::nullopt;
      continue;
    }
    digits += c;
  }

  std::optional<Rational> value;
  if (auto slash = digits.find('/'); slash != std::string::npos) {
    auto n = parse_integer(std::string_view(digits).substr(0, slash));
    auto d = parse_integer(std::string_view(digits).substr(slash + 1));
    if (!n || !d || *d == 0) return std::nullopt;
    value = Rational(*n, *d);
  } else {
    if (digits.front() == '.') digits.insert(digits.begin(), '0');
    if (digits.find_first_of("eE") != std::string::npos) return std::nullopt;
    value = parse_decimal(digits);
  }
  if (!value) return std::nullopt;
  return negative ? -*value : *value;
}

std::optional<std::string> final_answer_text(std::string_view cot, std::string_view marker) {
  if (marker.empty()) return std::nullopt;
  auto at = cot.rfind(marker);
  if (at == std::string_view::npos) return std::nullopt;
  std::string_view rest = cot.substr(at + marker.size());
  if (auto nl = rest.find('\n'); nl != std::string_view::npos) rest = rest.substr(0, nl);
  return std::string(trim(rest));
}

std::optional<Rational> extract_final_answer(std::string_view cot, std::string_view marker) {
  auto text = final_answer_text(cot, marker);
  if (!text) return std::nullopt;
  return normalize_number(*text);
}

std::optional<GoldAnswer> gold_answer(std::string_view cot, std::string_view marker) {
  auto text = final_answer_text(cot, marker);
  if (!text) return std::nullopt;
  auto value = normalize_number(*text);
  if (!value) return std::nullopt;
  return GoldAnswer{*value, *text};
}

bool answers_equal(const Rational& a, const Rational& b) {
  if (is_integer(a) && is_integer(b)) return a == b;
  Rational scale = 1;
  if (abs(a) > scale) scale = abs(a);
  if (abs(b) > scale) scale = abs(b);
  return abs(a - b) * 10000 <= scale;
}

}  // namespace gsmpl
