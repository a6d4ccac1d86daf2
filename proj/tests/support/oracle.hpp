#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gsmpl/check.hpp"
#include "gsmpl/corpus.hpp"
#include "gsmpl/parser.hpp"
#include "gsmpl/printer.hpp"

namespace oracle {

struct Mismatch {
  std::string item;
  std::string expected;
  std::string actual;
};

struct Report {
  std::size_t programs = 0;
  std::size_t terms = 0;
  std::vector<Mismatch> mismatches;
};

/// Replays the frozen reference answers in `dir/expected.json`.
inline Report compare(const std::filesystem::path& dir) {
  using nlohmann::json;
  std::ifstream in(dir / "expected.json");
  json expected = json::parse(in);
  Report report;

  for (const auto& [file, entry] : expected.at("programs").items()) {
    ++report.programs;
    gsmpl::ExecutionOutcome got = gsmpl::execute_source(gsmpl::read_file(dir / "programs" / file));
    const std::string status = entry.at("status");
    std::string want;
    std::string have = got.describe();
    bool same = false;
    if (status == "solved") {
      want = "Solved " + entry.at("answer").get<std::string>();
      if (const auto* s = got.solved()) {
        gsmpl::Term reference = gsmpl::parse_term(entry.at("answer").get<std::string>());
        same = gsmpl::variant_equal(reference, s->answer);
      }
    } else if (status == "no") {
      want = "NoSolution";
      same = have == want;
    } else {
      want = "error";
      same = got.aborted() != nullptr;
    }
    if (!same) report.mismatches.push_back({file, want, have});
  }

  for (const auto& entry : expected.at("terms")) {
    ++report.terms;
    const std::string input = entry.at("input");
    const std::string status = entry.at("status");
    std::string have;
    bool same = false;
    try {
      gsmpl::Term ours = gsmpl::parse_term(input);
      have = gsmpl::print_term(ours);
      if (status == "solved") {
        same = gsmpl::variant_equal(ours, gsmpl::parse_term(entry.at("answer").get<std::string>())) &&
               gsmpl::variant_equal(gsmpl::parse_term(have), ours);
      }
    } catch (const gsmpl::ParseError& e) {
      have = std::string("syntax error: ") + e.what();
      same = status != "solved";
    }
    if (!same) report.mismatches.push_back({input, status == "solved" ? entry.at("answer").get<std::string>() : status, have});
  }
  return report;
}

}  // namespace oracle
