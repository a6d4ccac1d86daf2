#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gsmpl/corpus.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = GSMPL_FIXTURES;

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  std::string command = std::string(GSMPL_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "gsmpl_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("run reports outcome and exit code") {
  fs::path dir = scratch("run");
  write(dir / "ok.pl", "solve(X) :- X is 6 * 7.\n");
  write(dir / "bad.pl", "solve(X) :- X is (1.\n");
  write(dir / "stuck.pl", "solve(X) :- solve(X).\n");
  Result ok = cli("run " + (dir / "ok.pl").string());
  CHECK(ok.code == 0);
  CHECK(ok.out == "Solved 42\n");
  CHECK(cli("run " + (dir / "bad.pl").string()).code == 2);
  Result stuck = cli("run --steps 100 " + (dir / "stuck.pl").string());
  CHECK(stuck.code == 3);
  CHECK(stuck.out.find("budget-exhausted") != std::string::npos);
  CHECK(cli("run " + (dir / "missing.pl").string()).code != 0);
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("run --steps 0 x.pl").code == 1);
  CHECK(cli("compose " + (kFixtures / "corpus/gsm8k.jsonl").string() + " --style sideways -o /dev/null").code == 1);
}

TEST_CASE("verify-gold on the fixture corpus") {
  Result r = cli("verify-gold " + (kFixtures / "corpus/gsm8k_prolog.jsonl").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("samples: 36") != std::string::npos);
  CHECK(r.out.find("failed: 0") != std::string::npos);
}

TEST_CASE("verify-gold joins released programs with answers") {
  Result r = cli("verify-gold " + (kFixtures / "corpus/gsm8k_prolog_released.jsonl").string() + " --answers " +
                 (kFixtures / "corpus/gsm8k.jsonl").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("passed: 36") != std::string::npos);
}

TEST_CASE("malformed data exits 4") {
  fs::path dir = scratch("bad_data");
  write(dir / "bad.jsonl", "{\"question\": \"Q\", \"answer\": \"#### 1\"}\n{broken\n");
  Result r = cli("ingest " + (dir / "bad.jsonl").string() + " --schema gsm8k -o " + (dir / "out.jsonl").string());
  CHECK(r.code == 4);
  CHECK(r.out.find(":2") != std::string::npos);
}

TEST_CASE("composed outputs evaluate as fully correct") {
  fs::path dir = scratch("compose");
  const std::string gold = (kFixtures / "corpus/gsm8k_prolog.jsonl").string();
  REQUIRE(cli("compose " + gold + " --style all -o " + dir.string()).code == 0);
  const std::pair<const char*, const char*> styles[] = {
      {"cot", "cot.jsonl"}, {"prolog", "prolog.jsonl"}, {"cot+code", "cot_code.jsonl"}, {"code+cot", "code_cot.jsonl"}};
  for (const auto& [style, file] : styles) {
    INFO(style);
    REQUIRE(fs::exists(dir / file));
    Result r = cli("eval " + gold + " " + (dir / file).string() + " --style '" + style + "' --format csv --outcomes " +
                   (dir / (std::string(file) + ".outcomes")).string());
    CHECK(r.code == 0);
    CHECK(r.out.find(",100.0%,0.0%,0.0%\n") != std::string::npos);
    CHECK(r.out.find("%,0.0%,0.0%,100.0%") == std::string::npos);
  }
  Result report = cli("report " + (dir / "prolog.jsonl.outcomes").string() + " --label 'GSM Prolog' --part code --format csv");
  CHECK(report.code == 0);
  CHECK(report.out == "Finetuning Data,Accuracy,Syntax Error,Semantic Error\nGSM Prolog,100.0%,0.0%,0.0%\n");
}

TEST_CASE("generate with a stub transcript is reproducible") {
  fs::path dir = scratch("generate");
  const fs::path gen = kFixtures / "generation";
  auto run = [&](const std::string& tag, int jobs) {
    return cli("generate " + (gen / "targets.jsonl").string() + " --fixed " + (gen / "fixed.jsonl").string() +
               " --verified " + (gen / "verified.jsonl").string() + " --stub-transcript " +
               (gen / "transcript.jsonl").string() + " --no-network --seed 7 --jobs " + std::to_string(jobs) +
               " --annotated " + (dir / (tag + ".annotated")).string() + " --residue " +
               (dir / (tag + ".residue")).string() + " --log " + (dir / (tag + ".log")).string());
  };
  REQUIRE(run("a", 1).code == 0);
  REQUIRE(run("b", 3).code == 0);
  for (const char* ext : {".annotated", ".residue", ".log"})
    CHECK(gsmpl::read_file(dir / (std::string("a") + ext)) == gsmpl::read_file(dir / (std::string("b") + ext)));
  CHECK(gsmpl::load_samples(dir / "a.annotated", gsmpl::Schema::Gsm8kProlog).size() == 14);
  CHECK(gsmpl::load_samples(dir / "a.residue", gsmpl::Schema::Gsm8k).size() == 2);
  CHECK(cli("generate " + (gen / "targets.jsonl").string() + " --fixed " + (gen / "fixed.jsonl").string() +
            " --no-network")
            .code == 1);
}
