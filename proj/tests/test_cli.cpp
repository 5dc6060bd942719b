#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "hapstack/cli.hpp"
#include "hapstack/model_io.hpp"
#include "support/fixtures.hpp"

using namespace hapstack;
using hapstack::testing::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// A tiny bundle built through the CLI itself.
std::string make_model(const TempDir& dir) {
  const auto path = dir.path("m.hap").string();
  const auto r = run({"init-random", "--config", "2,2,16,32,300,64", "--seed", "3", "--output", path});
  REQUIRE(r.code == kExitOk);
  return path;
}

}  // namespace

TEST_CASE("init-random writes a loadable bundle") {
  TempDir dir;
  const auto path = make_model(dir);
  const auto bundle = load_bundle(path);
  CHECK(bundle.config.num_layers == 2);
  CHECK(bundle.config.vocab_size == 300);
  CHECK(bundle.vocab.size() == 300);
}

TEST_CASE("score") {
  TempDir dir;
  const auto model = make_model(dir);
  const auto r = run({"score", "--model", model}, "Those people are nice.\nA bad day!\n");
  REQUIRE(r.code == kExitOk);
  CHECK(line_count(r.out) == 2);
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    const double hap = std::stod(line.substr(0, line.find('\t')));
    CHECK(hap >= 0.0);
    CHECK(hap <= 1.0);
  }
  const auto empty = run({"score", "--model", model}, "");
  CHECK(empty.code == kExitOk);
  CHECK(empty.out.empty());
}

TEST_CASE("model errors exit with usage code") {
  TempDir dir;
  CHECK(run({"score", "--model", dir.path("none.hap").string()}, "x\n").code == kExitUsage);
  testing::write_file(dir.path("junk.hap"), "XXXXjunk");
  const auto r = run({"score", "--model", dir.path("junk.hap").string()}, "x\n");
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("error:") != std::string::npos);
  ::unsetenv("HAPSTACK_MODEL");
  CHECK(run({"score"}, "x\n").code == kExitUsage);
}

TEST_CASE("HAPSTACK_MODEL is the fallback") {
  TempDir dir;
  const auto model = make_model(dir);
  ::setenv("HAPSTACK_MODEL", model.c_str(), 1);
  const auto r = run({"score"}, "Hello there.\n");
  ::unsetenv("HAPSTACK_MODEL");
  CHECK(r.code == kExitOk);
  CHECK(line_count(r.out) == 1);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"score", "--batch-size", "0"}).code == kExitUsage);
  CHECK(run({"heatmap", "--format", "png"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("filter") {
  TempDir dir;
  const auto model = make_model(dir);
  const std::string corpus = "d1\tA good day. A bad day!\nbroken\nd2\tOne.\\nTwo.\n";
  auto r = run({"filter", "--model", model, "--max-flagged-fraction", "1.0", "--threshold", "0"}, corpus);
  REQUIRE(r.code == kExitOk);
  CHECK(line_count(r.out) == 2);
  CHECK(r.out.find("d1\t1\t1.000000\t") == 0);
  CHECK(r.err.find("processed=2") != std::string::npos);
  CHECK(r.err.find("skipped=1") != std::string::npos);

  testing::write_file(dir.path("c.tsv"), corpus);
  r = run({"filter", "--model", model, "--input", dir.path("c.tsv").string(), "--output",
           dir.path("o.tsv").string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("kept=") != std::string::npos);
  CHECK(line_count(testing::read_file(dir.path("o.tsv"))) == 2);
}

TEST_CASE("heatmap") {
  TempDir dir;
  const auto model = make_model(dir);
  auto r = run({"heatmap", "--model", model, "--format", "key-value-records"}, "bad\nso very bad\n");
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("ATT 0 0 ") == 0);
  CHECK(r.out.find("WORD so ") != std::string::npos);
  r = run({"heatmap", "--model", model}, "bad\n");
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("[CLS]") != std::string::npos);
}

TEST_CASE("rescore with preset scores needs no model") {
  ::unsetenv("HAPSTACK_MODEL");
  const auto r = run({"rescore"}, "-0.5\tsmell like sh*t\t0.02\n-1.2\tsmell like roses\t0.99\n");
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.rfind("1\t-0.210000\t-1.2\t0.990000\tsmell like roses\n", 0) == 0);
  CHECK(run({"rescore", "--lambda", "0"}, "-0.5\ta\t0.02\n-1.2\tb\t0.99\n").out.rfind("1\t-0.500000", 0) == 0);
  CHECK(run({"rescore"}, "").code == kExitRuntime);
  CHECK(run({"rescore"}, "-1\tneeds a model\n").code == kExitUsage);
}

TEST_CASE("sample") {
  TempDir dir;
  testing::write_file(dir.path("lex.txt"), "fool\n");
  std::string sentences;
  for (int i = 0; i < 10; ++i) sentences += "a fool " + std::to_string(i) + "\n";
  for (int i = 0; i < 10; ++i) sentences += "a nice day " + std::to_string(i) + "\n";
  auto r = run({"sample", "--lexicon", dir.path("lex.txt").string(), "--target", "6", "--seed", "2"}, sentences);
  REQUIRE(r.code == kExitOk);
  CHECK(line_count(r.out) == 6);
  CHECK(r.err.find("positives=3") != std::string::npos);
  r = run({"sample", "--lexicon", dir.path("lex.txt").string(), "--match-mode", "exact"}, "foolish\n");
  CHECK(r.out == "1\tfoolish\tfool\n");
  CHECK(run({"sample"}, "x\n").code == kExitUsage);

  const auto model = make_model(dir);
  r = run({"sample", "--mine", "--model", model, "--min-hap", "0", "--limit", "3"}, sentences);
  CHECK(r.code == kExitOk);
  CHECK(line_count(r.out) == 3);
}

TEST_CASE("bench with identical configs") {
  const auto r = run({"bench", "--config", "1,2,64,128,300,64", "--config-b", "1,2,64,128,300,64", "--runs", "40",
                      "--seeds", "2", "--seq-len", "16"});
  REQUIRE(r.code == kExitOk);
  const auto at = r.out.find("speedup=");
  REQUIRE(at != std::string::npos);
  const double speedup = std::stod(r.out.substr(at + 8));
  CHECK(speedup >= 0.8);
  CHECK(speedup <= 1.25);
}
