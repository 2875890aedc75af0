#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "memoir/cli.hpp"
#include "memoir/dataio.hpp"
#include "memoir/eval.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "memoir");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = memoir::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("memoir_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const std::string kTrain = std::string(MEMOIR_DATA_DIR) + "/toy_train.svm";
const std::string kHeldout = std::string(MEMOIR_DATA_DIR) + "/toy_heldout.svm";

}  // namespace

TEST_CASE("train, eval and predict on the bundled toy set") {
  TempDir tmp;
  const auto model = (tmp.path / "toy.bin").string();
  const auto log = (tmp.path / "toy.tsv").string();
  const Run t = run({"train", "--input", kTrain, "--heldout", kHeldout, "--algo", "l2", "--backend",
                     "exact", "--epochs", "100", "--seed", "3", "--model-out", model, "--log-out", log});
  REQUIRE(t.code == 0);
  const auto rec = nlohmann::json::parse(t.out);
  CHECK(rec["heldout_accuracy"].get<double>() >= 0.95);
  const std::string log_text = slurp(log);
  CHECK(log_text.rfind("epoch\tobjective", 0) == 0);
  CHECK(std::count(log_text.begin(), log_text.end(), '\n') == 101);

  const Run e = run({"eval", "--model", model, "--test", kHeldout});
  REQUIRE(e.code == 0);
  const auto ev = nlohmann::json::parse(e.out);
  const memoir::Model m = memoir::load_model(model);
  memoir::ParseOptions po;
  po.labels = &m.header.labels;
  po.dim = m.header.dim;
  const memoir::Dataset held = memoir::parse_dataset(kHeldout, po);
  const memoir::EvalReport oracle = memoir::evaluate(m.weights, held);
  CHECK(ev["accuracy"].get<double>() == oracle.accuracy);
  CHECK(ev["macro_f1"].get<double>() == oracle.macro_f1);
  CHECK(ev["n"].get<std::size_t>() == held.size());

  const auto labels = (tmp.path / "pred.txt").string();
  REQUIRE(run({"predict", "--model", model, "--input", kHeldout, "--output", labels}).code == 0);
  std::istringstream lines(slurp(labels));
  std::string line;
  std::size_t n = 0, correct = 0;
  for (const auto& ex : held.examples) {
    REQUIRE(std::getline(lines, line));
    ++n;
    correct += line == held.labels.name(ex.label);
  }
  CHECK(static_cast<double>(correct) / n == oracle.accuracy);
}

TEST_CASE("identical train runs write identical binary models") {
  TempDir tmp;
  for (const std::string backend : {"exact", "simplelsh", "swgraph"}) {
    const auto a = (tmp.path / "a.bin").string();
    const auto b = (tmp.path / "b.bin").string();
    for (const auto& out : {a, b}) {
      REQUIRE(run({"train", "--input", kTrain, "--backend", backend, "--epochs", "20", "--seed", "5",
                   "--threads", "2", "--model-out", out})
                  .code == 0);
    }
    CHECK(slurp(a) == slurp(b));
  }
}

TEST_CASE("audit reports zero delta for the exact backend") {
  TempDir tmp;
  const auto model = (tmp.path / "m.txt").string();
  REQUIRE(run({"train", "--input", kTrain, "--model-out", model, "--model-format", "text"}).code == 0);
  const Run a = run({"audit", "--model", model, "--queries", kHeldout, "--backend", "exact",
                     "--epsilon", "0"});
  REQUIRE(a.code == 0);
  const auto rec = nlohmann::json::parse(a.out);
  CHECK(rec["delta_hat"].get<double>() == 0.0);
  CHECK(rec["queries"].get<std::size_t>() == 60);
}

TEST_CASE("errors and warnings") {
  const Run missing = run({"predict", "--model", "/no/such/model.bin", "--input", kTrain});
  CHECK(missing.code != 0);
  CHECK(missing.err.find("/no/such/model.bin") != std::string::npos);
  CHECK(run({"train", "--bogus"}).code != 0);
  CHECK(run({}).code != 0);
  CHECK(run({"train", "--input", kTrain, "--model-out", "x", "--algo", "l3"}).code != 0);
  TempDir tmp;
  const Run warn = run({"train", "--input", kTrain, "--backend", "exact", "--lsh-bits", "16",
                        "--epochs", "2", "--model-out", (tmp.path / "w.bin").string()});
  CHECK(warn.code == 0);
  CHECK(warn.err.find("warning") != std::string::npos);
}

TEST_CASE("bench writes synthetic data") {
  TempDir tmp;
  const auto train = (tmp.path / "s.svm").string();
  const Run b = run({"bench", "--classes", "5", "--dim", "20", "--train-examples", "50",
                     "--test-examples", "10", "--write-train", train, "--no-train"});
  REQUIRE(b.code == 0);
  const memoir::Dataset d = memoir::parse_dataset(train);
  CHECK(d.size() == 50);
  CHECK(d.dim <= 20);
  const Run timed = run({"bench", "--toy", "--epochs", "10", "--backends", "exact", "swgraph"});
  CHECK(timed.code == 0);
  CHECK(std::count(timed.out.begin(), timed.out.end(), '\n') == 2);
}
