#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "memoir/dataio.hpp"
#include "memoir/error.hpp"
#include "test_util.hpp"

using namespace memoir;

namespace {

Dataset parse(const std::string& text, ParseOptions opts = {}) {
  std::istringstream in(text);
  return parse_dataset(in, opts);
}

WeightMatrix random_matrix(std::size_t c, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  WeightMatrix w(c, d);
  for (ClassId k = 0; k < c; ++k) {
    if (k % 4 != 3) w.set_row(k, testutil::random_sparse(d, 1 + k % d, rng, -1e3, 1e3));
  }
  w.global_scale(0.37);
  return w;
}

}  // namespace

TEST_CASE("parses a LIBSVM line") {
  const Dataset d = parse("3 1:0.5 7:2.0\n");
  REQUIRE(d.size() == 1);
  CHECK(d.labels.name(d.examples[0].label) == "3");
  CHECK(d.dim == 7);
  CHECK(d.num_classes == 1);
  CHECK(d.examples[0].features == SparseVector(7, {0, 6}, {0.5, 2.0}));
}

TEST_CASE("labels are dense in first-seen order") {
  const Dataset d = parse("b 1:1\na 2:1\n\nb 3:1\r\nc\n");
  CHECK(d.size() == 4);
  CHECK(d.num_classes == 3);
  CHECK(d.labels.names() == std::vector<std::string>{"b", "a", "c"});
  CHECK(d.examples[2].label == 0);
  CHECK(d.examples[3].features.empty());
}

TEST_CASE("zero-based and forced dimensions") {
  const Dataset z = parse("1 0:1 4:2\n", {.zero_based = true});
  CHECK(z.dim == 5);
  CHECK(z.examples[0].features.at(0) == 1.0);
  ParseOptions forced;
  forced.dim = 3;
  const Dataset f = parse("1 1:1 3:1 4:1 9:1\n2 2:1\n", forced);
  CHECK(f.dim == 3);
  CHECK(f.dropped_features == 2);
  CHECK(f.examples[0].features.nnz() == 2);
}

TEST_CASE("parse errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("1 1:1\n2 3:1 3:2\n") == 2);
  CHECK(line_of("1 1:1\n\n2 -3:1\n") == 3);
  CHECK(line_of("1 0:1\n") == 1);
  CHECK(line_of("1 x:1\n") == 1);
  CHECK(line_of("1 1:abc\n") == 1);
  CHECK(line_of("1 1:nan\n") == 1);
  CHECK(line_of("1 1\n") == 1);
  CHECK(line_of("1:2 3:4\n") == 1);
  CHECK(line_of("1,2 3:4\n") == 1);
  CHECK(line_of("1 1:1:1\n") == 1);
}

TEST_CASE("empty input") {
  CHECK_THROWS_WITH_AS(parse(""), "empty dataset", Error);
  CHECK_THROWS_WITH_AS(parse("\n  \n"), "empty dataset", Error);
  CHECK_THROWS(parse_dataset(std::string("/nonexistent/file.svm")));
}

TEST_CASE("write then parse reproduces a random dataset") {
  std::mt19937_64 rng(17);
  Dataset d;
  d.dim = 50;
  for (int k = 0; k < 100; ++k) {
    const ClassId y = d.labels.intern("L" + std::to_string(rng() % 7));
    SparseVector x = testutil::random_sparse(50, 1 + k % 20, rng, -1e5, 1e5);
    if (k == 0) x.push_back(49, 1e-300);
    d.examples.push_back({y, x});
  }
  d.num_classes = d.labels.size();
  for (bool zero_based : {false, true}) {
    std::stringstream buf;
    write_dataset(buf, d, zero_based);
    const Dataset back = parse_dataset(buf, {.zero_based = zero_based});
    CHECK(back.labels == d.labels);
    REQUIRE(back.size() == d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      CHECK(back.examples[k].label == d.examples[k].label);
      CHECK(back.examples[k].features == d.examples[k].features);
    }
  }
}

TEST_CASE("fuzzed lines never crash the parser") {
  std::mt19937_64 rng(23);
  const std::string alphabet = "0123456789:.-+eE, \tabx\r";
  std::size_t rejected = 0;
  for (int k = 0; k < 20000; ++k) {
    std::string line;
    const std::size_t n = rng() % 24;
    for (std::size_t j = 0; j < n; ++j) line += alphabet[rng() % alphabet.size()];
    try {
      const Dataset d = parse(line + "\n");
      for (const auto& ex : d.examples) {
        CHECK(ex.label < d.num_classes);
        for (auto j : ex.features.indices()) CHECK(j < d.dim);
      }
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(rejected > 0);
}

TEST_CASE("model round trip in both encodings") {
  const WeightMatrix w = random_matrix(9, 30, 5);
  ModelHeader h;
  h.lambda = 0.1;
  h.algorithm = "memoir-l2/exact";
  for (ClassId c = 0; c < 9; ++c) h.labels.intern("class_" + std::to_string(c));
  for (auto enc : {ModelEncoding::text, ModelEncoding::binary}) {
    std::stringstream buf;
    save_model(buf, w, h, enc);
    const Model m = load_model(buf);
    CHECK(m.header.num_classes == 9);
    CHECK(m.header.dim == 30);
    CHECK(m.header.lambda == 0.1);
    CHECK(m.header.algorithm == h.algorithm);
    CHECK(m.header.labels == h.labels);
    for (ClassId c = 0; c < 9; ++c) {
      CHECK(m.weights.materialize_row(c) == w.materialize_row(c));
    }
  }
}

TEST_CASE("zero model round trip") {
  const WeightMatrix w(4, 6);
  std::stringstream buf;
  save_model(buf, w, {}, ModelEncoding::text);
  CHECK(buf.str().find("MEMOIR1\n") == 0);
  const Model m = load_model(buf);
  CHECK(m.weights.num_classes() == 4);
  CHECK(m.weights.nnz() == 0);
  CHECK(m.header.labels.size() == 0);
}

TEST_CASE("truncated or corrupt models are rejected") {
  const WeightMatrix w = random_matrix(5, 12, 8);
  for (auto enc : {ModelEncoding::text, ModelEncoding::binary}) {
    std::stringstream buf;
    save_model(buf, w, {}, enc);
    const std::string full = buf.str();
    // a text file missing only its final newline is still complete
    const std::size_t limit = enc == ModelEncoding::text ? full.size() - 1 : full.size();
    for (std::size_t cut = 0; cut < limit; cut += 3) {
      std::istringstream in(full.substr(0, cut));
      CHECK_THROWS_AS(load_model(in), ModelFormatError);
    }
  }
  std::stringstream buf;
  save_model(buf, w, {}, ModelEncoding::text);
  std::string text = buf.str();
  text.replace(text.find("format_version 1"), 16, "format_version 2");
  std::istringstream bad_version(text);
  CHECK_THROWS_AS(load_model(bad_version), ModelFormatError);
  std::istringstream junk("hello world");
  CHECK_THROWS_AS(load_model(junk), ModelFormatError);
}

TEST_CASE("model file paths") {
  const auto dir = std::filesystem::temp_directory_path() / "memoir_dataio_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "m.bin").string();
  save_model(path, random_matrix(3, 4, 1), {}, ModelEncoding::binary);
  CHECK(load_model(path).weights.num_classes() == 3);
  CHECK_THROWS_AS(load_model((dir / "missing.bin").string()), Error);
  std::filesystem::remove_all(dir);
}
