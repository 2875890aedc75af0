#include "memoir/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "memoir/audit.hpp"
#include "memoir/dataio.hpp"
#include "memoir/error.hpp"
#include "memoir/eval.hpp"
#include "memoir/margin.hpp"
#include "memoir/synthetic.hpp"
#include "memoir/train.hpp"

namespace memoir {

namespace {

using json = nlohmann::ordered_json;

struct CommonIndexFlags {
  std::string backend = "exact";
  std::size_t lsh_bits = 64;
  std::size_t lsh_tables = 32;
  std::size_t swg_m = 16;
  std::size_t swg_ef_search = 64;
  std::size_t swg_ef_construction = 100;
  std::uint64_t seed = 1;
};

void add_index_flags(CLI::App* cmd, CommonIndexFlags& f) {
  cmd->add_option("--backend", f.backend, "MIPS backend: exact, simplelsh or swgraph")
      ->capture_default_str();
  cmd->add_option("--lsh-bits", f.lsh_bits, "SimpleLSH bits per code (K)")->capture_default_str();
  cmd->add_option("--lsh-tables", f.lsh_tables, "SimpleLSH tables (L)")->capture_default_str();
  cmd->add_option("--swg-m", f.swg_m, "SW-graph maximum degree")->capture_default_str();
  cmd->add_option("--swg-ef-search", f.swg_ef_search, "SW-graph search beam")
      ->capture_default_str();
  cmd->add_option("--swg-ef-construction", f.swg_ef_construction, "SW-graph build beam")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
}

MipsParams index_params(const CLI::App* cmd, const CommonIndexFlags& f, std::ostream& err) {
  MipsParams p;
  p.backend = parse_backend(f.backend);
  p.seed = f.seed;
  p.lsh.bits = f.lsh_bits;
  p.lsh.tables = f.lsh_tables;
  p.swg.max_neighbors = f.swg_m;
  p.swg.ef_search = f.swg_ef_search;
  p.swg.ef_construction = f.swg_ef_construction;
  const bool lsh_flags = cmd->count("--lsh-bits") + cmd->count("--lsh-tables") > 0;
  const bool swg_flags =
      cmd->count("--swg-m") + cmd->count("--swg-ef-search") + cmd->count("--swg-ef-construction") > 0;
  if (lsh_flags && p.backend != MipsBackend::simple_lsh) {
    err << "warning: --lsh-* flags are ignored with --backend " << f.backend << '\n';
  }
  if (swg_flags && p.backend != MipsBackend::sw_graph) {
    err << "warning: --swg-* flags are ignored with --backend " << f.backend << '\n';
  }
  return p;
}

std::string algorithm_tag(const TrainConfig& cfg) {
  return "memoir-" + to_string(cfg.algorithm) + "/" + to_string(cfg.mips.backend);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

F1Convention parse_f1(const std::string& name) {
  if (name == "macro") return F1Convention::harmonic_of_macro;
  if (name == "per-class") return F1Convention::mean_of_per_class;
  throw ConfigError("unknown F1 convention '" + name + "' (expected macro or per-class)");
}

Dataset load_against_model(const std::string& path, const Model& model, bool zero_based) {
  ParseOptions opts;
  opts.zero_based = zero_based;
  opts.dim = model.header.dim;
  opts.labels = &model.header.labels;
  return parse_dataset(path, opts);
}

// ------------------------------------------------------------------ train

struct TrainFlags {
  std::string input;
  std::string algo = "l2";
  std::optional<double> lambda;
  double eta0 = 0.1;
  double eta_step = 0.02;
  std::size_t epochs = 25;
  std::size_t batch_size = 0;
  double rho = 1.0;
  std::size_t threads = 1;
  std::string heldout;
  std::string model_out;
  std::string log_out;
  std::string model_format = "binary";
  bool zero_based = false;
  std::optional<std::size_t> dim;
  bool average = false;
  bool early_stop = false;
  std::size_t patience = 5;
  bool no_truncation = false;
  std::optional<double> truncation_max_change;
  bool sum_updates = false;
  CommonIndexFlags index;
};

int cmd_train(const CLI::App* cmd, const TrainFlags& f, std::ostream& out, std::ostream& err) {
  ParseOptions popts;
  popts.zero_based = f.zero_based;
  popts.dim = f.dim;
  const Dataset data = parse_dataset(f.input, popts);
  if (data.dropped_features > 0) {
    err << "warning: dropped " << data.dropped_features << " features beyond dim " << data.dim
        << '\n';
  }

  TrainConfig cfg;
  cfg.algorithm = parse_regularizer(f.algo);
  cfg.lambda = f.lambda ? *f.lambda : (cfg.algorithm == Regularizer::l2 ? 1.0 : 1e-6);
  cfg.rho = f.rho;
  cfg.eta0 = f.eta0;
  cfg.eta_step = f.eta_step;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch_size;
  cfg.seed = f.index.seed;
  cfg.threads = f.threads;
  cfg.mips = index_params(cmd, f.index, err);
  cfg.mean_batch_update = !f.sum_updates;
  cfg.truncation = !f.no_truncation;
  cfg.truncation_max_change = f.truncation_max_change;
  cfg.average = f.average;
  cfg.early_stopping = f.early_stop;
  cfg.patience = f.patience;
  if (cfg.algorithm == Regularizer::l2 && (f.no_truncation || f.truncation_max_change)) {
    err << "warning: truncation flags are ignored with --algo l2\n";
  }

  std::optional<Dataset> heldout;
  TrainOptions topts;
  if (!f.heldout.empty()) {
    ParseOptions hopts;
    hopts.zero_based = f.zero_based;
    hopts.dim = data.dim;
    hopts.labels = &data.labels;
    heldout = parse_dataset(f.heldout, hopts);
    if (heldout->dropped_features > 0) {
      err << "warning: dropped " << heldout->dropped_features
          << " heldout features beyond dim " << data.dim << '\n';
    }
    topts.heldout = &*heldout;
  } else if (cfg.early_stopping) {
    throw ConfigError("--early-stop needs --heldout");
  }

  const auto start = std::chrono::steady_clock::now();
  Trainer trainer(data, cfg, topts);
  trainer.run();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  TrainResult result = std::move(trainer).finish();
  const WeightMatrix& final_w = cfg.average ? *result.averaged : result.weights;

  ModelHeader header;
  header.num_classes = final_w.num_classes();
  header.dim = final_w.dim();
  header.lambda = cfg.lambda;
  header.algorithm = algorithm_tag(cfg);
  header.labels = data.labels;
  auto model_file = open_out(f.model_out);
  save_model(model_file, final_w, header,
             f.model_format == "text" ? ModelEncoding::text : ModelEncoding::binary);
  model_file.close();
  if (!model_file) throw Error("write error on '" + f.model_out + "'");

  if (!f.log_out.empty()) {
    auto log_file = open_out(f.log_out);
    write_train_log(log_file, result.log);
  }

  json rec;
  rec["model"] = f.model_out;
  rec["algorithm"] = header.algorithm;
  rec["classes"] = data.num_classes;
  rec["dim"] = data.dim;
  rec["examples"] = data.size();
  rec["iterations"] = result.log.records.empty() ? cfg.epochs : result.log.records.back().epoch;
  rec["batch_size"] = cfg.batch_size ? cfg.batch_size : default_batch_size(data.num_classes);
  rec["lambda"] = cfg.lambda;
  rec["nnz"] = final_w.nnz();
  rec["train_seconds"] = seconds;
  if (heldout) {
    const EvalReport r = evaluate(final_w, *heldout, cfg.threads);
    rec["heldout_accuracy"] = r.accuracy;
    rec["heldout_maf1"] = r.macro_f1;
  }
  out << rec.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- predict

int cmd_predict(const std::string& model_path, const std::string& input, const std::string& output,
                bool zero_based, std::size_t threads, std::ostream& out) {
  const Model model = load_model(model_path);
  const Dataset data = load_against_model(input, model, zero_based);
  const PredictionSet p = predict_all(model.weights, data, threads);
  std::ofstream file;
  std::ostream* dst = &out;
  if (!output.empty()) {
    file = open_out(output);
    dst = &file;
  }
  for (ClassId c : p.predicted) {
    if (c < model.header.labels.size()) {
      *dst << model.header.labels.name(c) << '\n';
    } else {
      *dst << c << '\n';
    }
  }
  if (file.is_open()) {
    file.close();
    if (!file) throw Error("write error on '" + output + "'");
  }
  return 0;
}

// ------------------------------------------------------------------- eval

int cmd_eval(const std::string& model_path, const std::string& test, bool zero_based,
             std::size_t threads, const std::string& f1, double rho, std::ostream& out,
             std::ostream& err) {
  const Model model = load_model(model_path);
  const Dataset data = load_against_model(test, model, zero_based);
  if (data.dropped_features > 0) {
    err << "warning: dropped " << data.dropped_features << " features beyond dim "
        << model.header.dim << '\n';
  }
  const F1Convention conv = parse_f1(f1);
  const EvalReport r = evaluate(model.weights, data, threads, conv);
  json rec;
  rec["n"] = r.n;
  rec["accuracy"] = r.accuracy;
  rec["macro_f1"] = r.macro_f1;
  rec["f1_convention"] = f1;
  rec["predict_seconds"] = r.predict_seconds;
  rec["dropped_features"] = data.dropped_features;

  Dataset known;
  known.dim = data.dim;
  known.num_classes = model.weights.num_classes();
  for (const auto& ex : data.examples) {
    if (ex.label < known.num_classes) known.examples.push_back(ex);
  }
  rec["unseen_label_examples"] = data.size() - known.size();
  if (!known.empty() && known.num_classes >= 2) {
    const RiskReport risk = empirical_risk(model.weights, known, rho);
    rec["rho"] = rho;
    rec["empirical_hinge"] = risk.empirical_hinge;
    rec["zero_one"] = risk.zero_one;
  }
  out << rec.dump() << '\n';
  return 0;
}

// ------------------------------------------------------------------ audit

int cmd_audit(const CLI::App* cmd, const std::string& model_path, const std::string& queries,
              double epsilon, bool zero_based, const CommonIndexFlags& flags, std::ostream& out,
              std::ostream& err) {
  const Model model = load_model(model_path);
  Dataset data = load_against_model(queries, model, zero_based);
  const std::size_t before = data.size();
  std::erase_if(data.examples,
                [&](const Example& ex) { return ex.label >= model.weights.num_classes(); });
  if (data.size() < before) {
    err << "warning: skipped " << (before - data.size()) << " queries with unseen labels\n";
  }
  data.num_classes = model.weights.num_classes();
  if (data.empty()) throw Error("no auditable queries in '" + queries + "'");
  const MipsParams params = index_params(cmd, flags, err);
  const auto start = std::chrono::steady_clock::now();
  const auto index = build_index(model.weights, params);
  const double build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const AuditReport r = audit_inexactness(*index, model.weights, data, epsilon);

  json rec;
  rec["backend"] = to_string(params.backend);
  rec["queries"] = r.queries;
  rec["epsilon"] = std::isinf(epsilon) ? json("inf") : json(epsilon);
  rec["exceed_count"] = r.exceed_count;
  rec["delta_hat"] = r.delta_hat;
  rec["recall_at_1"] = r.recall_at_1;
  rec["mean_gap"] = r.mean_gap;
  rec["max_gap"] = r.max_gap;
  json hist = json::array();
  for (std::size_t k = 0; k < r.histogram.counts.size(); ++k) {
    const double edge = r.histogram.upper_edges[k];
    hist.push_back({{"le", std::isinf(edge) ? json("inf") : json(edge)},
                    {"count", r.histogram.counts[k]}});
  }
  rec["gap_histogram"] = hist;
  rec["build_seconds"] = build_seconds;
  out << rec.dump() << '\n';
  return 0;
}

// ------------------------------------------------------------------ bench

struct BenchFlags {
  SyntheticSpec spec;
  bool toy = false;
  std::string write_train;
  std::string write_test;
  bool no_train = false;
  std::vector<std::string> backends = {"exact"};
  std::string algo = "l2";
  std::optional<double> lambda;
  std::size_t epochs = 25;
  std::size_t batch_size = 0;
  std::size_t threads = 1;
};

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  SyntheticSplit split;
  if (f.toy) {
    split.train = make_separable_toy(20, f.spec.seed);
    split.test = make_separable_toy(20, f.spec.seed + 1);
  } else {
    split = make_synthetic(f.spec);
  }
  if (!f.write_train.empty()) write_dataset(f.write_train, split.train);
  if (!f.write_test.empty()) write_dataset(f.write_test, split.test);
  if (f.no_train) return 0;
  for (const auto& name : f.backends) {
    TrainConfig cfg;
    cfg.algorithm = parse_regularizer(f.algo);
    cfg.lambda = f.lambda ? *f.lambda : (cfg.algorithm == Regularizer::l2 ? 1.0 : 1e-6);
    cfg.epochs = f.epochs;
    cfg.batch_size = f.batch_size;
    cfg.seed = f.spec.seed;
    cfg.threads = f.threads;
    cfg.log_objective = false;
    cfg.mips.backend = parse_backend(name);
    cfg.mips.seed = f.spec.seed;
    const auto start = std::chrono::steady_clock::now();
    const TrainResult result = train(split.train, cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const EvalReport r = evaluate(result.weights, split.test, f.threads);
    json rec;
    rec["backend"] = name;
    rec["algorithm"] = algorithm_tag(cfg);
    rec["classes"] = split.train.num_classes;
    rec["dim"] = split.train.dim;
    rec["train_examples"] = split.train.size();
    rec["test_examples"] = split.test.size();
    rec["iterations"] = cfg.epochs;
    rec["train_seconds"] = seconds;
    rec["test_accuracy"] = r.accuracy;
    rec["test_maf1"] = r.macro_f1;
    rec["nnz"] = result.weights.nnz();
    out << rec.dump() << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Extreme multi-class linear SVM training with inexact margins", "memoir");
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--input", tf.input, "training set")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--algo", tf.algo, "regularizer: l2 or l1")
      ->check(CLI::IsMember({"l2", "l1"}))
      ->capture_default_str();
  train_cmd->add_option("--lambda", tf.lambda, "regularization strength [l2: 1, l1: 1e-6]");
  train_cmd->add_option("--eta0", tf.eta0, "initial learning rate")->capture_default_str();
  train_cmd->add_option("--eta-step", tf.eta_step, "learning-rate decay")->capture_default_str();
  train_cmd->add_option("--epochs", tf.epochs, "iterations T (one batch each)")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", tf.batch_size, "batch size, 0 = round(100 sqrt(C))")
      ->capture_default_str();
  train_cmd->add_option("--rho", tf.rho, "margin scale of the reported hinge risk")
      ->capture_default_str();
  train_cmd->add_option("--threads", tf.threads, "threads for the rival queries")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--heldout", tf.heldout, "heldout set")->check(CLI::ExistingFile);
  train_cmd->add_option("--model-out", tf.model_out, "model output path")->required();
  train_cmd->add_option("--log-out", tf.log_out, "per-iteration TSV log");
  train_cmd->add_option("--model-format", tf.model_format, "binary or text")
      ->check(CLI::IsMember({"binary", "text"}))
      ->capture_default_str();
  train_cmd->add_flag("--zero-based", tf.zero_based, "feature ids start at 0");
  train_cmd->add_option("--dim", tf.dim, "force the feature dimension");
  train_cmd->add_flag("--average", tf.average, "save the averaged iterate");
  train_cmd->add_flag("--early-stop", tf.early_stop, "stop when heldout MaF1 stalls");
  train_cmd->add_option("--patience", tf.patience, "early-stop patience")->capture_default_str();
  train_cmd->add_flag("--no-truncation", tf.no_truncation, "l1: skip the soft-threshold step");
  train_cmd->add_option("--truncation-max-change", tf.truncation_max_change,
                        "l1: truncate a row only if the removed part is at most this "
                        "fraction of its norm");
  train_cmd->add_flag("--sum-batch-updates", tf.sum_updates,
                      "add eta * x per active example instead of eta * x / |b|");
  add_index_flags(train_cmd, tf.index);

  std::string model_path;
  std::string input_path;
  std::string output_path;
  bool zero_based = false;
  std::size_t threads = 1;
  auto* predict_cmd = app.add_subcommand("predict", "predict labels");
  predict_cmd->add_option("--model", model_path, "model file")->required();
  predict_cmd->add_option("--input", input_path, "examples to label")->required();
  predict_cmd->add_option("--output", output_path, "labels file (default stdout)");
  predict_cmd->add_flag("--zero-based", zero_based, "feature ids start at 0");
  predict_cmd->add_option("--threads", threads, "prediction threads")->check(CLI::PositiveNumber);

  std::string f1 = "macro";
  double rho = 1.0;
  auto* eval_cmd = app.add_subcommand("eval", "accuracy and MaF1 on a labeled set");
  eval_cmd->add_option("--model", model_path, "model file")->required();
  eval_cmd->add_option("--test", input_path, "labeled test set")->required();
  eval_cmd->add_flag("--zero-based", zero_based, "feature ids start at 0");
  eval_cmd->add_option("--threads", threads, "prediction threads")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--f1", f1, "macro (harmonic of macro P and R) or per-class")
      ->check(CLI::IsMember({"macro", "per-class"}))
      ->capture_default_str();
  eval_cmd->add_option("--rho", rho, "margin scale of the hinge risk")->capture_default_str();

  double epsilon = 0.0;
  CommonIndexFlags audit_index;
  audit_index.backend = "simplelsh";
  auto* audit_cmd = app.add_subcommand("audit", "compare index margins with exact margins");
  audit_cmd->add_option("--model", model_path, "model file")->required();
  audit_cmd->add_option("--queries", input_path, "labeled queries")->required();
  audit_cmd->add_option("--epsilon", epsilon, "gap tolerance")->capture_default_str();
  audit_cmd->add_flag("--zero-based", zero_based, "feature ids start at 0");
  add_index_flags(audit_cmd, audit_index);

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "synthetic data generator and timing");
  bench_cmd->add_option("--classes", bf.spec.classes)->capture_default_str();
  bench_cmd->add_option("--dim", bf.spec.dim)->capture_default_str();
  bench_cmd->add_option("--train-examples", bf.spec.train_examples)->capture_default_str();
  bench_cmd->add_option("--test-examples", bf.spec.test_examples)->capture_default_str();
  bench_cmd->add_option("--prototype-nnz", bf.spec.prototype_nnz)->capture_default_str();
  bench_cmd->add_option("--noise-nnz", bf.spec.noise_nnz)->capture_default_str();
  bench_cmd->add_option("--noise", bf.spec.noise)->capture_default_str();
  bench_cmd->add_option("--seed", bf.spec.seed)->capture_default_str();
  bench_cmd->add_flag("--toy", bf.toy, "use the separable 3-class toy set");
  bench_cmd->add_option("--write-train", bf.write_train, "write the training split");
  bench_cmd->add_option("--write-test", bf.write_test, "write the test split");
  bench_cmd->add_flag("--no-train", bf.no_train, "only generate data");
  bench_cmd->add_option("--backends", bf.backends, "backends to time")->capture_default_str();
  bench_cmd->add_option("--algo", bf.algo)
      ->check(CLI::IsMember({"l2", "l1"}))
      ->capture_default_str();
  bench_cmd->add_option("--lambda", bf.lambda);
  bench_cmd->add_option("--epochs", bf.epochs)->capture_default_str();
  bench_cmd->add_option("--batch-size", bf.batch_size)->capture_default_str();
  bench_cmd->add_option("--threads", bf.threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train_cmd) return cmd_train(train_cmd, tf, out, err);
    if (*predict_cmd) return cmd_predict(model_path, input_path, output_path, zero_based, threads, out);
    if (*eval_cmd) return cmd_eval(model_path, input_path, zero_based, threads, f1, rho, out, err);
    if (*audit_cmd) {
      return cmd_audit(audit_cmd, model_path, input_path, epsilon, zero_based, audit_index, out,
                       err);
    }
    if (*bench_cmd) return cmd_bench(bf, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace memoir
