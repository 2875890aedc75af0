#include "memoir/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "memoir/error.hpp"
#include "memoir/eval.hpp"
#include "memoir/margin.hpp"

namespace memoir {

std::string to_string(Regularizer r) { return r == Regularizer::l2 ? "l2" : "l1"; }

Regularizer parse_regularizer(const std::string& name) {
  if (name == "l2") return Regularizer::l2;
  if (name == "l1") return Regularizer::l1;
  throw ConfigError("unknown algorithm '" + name + "' (expected l2 or l1)");
}

std::size_t default_batch_size(std::size_t num_classes) {
  const auto b = static_cast<std::size_t>(std::llround(100.0 * std::sqrt(static_cast<double>(num_classes))));
  return std::max<std::size_t>(1, b);
}

void validate(const TrainConfig& cfg, std::size_t num_classes) {
  if (num_classes < 2) throw ConfigError("training needs at least two classes");
  if (cfg.algorithm == Regularizer::l2 && !(cfg.lambda > 0.0)) {
    throw ConfigError("lambda must be positive for the l2 trainer");
  }
  if (cfg.algorithm == Regularizer::l1 && !(cfg.lambda >= 0.0)) {
    throw ConfigError("lambda must be non-negative for the l1 trainer");
  }
  if (!std::isfinite(cfg.lambda)) throw ConfigError("lambda must be finite");
  if (!(cfg.rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(cfg.eta0 > 0.0) || !std::isfinite(cfg.eta0)) throw ConfigError("eta0 must be positive");
  if (!(cfg.eta_step >= 0.0) || !std::isfinite(cfg.eta_step)) {
    throw ConfigError("eta_step must be non-negative");
  }
  if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
  if (cfg.threads == 0) throw ConfigError("threads must be positive");
  if (cfg.truncation_max_change && !(*cfg.truncation_max_change >= 0.0)) {
    throw ConfigError("truncation change bound must be non-negative");
  }
  if (cfg.early_stopping && cfg.patience == 0) throw ConfigError("patience must be positive");
  // eta_t is non-increasing, so eta_1 bounds every step.
  if (cfg.algorithm == Regularizer::l2 &&
      !(cfg.lambda * learning_rate(1, cfg.eta0, cfg.eta_step) < 1.0)) {
    throw ConfigError("lambda * eta_1 must be below 1 so that the shrink factor stays positive");
  }
}

double learning_rate(std::size_t t, double eta0, double eta_step) {
  return eta0 / (1.0 + eta_step * static_cast<double>(t));
}

double objective_l2(const WeightMatrix& w, const Dataset& data, double lambda) {
  return 0.5 * lambda * w.frobenius_sq() + empirical_risk(w, data, 1.0).empirical_hinge;
}

double objective_l1(const WeightMatrix& w, const Dataset& data, double lambda) {
  return 0.5 * lambda * w.l1_norm() + empirical_risk(w, data, 1.0).empirical_hinge;
}

SparseVector truncate(const SparseVector& w, std::size_t xi, double lambda, double eta,
                      std::size_t num_classes) {
  if (xi == 0) throw Error("truncate: xi must be at least 1");
  const double tau = static_cast<double>(num_classes) / static_cast<double>(xi) * lambda * eta;
  SparseVector out(w.dim());
  const auto idx = w.indices();
  const auto val = w.values();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double v = val[k];
    if (v > tau) {
      out.push_back(idx[k], v - tau);
    } else if (v < -tau) {
      out.push_back(idx[k], v + tau);
    }
  }
  out.purge_zeros();
  return out;
}

std::vector<std::size_t> sample_batch(std::size_t dataset_size, std::size_t size,
                                      std::mt19937_64& rng) {
  if (dataset_size == 0) throw Error("sample_batch: empty dataset");
  if (size == 0) throw Error("sample_batch: batch size must be positive");
  std::uniform_int_distribution<std::size_t> pick(0, dataset_size - 1);
  std::vector<std::size_t> out(size);
  for (auto& k : out) k = pick(rng);
  return out;
}

void write_train_log(std::ostream& out, const TrainLog& log) {
  out << "epoch\tobjective\theldout_acc\theldout_maf1\tnnz\tseconds\tindex_refreshes\n";
  const auto old_precision = out.precision(10);
  for (const auto& r : log.records) {
    out << r.epoch << '\t' << r.objective << '\t' << r.heldout_accuracy << '\t'
        << r.heldout_maf1 << '\t' << r.nnz << '\t' << r.seconds << '\t' << r.index_refreshes
        << '\n';
  }
  out.precision(old_precision);
}

namespace {

/// Running sum of the iterates, kept as q * stored + b so that each update
/// costs as much as the update itself.
class IterateAverager {
 public:
  IterateAverager(std::size_t classes, std::size_t dim) : b_(classes, dim) {}

  void on_stage(ClassId c, double stored_coeff, const SparseVector& x) {
    if (q_ != 0.0) b_.stage_add(c, -q_ * stored_coeff, x);
  }

  void on_replace(ClassId c, const SparseVector& old_stored, const SparseVector& new_stored) {
    if (q_ != 0.0) b_.stage_add(c, -q_, add_scaled(new_stored, -1.0, old_stored));
  }

  /// Called after `w` folded a multiplier of `folded_scale` into its rows.
  void on_fold(const WeightMatrix& w, double folded_scale) {
    b_.commit();
    const double q = q_ / folded_scale;
    for (std::size_t c = 0; c < w.num_classes(); ++c) {
      b_.stage_add(static_cast<ClassId>(c), q, w.stored_row(static_cast<ClassId>(c)));
    }
    b_.commit();
    q_ = 0.0;
  }

  void accumulate(const WeightMatrix& w) {
    b_.commit();
    q_ += w.scale();
    ++count_;
  }

  WeightMatrix average(const WeightMatrix& w) const {
    WeightMatrix out(w.num_classes(), w.dim());
    if (count_ == 0) return out;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t c = 0; c < w.num_classes(); ++c) {
      const auto id = static_cast<ClassId>(c);
      SparseVector sum = add_scaled(b_.stored_row(id), q_, w.stored_row(id));
      sum.scale(inv);
      sum.purge_zeros();
      out.set_row(id, sum);
    }
    return out;
  }

 private:
  double q_ = 0.0;
  std::size_t count_ = 0;
  WeightMatrix b_;
};

}  // namespace

struct Trainer::State {
  const Dataset* data;
  TrainConfig cfg;
  TrainOptions opts;
  WeightMatrix w;
  std::unique_ptr<MipsIndex> index;
  std::optional<IterateAverager> averager;
  std::mt19937_64 rng;
  std::size_t batch_size = 0;
  std::size_t step = 0;
  std::size_t fold_seen = 0;
  std::size_t refreshes = 0;
  TrainLog log;

  State(const Dataset& d, TrainConfig c, WeightMatrix initial, TrainOptions o)
      : data(&d), cfg(std::move(c)), opts(std::move(o)), w(std::move(initial)), rng(cfg.seed) {
    if (data->empty()) throw Error("train: empty dataset");
    validate(cfg, data->num_classes);
    if (w.num_classes() != data->num_classes || w.dim() != data->dim) {
      throw DimensionError("train: model shape does not match the dataset");
    }
    for (const auto& ex : data->examples) {
      if (ex.features.dim() != data->dim) throw DimensionError("train: example dimension mismatch");
      if (ex.label >= data->num_classes) throw Error("train: label out of range");
    }
    if (opts.heldout && opts.heldout->dim != data->dim) {
      throw DimensionError("train: heldout dimension does not match training data");
    }
    if (cfg.early_stopping && !opts.heldout) {
      throw ConfigError("early stopping needs a heldout set");
    }
    batch_size = cfg.batch_size ? cfg.batch_size : default_batch_size(data->num_classes);
    index = build_index(w, cfg.mips, /*stored=*/true);
    fold_seen = w.fold_count();
    if (cfg.average) averager.emplace(w.num_classes(), w.dim());
  }

  void scale_matrix(bool project, double factor) {
    const double before = w.scale();
    double applied = factor;
    if (project) {
      applied = w.project_to_ball(cfg.lambda);
    } else {
      w.global_scale(factor);
    }
    if (w.fold_count() != fold_seen && averager) averager->on_fold(w, before * applied);
  }
};

Trainer::Trainer(const Dataset& data, TrainConfig cfg, TrainOptions opts)
    : Trainer(data, std::move(cfg), WeightMatrix(data.num_classes, data.dim), std::move(opts)) {}

Trainer::Trainer(const Dataset& data, TrainConfig cfg, WeightMatrix initial, TrainOptions opts)
    : state_(std::make_unique<State>(data, std::move(cfg), std::move(initial), std::move(opts))) {}

Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;

std::size_t Trainer::steps_done() const noexcept { return state_->step; }
const WeightMatrix& Trainer::weights() const noexcept { return state_->w; }
const MipsIndex& Trainer::index() const noexcept { return *state_->index; }
const TrainLog& Trainer::log() const noexcept { return state_->log; }

WeightMatrix Trainer::averaged() const {
  if (!state_->averager) throw Error("trainer: iterate averaging was not enabled");
  return state_->averager->average(state_->w);
}

StepInfo Trainer::step() {
  State& s = *state_;
  const TrainConfig& cfg = s.cfg;
  const Dataset& data = *s.data;
  WeightMatrix& w = s.w;
  const std::size_t t = ++s.step;
  const double eta = learning_rate(t, cfg.eta0, cfg.eta_step);
  const auto batch = sample_batch(data.size(), s.batch_size, s.rng);
  const bool l2 = cfg.algorithm == Regularizer::l2;

  if (l2) s.scale_matrix(false, 1.0 - cfg.lambda * eta);

  // Phase 1: rivals against the frozen matrix and index.
  std::vector<ClassId> rivals(batch.size());
  std::vector<char> active(batch.size(), 0);
  auto query_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const Example& ex = data.examples[batch[j]];
      const MarginResult m = inexact_margin(*s.index, w, ex.features, ex.label);
      rivals[j] = m.rival;
      active[j] = 1.0 + m.score_rival - m.score_true > 0.0;
    }
  };
  if (s.fold_seen != w.fold_count()) {
    s.index = build_index(w, cfg.mips, true);
    s.fold_seen = w.fold_count();
    s.refreshes += w.num_classes();
  }
  const std::size_t workers = std::min(cfg.threads, batch.size());
  if (workers <= 1) {
    query_range(0, batch.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (std::size_t k = 0; k < workers; ++k) {
      const std::size_t b = k * chunk;
      const std::size_t e = std::min(batch.size(), b + chunk);
      if (b < e) pool.emplace_back(query_range, b, e);
    }
  }

  // Phase 2: sequential updates in sampled order.
  std::size_t fired = 0;
  const double step_size = cfg.mean_batch_update ? eta / static_cast<double>(batch.size()) : eta;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (!active[j]) continue;
    ++fired;
    const Example& ex = data.examples[batch[j]];
    if (s.averager) {
      s.averager->on_stage(rivals[j], -step_size / w.scale(), ex.features);
      s.averager->on_stage(ex.label, step_size / w.scale(), ex.features);
    }
    w.stage_add(rivals[j], -step_size, ex.features);
    w.stage_add(ex.label, step_size, ex.features);
  }
  std::vector<ClassId> touched = w.commit();

  if (l2) {
    s.scale_matrix(true, 0.0);
  } else if (cfg.truncation) {
    std::vector<ClassId> seen;
    seen.reserve(2 * batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
      seen.push_back(data.examples[batch[j]].label);
      seen.push_back(rivals[j]);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (ClassId c : seen) {
      const SparseVector current = w.materialize_row(c);
      SparseVector cut = truncate(current, seen.size(), cfg.lambda, eta, w.num_classes());
      if (cfg.truncation_max_change) {
        const double change = add_scaled(current, -1.0, cut).norm();
        if (change > *cfg.truncation_max_change * current.norm()) continue;
      }
      if (s.averager) {
        SparseVector new_stored = cut;
        new_stored.scale(1.0 / w.scale());
        s.averager->on_replace(c, w.stored_row(c), new_stored);
      }
      w.set_row(c, cut);
    }
    touched.insert(touched.end(), seen.begin(), seen.end());
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  }

  if (s.fold_seen != w.fold_count()) {
    s.index = build_index(w, cfg.mips, true);
    s.fold_seen = w.fold_count();
    s.refreshes += w.num_classes();
  } else {
    for (ClassId c : touched) s.index->update_row(c, w.stored_row(c));
    s.refreshes += touched.size();
  }
  if (s.averager) s.averager->accumulate(w);

  StepInfo info{t, eta, fired, &w};
  if (s.opts.on_step) s.opts.on_step(info);
  return info;
}

void Trainer::run() {
  State& s = *state_;
  const TrainConfig& cfg = s.cfg;
  double best_maf1 = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  while (s.step < cfg.epochs) {
    const std::size_t refreshes_before = s.refreshes;
    const auto start = std::chrono::steady_clock::now();
    step();
    const auto stop = std::chrono::steady_clock::now();
    TrainLogRecord rec;
    rec.epoch = s.step;
    rec.seconds = std::chrono::duration<double>(stop - start).count();
    rec.nnz = s.w.nnz();
    rec.index_refreshes = s.refreshes - refreshes_before;
    rec.objective = std::numeric_limits<double>::quiet_NaN();
    if (cfg.log_objective) {
      rec.objective = cfg.algorithm == Regularizer::l2 ? objective_l2(s.w, *s.data, cfg.lambda)
                                                       : objective_l1(s.w, *s.data, cfg.lambda);
    }
    rec.heldout_accuracy = std::numeric_limits<double>::quiet_NaN();
    rec.heldout_maf1 = std::numeric_limits<double>::quiet_NaN();
    if (s.opts.heldout && !s.opts.heldout->empty()) {
      const EvalReport r = evaluate(s.w, *s.opts.heldout, cfg.threads);
      rec.heldout_accuracy = r.accuracy;
      rec.heldout_maf1 = r.macro_f1;
    }
    s.log.records.push_back(rec);
    if (cfg.early_stopping) {
      if (rec.heldout_maf1 > best_maf1 + cfg.min_delta) {
        best_maf1 = rec.heldout_maf1;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
    }
  }
}

TrainResult Trainer::finish() && {
  TrainResult out;
  if (state_->averager) out.averaged = averaged();
  out.weights = std::move(state_->w);
  out.log = std::move(state_->log);
  return out;
}

TrainResult train_l2(const Dataset& data, const TrainConfig& cfg, const TrainOptions& opts) {
  TrainConfig c = cfg;
  c.algorithm = Regularizer::l2;
  Trainer trainer(data, c, opts);
  trainer.run();
  return std::move(trainer).finish();
}

TrainResult train_l1(const Dataset& data, const TrainConfig& cfg, const TrainOptions& opts) {
  TrainConfig c = cfg;
  c.algorithm = Regularizer::l1;
  Trainer trainer(data, c, opts);
  trainer.run();
  return std::move(trainer).finish();
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, const TrainOptions& opts) {
  return cfg.algorithm == Regularizer::l2 ? train_l2(data, cfg, opts) : train_l1(data, cfg, opts);
}

}  // namespace memoir
