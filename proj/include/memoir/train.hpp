#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <optional>
#include <random>
#include <vector>

#include "memoir/dataset.hpp"
#include "memoir/mips.hpp"
#include "memoir/weight_matrix.hpp"

namespace memoir {

enum class Regularizer { l2, l1 };

std::string to_string(Regularizer r);
Regularizer parse_regularizer(const std::string& name);

/// Training hyper-parameters. Defaults follow the reference settings:
/// eta0 = 0.1, eta_step = 0.02, batch = round(100 sqrt(C)), K = 64 bits.
struct TrainConfig {
  Regularizer algorithm = Regularizer::l2;
  double lambda = 1.0;
  /// rho of the reported empirical risk. The update test inside both
  /// trainers is the unit-margin test 1 + x^T(w_r - w_y) > 0 regardless.
  double rho = 1.0;
  double eta0 = 0.1;
  double eta_step = 0.02;
  /// Number of iterations T; each iteration processes one batch.
  std::size_t epochs = 25;
  /// 0 selects round(100 sqrt(C)).
  std::size_t batch_size = 0;
  /// Scale each example's update by 1/|b| so that one iteration is a step
  /// on the batch-mean hinge loss. When false every active example adds
  /// eta * x unscaled.
  bool mean_batch_update = true;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  MipsParams mips;

  /// l1 only: soft-threshold the rows touched by each batch.
  bool truncation = true;
  /// l1 only: when set, a row is truncated only if the l2 norm of the
  /// removed part is at most this fraction of the row's l2 norm.
  std::optional<double> truncation_max_change;

  /// Also maintain the running average of the iterates.
  bool average = false;
  /// Record the training objective every iteration (a full exact pass).
  bool log_objective = true;

  /// Stop when heldout MaF1 fails to improve by more than min_delta for
  /// `patience` consecutive iterations. Needs a heldout set.
  bool early_stopping = false;
  std::size_t patience = 5;
  double min_delta = 1e-4;
};

/// Resolved batch size for C classes: round(100 sqrt(C)), at least 1.
std::size_t default_batch_size(std::size_t num_classes);

/// Throws ConfigError for invalid settings, including lambda * eta_1 >= 1
/// for the l2 trainer.
void validate(const TrainConfig& cfg, std::size_t num_classes);

struct TrainLogRecord {
  std::size_t epoch = 0;
  double objective = 0.0;
  double heldout_accuracy = 0.0;
  double heldout_maf1 = 0.0;
  std::size_t nnz = 0;
  double seconds = 0.0;
  std::size_t index_refreshes = 0;
};

struct TrainLog {
  std::vector<TrainLogRecord> records;
};

/// Writes the log as tab-separated values with a header row.
void write_train_log(std::ostream& out, const TrainLog& log);

/// State visible to a per-iteration observer, after the iteration finished.
struct StepInfo {
  std::size_t step = 0;
  double eta = 0.0;
  std::size_t active = 0;  ///< examples whose hinge test fired
  const WeightMatrix* weights = nullptr;
};

struct TrainResult {
  WeightMatrix weights;
  std::optional<WeightMatrix> averaged;
  TrainLog log;
};

struct TrainOptions {
  const Dataset* heldout = nullptr;
  std::function<void(const StepInfo&)> on_step;
};

/// eta0 / (1 + eta_step * t).
double learning_rate(std::size_t t, double eta0, double eta_step);

/// (lambda/2) ||W||_F^2 + mean exact hinge loss (rho = 1).
double objective_l2(const WeightMatrix& w, const Dataset& data, double lambda);
/// (lambda/2) ||W||_1 + mean exact hinge loss (rho = 1).
double objective_l1(const WeightMatrix& w, const Dataset& data, double lambda);

/// Entrywise soft-threshold at tau = (C / xi) * lambda * eta. Zeros are
/// dropped from storage.
SparseVector truncate(const SparseVector& w, std::size_t xi, double lambda, double eta,
                      std::size_t num_classes);

/// `size` indices drawn uniformly with replacement.
std::vector<std::size_t> sample_batch(std::size_t dataset_size, std::size_t size,
                                      std::mt19937_64& rng);

/// One training run. Holds a reference to `data` (and to opts.heldout),
/// which must outlive it.
class Trainer {
 public:
  Trainer(const Dataset& data, TrainConfig cfg, TrainOptions opts = {});
  /// Starts from `initial` instead of the zero matrix.
  Trainer(const Dataset& data, TrainConfig cfg, WeightMatrix initial, TrainOptions opts = {});
  ~Trainer();
  Trainer(Trainer&&) noexcept;
  Trainer& operator=(Trainer&&) noexcept;

  /// Runs one iteration: sample, query rivals against the frozen snapshot,
  /// apply updates, regularise, refresh the index.
  StepInfo step();
  /// Runs the remaining iterations with logging and optional early stop.
  void run();

  std::size_t steps_done() const noexcept;
  const WeightMatrix& weights() const noexcept;
  const MipsIndex& index() const noexcept;
  const TrainLog& log() const noexcept;
  /// Average of the iterates so far; requires cfg.average.
  WeightMatrix averaged() const;

  TrainResult finish() &&;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Pegasos-style l2-regularised multi-class SVM with inexact margins.
TrainResult train_l2(const Dataset& data, const TrainConfig& cfg, const TrainOptions& opts = {});
/// l1-regularised multi-class SVM with per-batch truncation.
TrainResult train_l1(const Dataset& data, const TrainConfig& cfg, const TrainOptions& opts = {});
/// Dispatches on cfg.algorithm.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const TrainOptions& opts = {});

}  // namespace memoir
