#include "memoir/eval.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "memoir/error.hpp"

namespace memoir {
namespace {

void check(const PredictionSet& p) {
  if (p.truth.empty()) throw Error("metrics: empty prediction set");
  if (p.truth.size() != p.predicted.size()) throw Error("metrics: length mismatch");
  for (std::size_t k = 0; k < p.truth.size(); ++k) {
    if (p.truth[k] >= p.num_classes || p.predicted[k] >= p.num_classes) {
      throw Error("metrics: label out of range");
    }
  }
}

}  // namespace

ClassId predict(const WeightMatrix& w, const SparseVector& x) {
  if (w.num_classes() == 0) throw Error("predict: model has no classes");
  ClassId best = 0;
  double best_score = w.stored_dot(0, x);
  for (std::size_t c = 1; c < w.num_classes(); ++c) {
    const double s = w.stored_dot(static_cast<ClassId>(c), x);
    if (s > best_score) {
      best_score = s;
      best = static_cast<ClassId>(c);
    }
  }
  return best;
}

PredictionSet predict_all(const WeightMatrix& w, const Dataset& data, std::size_t threads) {
  PredictionSet p;
  p.num_classes = std::max(w.num_classes(), data.num_classes);
  p.truth.reserve(data.size());
  for (const auto& ex : data.examples) p.truth.push_back(ex.label);
  p.predicted.assign(data.size(), 0);
  const std::size_t n = data.size();
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      p.predicted[k] = predict(w, data.examples[k].features);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return p;
}

double accuracy(const PredictionSet& p) {
  check(p);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < p.truth.size(); ++k) correct += p.truth[k] == p.predicted[k];
  return static_cast<double>(correct) / static_cast<double>(p.truth.size());
}

double macro_f1(const PredictionSet& p, F1Convention convention) {
  check(p);
  std::vector<std::size_t> tp(p.num_classes, 0);
  std::vector<std::size_t> in_truth(p.num_classes, 0);
  std::vector<std::size_t> in_pred(p.num_classes, 0);
  for (std::size_t k = 0; k < p.truth.size(); ++k) {
    ++in_truth[p.truth[k]];
    ++in_pred[p.predicted[k]];
    if (p.truth[k] == p.predicted[k]) ++tp[p.truth[k]];
  }
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  double f1_sum = 0.0;
  std::size_t classes = 0;
  for (std::size_t c = 0; c < p.num_classes; ++c) {
    if (in_truth[c] == 0 && in_pred[c] == 0) continue;
    ++classes;
    const double prec = in_pred[c] ? static_cast<double>(tp[c]) / in_pred[c] : 0.0;
    const double rec = in_truth[c] ? static_cast<double>(tp[c]) / in_truth[c] : 0.0;
    precision_sum += prec;
    recall_sum += rec;
    if (prec + rec > 0.0) f1_sum += 2.0 * prec * rec / (prec + rec);
  }
  if (convention == F1Convention::mean_of_per_class) return f1_sum / classes;
  const double map = precision_sum / classes;
  const double mar = recall_sum / classes;
  if (map + mar == 0.0) return 0.0;
  return 2.0 * map * mar / (map + mar);
}

EvalReport evaluate(const WeightMatrix& w, const Dataset& data, std::size_t threads,
                    F1Convention convention) {
  if (data.empty()) throw Error("evaluate: empty dataset");
  const auto start = std::chrono::steady_clock::now();
  const PredictionSet p = predict_all(w, data, threads);
  const auto stop = std::chrono::steady_clock::now();
  EvalReport r;
  r.n = data.size();
  r.accuracy = accuracy(p);
  r.macro_f1 = macro_f1(p, convention);
  r.predict_seconds = std::chrono::duration<double>(stop - start).count();
  return r;
}

}  // namespace memoir
