#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/types.hpp"

namespace fedshield {

inline ConfusionMatrix confusion_matrix(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorKind::DimensionMismatch, "truth and prediction lengths differ");
  }
  if (truth.empty()) throw Error(ErrorKind::EmptyDataset, "no predictions to tabulate");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[label_index(truth[i])][label_index(predicted[i])];
  return cm;
}

namespace detail {
inline double ratio(std::uint64_t num, std::uint64_t den, const char* name, std::vector<std::string>& undefined) {
  if (den == 0) {
    undefined.emplace_back(name);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

struct ClassificationMetrics {
  std::array<ClassMetrics, 2> per_class;
  double accuracy = 0.0;
};

/// Precision/recall/F1 per class. The benign row treats Benign as the
/// positive event (TN plays the role of TP). 0/0 ratios become 0.0 and are
/// listed in ClassMetrics::undefined.
inline ClassificationMetrics per_class_metrics(const ConfusionMatrix& cm) {
  ClassificationMetrics out;
  for (Label label : kLabels) {
    const bool mal = label == Label::Malicious;
    const std::uint64_t tp = mal ? cm.tp() : cm.tn();
    const std::uint64_t fp = mal ? cm.fp() : cm.fn();
    const std::uint64_t fn = mal ? cm.fn() : cm.fp();
    auto& m = out.per_class[label_index(label)];
    m.precision = detail::ratio(tp, tp + fp, "precision", m.undefined);
    m.recall = detail::ratio(tp, tp + fn, "recall", m.undefined);
    // Harmonic mean written on counts: 2TP / (2TP + FP + FN).
    m.f1 = detail::ratio(2 * tp, 2 * tp + fp + fn, "f1", m.undefined);
    m.support = tp + fn;
  }
  out.accuracy = cm.total() == 0 ? 0.0
                                 : static_cast<double>(cm.tn() + cm.tp()) / static_cast<double>(cm.total());
  return out;
}

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Threshold sweep over distinct scores in descending order. Tied scores move
/// the curve in a single (possibly diagonal) step. AUC by the trapezoidal rule.
inline RocCurve roc_curve(std::span<const Label> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw Error(ErrorKind::DimensionMismatch, "truth and score lengths differ");
  std::uint64_t pos = 0, neg = 0;
  for (Label l : truth) (l == Label::Malicious ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw Error(ErrorKind::SingleClassData, "ROC needs both classes in the truth labels");
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorKind::NonFiniteValue, "scores must be finite");
  }

  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  const auto P = static_cast<double>(pos);
  const auto N = static_cast<double>(neg);
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (truth[order[i]] == Label::Malicious ? tp : fp) += 1;
      ++i;
    }
    roc.points.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  if (roc.points.back() != RocPoint{1.0, 1.0}) roc.points.push_back({1.0, 1.0});

  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return roc;
}

/// Scores every test row with the model and assembles the full report.
inline EvaluationReport evaluate(const ModelParams& params, const EmbeddingMatrix& test, double threshold = 0.5) {
  if (test.empty()) throw Error(ErrorKind::EmptyDataset, "empty test set");
  std::vector<double> scores(test.size());
  std::vector<Label> predicted(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    scores[i] = predict_proba(params, test.row(i));
    predicted[i] = scores[i] >= threshold ? Label::Malicious : Label::Benign;
  }
  EvaluationReport rep;
  rep.confusion = confusion_matrix(test.labels(), predicted);
  const auto cls = per_class_metrics(rep.confusion);
  rep.per_class = cls.per_class;
  rep.accuracy = cls.accuracy;
  auto roc = roc_curve(test.labels(), scores);
  rep.roc_points = std::move(roc.points);
  rep.auc = roc.auc;
  return rep;
}

}  // namespace fedshield
