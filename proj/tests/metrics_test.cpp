#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "fedshield/data_synth.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/metrics.hpp"
#include "fedshield/rng.hpp"

namespace fedshield {
namespace {

constexpr Label B = Label::Benign;
constexpr Label M = Label::Malicious;

// Mann-Whitney form: P(score_pos > score_neg) + 0.5 P(equal).
double pairwise_auc(const std::vector<Label>& y, const std::vector<double>& s) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != M) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != B) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(Confusion, CountsByCell) {
  const std::vector<Label> truth{B, B, B, B, M, M, M, M, M, M};
  const std::vector<Label> pred{B, B, B, M, B, B, M, M, M, M};
  const auto cm = confusion_matrix(truth, pred);
  EXPECT_EQ(cm.tn(), 3u);
  EXPECT_EQ(cm.fp(), 1u);
  EXPECT_EQ(cm.fn(), 2u);
  EXPECT_EQ(cm.tp(), 4u);
  EXPECT_EQ(cm.total(), 10u);
  EXPECT_THROW(confusion_matrix(truth, std::vector<Label>{B}), Error);
  EXPECT_THROW(confusion_matrix({}, {}), Error);
}

TEST(PerClass, WorkedExample) {
  ConfusionMatrix cm;
  cm.counts = {{{3, 1}, {2, 4}}};
  const auto m = per_class_metrics(cm);
  const auto& mal = m.per_class[label_index(M)];
  const auto& ben = m.per_class[label_index(B)];
  EXPECT_DOUBLE_EQ(mal.precision, 0.8);
  EXPECT_DOUBLE_EQ(mal.recall, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(mal.f1, 8.0 / 11.0);
  EXPECT_EQ(mal.support, 6u);
  EXPECT_DOUBLE_EQ(ben.precision, 0.6);
  EXPECT_DOUBLE_EQ(ben.recall, 0.75);
  EXPECT_DOUBLE_EQ(ben.f1, 6.0 / 9.0);
  EXPECT_EQ(ben.support, 4u);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
  EXPECT_TRUE(mal.undefined.empty());
}

TEST(PerClass, DegenerateRatiosAreZeroAndFlagged) {
  ConfusionMatrix never_flags;
  never_flags.counts = {{{5, 0}, {3, 0}}};
  const auto m = per_class_metrics(never_flags);
  const auto& mal = m.per_class[label_index(M)];
  EXPECT_EQ(mal.precision, 0.0);
  EXPECT_EQ(mal.recall, 0.0);
  EXPECT_EQ(mal.f1, 0.0);
  EXPECT_EQ(mal.undefined, (std::vector<std::string>{"precision"}));

  ConfusionMatrix all_benign;
  all_benign.counts = {{{4, 0}, {0, 0}}};
  const auto none = per_class_metrics(all_benign).per_class[label_index(M)];
  EXPECT_EQ(none.undefined, (std::vector<std::string>{"precision", "recall", "f1"}));
  EXPECT_EQ(none.support, 0u);
}

// Random confusion matrices against a direct recomputation.
TEST(PerClass, RandomMatricesMatchDefinitions) {
  Xoshiro256 rng(5);
  for (int t = 0; t < 5; ++t) {
    ConfusionMatrix cm;
    cm.counts = {{{1 + rng.below(50), 1 + rng.below(50)}, {1 + rng.below(50), 1 + rng.below(50)}}};
    const auto m = per_class_metrics(cm);
    const double tp = cm.tp(), fp = cm.fp(), fn = cm.fn(), tn = cm.tn();
    const auto& mal = m.per_class[1];
    const double p = tp / (tp + fp), r = tp / (tp + fn);
    EXPECT_NEAR(mal.precision, p, 1e-15);
    EXPECT_NEAR(mal.recall, r, 1e-15);
    EXPECT_NEAR(mal.f1, 2 * p * r / (p + r), 1e-14);
    const double bp = tn / (tn + fn), br = tn / (tn + fp);
    EXPECT_NEAR(m.per_class[0].f1, 2 * bp * br / (bp + br), 1e-14);
    EXPECT_NEAR(m.accuracy, (tn + tp) / (tn + tp + fn + fp), 1e-15);
  }
}

TEST(Roc, Examples) {
  const std::vector<Label> y{B, M};
  EXPECT_EQ(roc_curve(y, std::vector<double>{0.1, 0.9}).auc, 1.0);
  EXPECT_EQ(roc_curve(y, std::vector<double>{0.9, 0.1}).auc, 0.0);
  const auto tied = roc_curve(y, std::vector<double>{0.5, 0.5});
  EXPECT_EQ(tied.auc, 0.5);
  EXPECT_EQ(tied.points, (std::vector<RocPoint>{{0, 0}, {1, 1}}));

  const std::vector<Label> y4{B, B, M, M};
  const auto r = roc_curve(y4, std::vector<double>{0.1, 0.4, 0.35, 0.8});
  EXPECT_EQ(r.points, (std::vector<RocPoint>{{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}}));
  EXPECT_DOUBLE_EQ(r.auc, 0.75);
}

TEST(Roc, Errors) {
  EXPECT_THROW(roc_curve(std::vector<Label>{B, B}, std::vector<double>{0.1, 0.2}), Error);
  EXPECT_THROW(roc_curve(std::vector<Label>{B, M}, std::vector<double>{0.1}), Error);
  EXPECT_THROW(roc_curve(std::vector<Label>{B, M}, std::vector<double>{0.1, std::nan("")}), Error);
}

TEST(Roc, AucMatchesPairwiseOracleWithTies) {
  Xoshiro256 rng(50);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<Label> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.below(2) ? M : B;
      s[i] = static_cast<double>(rng.below(8)) / 8.0;  // heavy ties
    }
    y[0] = M;
    y[1] = B;
    const auto roc = roc_curve(y, s);
    EXPECT_NEAR(roc.auc, pairwise_auc(y, s), 1e-9) << "trial " << t;
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
      EXPECT_GE(roc.points[i].fpr, roc.points[i - 1].fpr);
      EXPECT_GE(roc.points[i].tpr, roc.points[i - 1].tpr);
    }
    EXPECT_EQ(roc.points.front(), (RocPoint{0, 0}));
    EXPECT_EQ(roc.points.back(), (RocPoint{1, 1}));
  }
}

TEST(Evaluate, AgreesWithClassifyAndRocThresholds) {
  const auto X = synth_embeddings(40, 40, 6, 1.0, 2.0, 3);
  const auto model = train(X, {});
  for (double thr : {0.2, 0.5, 0.8}) {
    const auto rep = evaluate(model, X, thr);
    std::vector<Label> pred;
    for (std::size_t i = 0; i < X.size(); ++i) pred.push_back(classify(model, X.row(i), thr));
    EXPECT_EQ(rep.confusion, confusion_matrix(X.labels(), pred));
    const RocPoint here{static_cast<double>(rep.confusion.fp()) / 40.0, static_cast<double>(rep.confusion.tp()) / 40.0};
    EXPECT_NE(std::find(rep.roc_points.begin(), rep.roc_points.end(), here), rep.roc_points.end())
        << "threshold " << thr;
    EXPECT_DOUBLE_EQ(rep.accuracy, static_cast<double>(rep.confusion.tn() + rep.confusion.tp()) / X.size());
  }
}

}  // namespace
}  // namespace fedshield
