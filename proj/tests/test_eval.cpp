#include <gtest/gtest.h>

#include "hmlelm/eval.hpp"

using namespace hml;

namespace {

Matrix votes(const std::vector<std::pair<int, int>>& runs, int n_classes) {
  int total = 0;
  for (auto [cls, n] : runs) total += n;
  Matrix s = Matrix::Zero(total, n_classes);
  int row = 0;
  for (auto [cls, n] : runs)
    for (int i = 0; i < n; ++i) s(row++, cls) = 1.0;
  return s;
}

}  // namespace

TEST(Accuracy, Diagonal) {
  ConfusionMatrix cm(3);
  cm.counts.diagonal() << 4, 5, 6;
  EXPECT_DOUBLE_EQ(accuracy(cm).overall, 1.0);
}

TEST(Accuracy, ZeroDiagonal) {
  ConfusionMatrix cm(2);
  cm.counts << 0, 5, 5, 0;
  EXPECT_DOUBLE_EQ(accuracy(cm).overall, 0.0);
}

TEST(Accuracy, HandCountedTwoClass) {
  ConfusionMatrix cm(2);
  cm.counts << 3, 1, 1, 3;
  const auto r = accuracy(cm);
  EXPECT_DOUBLE_EQ(r.overall, 0.75);
  EXPECT_DOUBLE_EQ(r.per_class[0], 0.75);
  EXPECT_DOUBLE_EQ(r.per_class[1], 0.75);
}

TEST(Accuracy, OverallIsOneMinusOffDiagonalShare) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    ConfusionMatrix cm(4);
    for (Eigen::Index i = 0; i < cm.counts.size(); ++i) cm.counts.data()[i] = static_cast<long long>(rng.index(20));
    cm.counts(0, 0) += 1;
    const long long off = cm.total() - cm.counts.trace();
    EXPECT_EQ(accuracy(cm).overall, 1.0 - static_cast<double>(off) / static_cast<double>(cm.total()));
  }
}

TEST(Accuracy, EmptyThrows) {
  EXPECT_THROW(accuracy(ConfusionMatrix(2)), Error);
  EXPECT_THROW(accuracy(ConfusionMatrix(0)), Error);
}

TEST(Confusion, FromLabels) {
  const std::vector<int> truth = {0, 0, 1, 2, 2}, pred = {0, 1, 1, 2, 0};
  const auto cm = confusion(truth, pred, 3);
  EXPECT_EQ(cm.total(), 5);
  EXPECT_EQ(cm.counts(0, 1), 1);
  EXPECT_EQ(cm.counts(2, 0), 1);
  EXPECT_THROW(confusion(truth, std::vector<int>{0}, 3), Error);
}

TEST(ActiveClassify, AllSameClass) {
  const auto d = active_classify(votes({{2, 120}}, 4), 0.82, 120);
  EXPECT_DOUBLE_EQ(d.fractions[2], 1.0);
  ASSERT_TRUE(d.decision);
  EXPECT_EQ(*d.decision, 2);
  EXPECT_EQ(d.frames_used, 120u);
}

TEST(ActiveClassify, FiveSixthsDecides) {
  const auto d = active_classify(votes({{1, 100}, {0, 20}}, 4), 0.82, 120);
  EXPECT_NEAR(d.fractions[1], 0.8333, 1e-4);
  ASSERT_TRUE(d.decision);
  EXPECT_EQ(*d.decision, 1);
}

TEST(ActiveClassify, ThreeQuartersUndecided) {
  const auto d = active_classify(votes({{1, 90}, {3, 30}}, 4), 0.82, 120);
  EXPECT_DOUBLE_EQ(d.fractions[1], 0.75);
  EXPECT_FALSE(d.decision);
}

TEST(ActiveClassify, FractionsSumToOneAndWindowUsesLatestFrames) {
  const auto d = active_classify(votes({{0, 50}, {3, 10}}, 4), 0.82, 10);
  EXPECT_DOUBLE_EQ(d.fractions[3], 1.0);
  double sum = 0;
  for (double f : d.fractions) sum += f;
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(ActiveClassify, InvariantToPerFramePositiveRescale) {
  Rng rng(5);
  Matrix s(40, 3);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.uniform(-1, 1);
  Matrix scaled = s;
  for (Eigen::Index r = 0; r < s.rows(); ++r) scaled.row(r) *= rng.uniform(0.01, 100.0);
  const auto a = active_classify(s, 0.4, 40), b = active_classify(scaled, 0.4, 40);
  EXPECT_EQ(a.fractions, b.fractions);
  EXPECT_EQ(a.decision, b.decision);
}

TEST(ActiveClassify, Errors) {
  EXPECT_THROW(active_classify(Matrix(0, 3), 0.82, 10), Error);
  EXPECT_THROW(active_classify(votes({{0, 3}}, 2), 0.82, 0), Error);
  EXPECT_THROW(active_classify(votes({{0, 3}}, 2), 0.0, 3), Error);
  EXPECT_THROW(active_classify(votes({{0, 3}}, 2), 1.5, 3), Error);
}

TEST(RunStream, StopsAtFirstDecision) {
  const auto out = run_stream(votes({{1, 5}, {2, 40}}, 3), 0.82, 10);
  ASSERT_TRUE(out.decision);
  EXPECT_EQ(*out.decision, 2);
  EXPECT_EQ(out.frames_seen, 5u + 9u);
  EXPECT_FALSE(run_stream(votes({{0, 20}, {1, 20}}, 2), 0.82, 40).decision);
}
