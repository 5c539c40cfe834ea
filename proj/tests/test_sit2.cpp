#include <gtest/gtest.h>

#include "hmlelm/sit2.hpp"

using namespace hml;

namespace {

struct Blobs {
  Matrix X;
  std::vector<int> labels;
};

Blobs two_blobs(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  Blobs b;
  b.X.resize(2 * per_class, 2);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < per_class; ++i) {
      const Eigen::Index r = c * per_class + i;
      b.X(r, 0) = (c == 0 ? 0.25 : 0.75) + 0.07 * rng.normal();
      b.X(r, 1) = (c == 0 ? 0.3 : 0.7) + 0.07 * rng.normal();
      b.labels.push_back(c);
    }
  return b;
}

double accuracy(const Matrix& scores, const std::vector<int>& labels) {
  const auto pred = argmax_rows(scores);
  int hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

// Type-1 TSK output: firing-weighted mean of linear consequents.
Matrix tsk_mean(const Sit2Model& m, const Matrix& X) {
  Matrix out(X.rows(), m.n_outputs());
  const Eigen::Index b = X.cols() + 1;
  for (Eigen::Index p = 0; p < X.rows(); ++p) {
    Vector logf(m.n_rules());
    for (Eigen::Index j = 0; j < m.n_rules(); ++j)
      logf(j) = -(X.row(p) - m.rules.centers.row(j)).squaredNorm() / (2.0 * m.rules.sigma_upper(j) * m.rules.sigma_upper(j));
    const Vector f = (logf.array() - logf.maxCoeff()).exp();
    RowVector xa(b);
    xa << 1.0, X.row(p);
    for (Eigen::Index i = 0; i < m.n_outputs(); ++i) {
      double num = 0.0;
      for (Eigen::Index j = 0; j < m.n_rules(); ++j) num += f(j) * xa.dot(m.consequents.col(i).segment(j * b, b));
      out(p, i) = num / f.sum();
    }
  }
  return out;
}

}  // namespace

TEST(KroneckerRidge, DualMatchesExplicitDesign) {
  Rng rng(3);
  Matrix X(10, 3), phi(10, 5), T(10, 2);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = rng.uniform();
  for (Eigen::Index i = 0; i < T.size(); ++i) T.data()[i] = rng.uniform();
  KroneckerRidge k(X);
  const Matrix H = k.design(phi);
  ASSERT_EQ(H.cols(), 20);
  EXPECT_NEAR(H(4, 1 * 4 + 2), phi(4, 1) * X(4, 1), 1e-15);
  EXPECT_NEAR(H(4, 1 * 4 + 0), phi(4, 1), 1e-15);
  const Matrix ref = ridge_solve(H, T, 50.0);
  EXPECT_LT((k.solve(phi, T, 50.0) - ref).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + ref.cwiseAbs().maxCoeff()));
  const Matrix narrow = phi.leftCols(2);
  EXPECT_LT((k.solve(narrow, T, 50.0) - ridge_solve(k.design(narrow), T, 50.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sit2, SeparableBlobsWithTwoRules) {
  const Blobs b = two_blobs(40, 5);
  Rng rng(17);
  const Sit2Model m = sit2_train(b.X, one_hot(b.labels, 2), 2, rng);
  EXPECT_EQ(m.stage, Sit2Stage::kRefined);
  EXPECT_EQ(m.consequents.rows(), 2 * 3);
  EXPECT_GE(accuracy(sit2_predict(m, b.X), b.labels), 0.99);
}

TEST(Sit2, UniformCentersAlsoSeparate) {
  const Blobs b = two_blobs(40, 5);
  Rng rng(17);
  Sit2Options opts;
  opts.centers = CenterInit::kUniformRange;
  const Sit2Model m = sit2_train(b.X, one_hot(b.labels, 2), 4, rng, opts);
  EXPECT_GE(accuracy(sit2_predict(m, b.X), b.labels), 0.99);
}

TEST(Sit2, SingleClassRejected) {
  const Blobs b = two_blobs(5, 1);
  const std::vector<int> same(10, 0);
  Rng rng(1);
  try {
    sit2_train(b.X, one_hot(same, 2), 2, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "need >= 2 classes");
  }
  EXPECT_THROW(sit2_train(b.X, one_hot(b.labels, 2), 1, rng), Error);
}

TEST(Sit2, EqualDeviationsRefinementKeepsConsequents) {
  const Blobs b = two_blobs(30, 8);
  Sit2Options opts;
  opts.equal_deviations = true;
  opts.refine = false;
  Rng r1(4), r2(4);
  const Sit2Model stage2 = sit2_train(b.X, one_hot(b.labels, 2), 5, r1, opts);
  opts.refine = true;
  const Sit2Model stage3 = sit2_train(b.X, one_hot(b.labels, 2), 5, r2, opts);
  EXPECT_LT((stage3.consequents - stage2.consequents).norm() / stage2.consequents.norm(), 1e-6);
  EXPECT_LT((sit2_predict(stage3, b.X) - tsk_mean(stage3, b.X)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Sit2, ReducersInterchangeableInPrediction) {
  const Blobs b = two_blobs(30, 9);
  Rng rng(6);
  const Sit2Model m = sit2_train(b.X, one_hot(b.labels, 2), 6, rng);
  const Blobs test = two_blobs(20, 10);
  const Matrix sc = sit2_predict(m, test.X, Reducer::kSc);
  EXPECT_LT((sit2_predict(m, test.X, Reducer::kEkm) - sc).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((sit2_predict(m, test.X, Reducer::kBruteForce) - sc).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Sit2, SingleRuleScoreIsThatRulesConsequent) {
  const Blobs b = two_blobs(10, 2);
  Rng rng(6);
  Sit2Model m = sit2_train(b.X, one_hot(b.labels, 2), 2, rng);
  Sit2Model one;
  one.rules.centers = m.rules.centers.topRows(1);
  one.rules.sigma_lower = m.rules.sigma_lower.head(1);
  one.rules.sigma_upper = m.rules.sigma_upper.head(1);
  one.consequents = m.consequents.topRows(3);
  const Matrix expect = append_ones_column(b.X) * one.consequents;
  EXPECT_LT((sit2_predict(one, b.X) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sit2, Deterministic) {
  const Blobs b = two_blobs(20, 3);
  Rng a(2), c(2);
  EXPECT_EQ(sit2_train(b.X, one_hot(b.labels, 2), 3, a).consequents, sit2_train(b.X, one_hot(b.labels, 2), 3, c).consequents);
}

TEST(Sit2, RecordsBothFitErrors) {
  const Blobs b = two_blobs(40, 12);
  Rng rng(3);
  Sit2Options opts;
  opts.C = 1e8;
  const Sit2Model m = sit2_train(b.X, one_hot(b.labels, 2), 3, rng, opts);
  EXPECT_GT(m.record.stage2_sse, 0.0);
  EXPECT_GT(m.record.stage3_sse, 0.0);
}

TEST(Sit2, PredictShapes) {
  const Blobs b = two_blobs(10, 3);
  Rng rng(2);
  const Sit2Model m = sit2_train(b.X, one_hot(b.labels, 2), 3, rng);
  EXPECT_EQ(sit2_predict(m, Matrix(0, 2)).rows(), 0);
  EXPECT_THROW(sit2_predict(m, Matrix::Zero(1, 3)), Error);
}
