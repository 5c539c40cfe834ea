#include <gtest/gtest.h>

#include "hmlelm/feature_stack.hpp"

using namespace hml;

namespace {

Matrix uniform_data(Eigen::Index p, Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(p, n);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  return X;
}

}  // namespace

TEST(Autoencoder, EqualModeReconstructsWhenHiddenHasFullRowRank) {
  for (auto p : {4, 6}) {
    const Matrix X = uniform_data(p, 6, 31 + p);
    Rng rng(1);
    const Autoencoder ae = ae_train(X, 6, 1e3, rng);
    EXPECT_EQ(ae.mode, AeMode::kEqual);
    EXPECT_LT(ae.diagnostics.reconstruction, 1e-6);
    const Matrix H = ae_hidden(ae, X);
    EXPECT_LT((H * ae.beta - X).norm() / X.norm(), 1e-6);
  }
}

TEST(Autoencoder, EqualModeOnTallBatchRecordsReconstruction) {
  const Matrix X = uniform_data(10, 4, 3);
  Rng rng(1);
  const Autoencoder ae = ae_train(X, 4, 1e3, rng);
  const Matrix H = ae_hidden(ae, X);
  EXPECT_DOUBLE_EQ(ae.diagnostics.reconstruction, (H * ae.beta - X).norm() / X.norm());
  EXPECT_GT(ae.diagnostics.reconstruction, 0.0);
}

TEST(Autoencoder, CompressedShapes) {
  const Matrix X = uniform_data(10, 4, 3);
  Rng rng(2);
  const Autoencoder ae = ae_train(X, 2, 10.0, rng);
  EXPECT_EQ(ae.mode, AeMode::kCompressed);
  EXPECT_EQ(ae.beta.rows(), 2);
  EXPECT_EQ(ae.beta.cols(), 4);
  const Matrix E = ae_encode(ae, X);
  EXPECT_EQ(E.rows(), 10);
  EXPECT_EQ(E.cols(), 2);
  EXPECT_GT(E.minCoeff(), 0.0);
  EXPECT_LT(E.maxCoeff(), 1.0);
}

TEST(Autoencoder, OrthonormalWeightsAndUnitBias) {
  const Matrix X = uniform_data(20, 5, 4);
  for (int m : {2, 5, 9}) {
    Rng rng(m);
    const Autoencoder ae = ae_train(X, m, 10.0, rng);
    const Matrix A = m <= 5 ? ae.weights : Matrix(ae.weights.transpose());
    EXPECT_LT(orthonormality_error(A), 1e-10);
    EXPECT_LT(ae.diagnostics.weight_orthonormality, 1e-10);
    EXPECT_NEAR(ae.bias.norm(), 1.0, 1e-12);
  }
}

TEST(Autoencoder, SparseModeIsRidge) {
  const Matrix X = uniform_data(15, 3, 5);
  Rng rng(5);
  const Autoencoder ae = ae_train(X, 8, 50.0, rng);
  EXPECT_EQ(ae.mode, AeMode::kSparse);
  const Matrix H = ae_hidden(ae, X);
  const Matrix grad = 2.0 * H.transpose() * (H * ae.beta - X) + (2.0 / 50.0) * ae.beta;
  EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-8 * (1.0 + X.norm()));
}

TEST(Autoencoder, Deterministic) {
  const Matrix X = uniform_data(10, 4, 3);
  Rng a(9), b(9);
  EXPECT_EQ(ae_train(X, 3, 10.0, a).beta, ae_train(X, 3, 10.0, b).beta);
}

TEST(Autoencoder, EqualEncodingIsLinear) {
  const Matrix X = uniform_data(12, 4, 6);
  Rng rng(3);
  const Autoencoder ae = ae_train(X, 4, 10.0, rng);
  EXPECT_EQ(ae_encode(ae, X), Matrix(X * ae.beta.transpose()));
}

TEST(FeatureStack, EmptyLayerListThrows) {
  const Matrix X = uniform_data(5, 3, 1);
  EXPECT_THROW(stack_train(X, {}, {}, Rng(1)), Error);
  EXPECT_THROW(stack_train(X, {2}, {1.0, 2.0}, Rng(1)), Error);
}

TEST(FeatureStack, EqualLayerRoundTrip) {
  const Matrix X = uniform_data(30, 5, 8);
  const FeatureStack s = stack_train(X, {5}, {1e3}, Rng(2));
  const Matrix Y = stack_transform(s, X);
  const Matrix back = s.layers[0].beta.fullPivLu().solve(Y.transpose()).transpose();
  EXPECT_LT((back - X).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FeatureStack, ChainsWidths) {
  const Matrix X = uniform_data(25, 6, 2);
  const FeatureStack s = stack_train(X, {8, 3}, {10.0, 10.0}, Rng(4));
  EXPECT_EQ(s.layer_sizes, (std::vector<int>{6, 8, 3}));
  EXPECT_EQ(stack_transform(s, X).cols(), 3);
  EXPECT_EQ(stack_transform(s, Matrix(0, 6)).rows(), 0);
  EXPECT_EQ(stack_transform(s, Matrix(0, 6)).cols(), 3);
  EXPECT_THROW(stack_transform(s, Matrix::Zero(1, 5)), Error);
}

TEST(FeatureStack, RowwiseStatelessness) {
  const Matrix X = uniform_data(20, 6, 2);
  const FeatureStack s = stack_train(X, {4, 3}, {10.0, 10.0}, Rng(4));
  const Matrix all = stack_transform(s, X);
  const Matrix top = stack_transform(s, X.topRows(7)), bottom = stack_transform(s, X.bottomRows(13));
  EXPECT_LT((all.topRows(7) - top).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((all.bottomRows(13) - bottom).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(stack_transform(s, X), all);
}
