#include <gtest/gtest.h>

#include "hmlelm/hml.hpp"

using namespace hml;

namespace {

struct Data {
  Matrix X;
  std::vector<int> labels;
};

// Three Gaussian clusters in 6 dimensions, with features on mixed scales.
Data clusters(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  Data d;
  d.X.resize(3 * per_class, 6);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per_class; ++i) {
      const Eigen::Index r = c * per_class + i;
      for (Eigen::Index k = 0; k < 6; ++k) d.X(r, k) = (k + 1) * ((k % 3 == c) ? 1.0 : 0.0) + 0.25 * rng.normal();
      d.labels.push_back(c);
    }
  return d;
}

PipelineConfig config(HeadKind head, std::vector<int> sizes) {
  PipelineConfig c;
  c.layer_sizes = std::move(sizes);
  c.Cs.assign(c.layer_sizes.size() + 1, 1e3);
  c.head = head;
  c.head_size = head == HeadKind::kSit2 ? 6 : 40;
  c.seed = 7;
  return c;
}

}  // namespace

TEST(PipelineConfig, Validation) {
  PipelineConfig c = config(HeadKind::kSit2, {4});
  EXPECT_NO_THROW(c.validate());
  c.Cs.pop_back();
  EXPECT_THROW(c.validate(), Error);
  c = config(HeadKind::kSit2, {4});
  c.Cs[0] = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = config(HeadKind::kSit2, {4});
  c.head_size = 1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Hml, AllHeadsLearnClusters) {
  const Data train = clusters(40, 1), test = clusters(20, 2);
  for (auto head : {HeadKind::kSit2, HeadKind::kRidge, HeadKind::kElm}) {
    const HmlModel m = hml_train(train.X, train.labels, 3, config(head, {8, 5}));
    EXPECT_GE(m.record.train_accuracy, 0.95) << to_string(head);
    EXPECT_GE(accuracy_of(hml_predict(m, test.X), test.labels), 0.9) << to_string(head);
  }
}

TEST(Hml, EqualLayerRidgeMatchesPlainRidge) {
  const Data train = clusters(40, 3), test = clusters(30, 4);
  const HmlModel stacked = hml_train(train.X, train.labels, 3, config(HeadKind::kRidge, {6}));
  const HmlModel plain = hml_train(train.X, train.labels, 3, config(HeadKind::kRidge, {}));
  EXPECT_FALSE(plain.stack.has_value());
  const double a = accuracy_of(hml_predict(stacked, test.X), test.labels);
  const double b = accuracy_of(hml_predict(plain, test.X), test.labels);
  EXPECT_LE(std::fabs(a - b), 0.005 + 1e-12);
}

TEST(Hml, DeterministicMetricsAndWeights) {
  const Data train = clusters(20, 5);
  const HmlModel a = hml_train(train.X, train.labels, 3, config(HeadKind::kSit2, {8}));
  const HmlModel b = hml_train(train.X, train.labels, 3, config(HeadKind::kSit2, {8}));
  EXPECT_EQ(a.record.train_accuracy, b.record.train_accuracy);
  EXPECT_EQ(std::get<Sit2Model>(a.head).consequents, std::get<Sit2Model>(b.head).consequents);
}

TEST(Hml, EmptyBatchAndBatchSplitting) {
  const Data train = clusters(20, 5), test = clusters(10, 6);
  const HmlModel m = hml_train(train.X, train.labels, 3, config(HeadKind::kSit2, {8}));
  const Matrix none = hml_predict(m, Matrix(0, 6));
  EXPECT_EQ(none.rows(), 0);
  EXPECT_EQ(none.cols(), 3);
  const Matrix all = hml_predict(m, test.X);
  const Matrix top = hml_predict(m, test.X.topRows(11));
  EXPECT_LT((all.topRows(11) - top).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hml, CompositionMatchesHeadOnFeatures) {
  const Data train = clusters(20, 5), test = clusters(10, 6);
  const HmlModel m = hml_train(train.X, train.labels, 3, config(HeadKind::kSit2, {8}));
  EXPECT_EQ(hml_predict(m, test.X), head_predict(m.head, hml_features(m, test.X)));
}

TEST(Hml, HeadSeedLeavesStackUntouched) {
  const Data train = clusters(20, 5);
  PipelineConfig c = config(HeadKind::kSit2, {8, 4});
  const HmlModel a = hml_train(train.X, train.labels, 3, c);
  c.head_seed = 99;
  const HmlModel b = hml_train(train.X, train.labels, 3, c);
  for (std::size_t s = 0; s < a.stack->layers.size(); ++s) {
    EXPECT_EQ(a.stack->layers[s].weights, b.stack->layers[s].weights);
    EXPECT_EQ(a.stack->layers[s].beta, b.stack->layers[s].beta);
  }
  EXPECT_NE(std::get<Sit2Model>(a.head).rules.centers, std::get<Sit2Model>(b.head).rules.centers);
}

TEST(Hml, Errors) {
  const Data train = clusters(10, 5);
  std::vector<int> short_labels(train.labels.begin(), train.labels.end() - 1);
  EXPECT_THROW(hml_train(train.X, short_labels, 3, config(HeadKind::kSit2, {4})), Error);
  const HmlModel m = hml_train(train.X, train.labels, 3, config(HeadKind::kRidge, {4}));
  EXPECT_THROW(hml_predict(m, Matrix::Zero(2, 5)), Error);
}
