#include <gtest/gtest.h>

#include "hmlelm/model_io.hpp"

using namespace hml;

namespace {

struct Data {
  Matrix X;
  std::vector<int> labels;
};

Data clusters(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  Data d;
  d.X.resize(2 * per_class, 5);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < per_class; ++i) {
      for (Eigen::Index k = 0; k < 5; ++k) d.X(c * per_class + i, k) = (k == c) + 0.2 * rng.normal();
      d.labels.push_back(c);
    }
  return d;
}

PipelineConfig config(HeadKind head) {
  PipelineConfig c;
  c.layer_sizes = {6, 5};
  c.Cs = {10.0, kInfinity, 100.0};
  c.head = head;
  c.head_size = 4;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(ConfigJson, RoundTrip) {
  PipelineConfig c = config(HeadKind::kElm);
  c.head_seed = 12;
  c.width_scale = 2.5;
  const auto back = config_from_json(Json::parse(config_to_json(c).dump()));
  EXPECT_EQ(back.layer_sizes, c.layer_sizes);
  EXPECT_EQ(back.Cs[0], 10.0);
  EXPECT_TRUE(std::isinf(back.Cs[1]));
  EXPECT_EQ(back.head, HeadKind::kElm);
  EXPECT_EQ(back.head_seed, c.head_seed);
  EXPECT_EQ(back.width_scale, 2.5);
}

TEST(ConfigJson, Rejections) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"Cs": [1], "bogus": 1})")), Error);
  EXPECT_THROW(config_from_json(Json::parse(R"({"layer_sizes": [3]})")), Error);
  EXPECT_THROW(config_from_json(Json::parse(R"({"layer_sizes": [3], "Cs": [1, 1], "head": "svm"})")), Error);
  int input = 0;
  config_from_json(Json::parse(R"({"input_size": 784, "layer_sizes": [3], "Cs": [1, 1]})"), &input);
  EXPECT_EQ(input, 784);
}

TEST(ModelFile, RoundTripPreservesPredictionsForEveryHead) {
  const Data d = clusters(20, 1);
  for (auto head : {HeadKind::kSit2, HeadKind::kElm, HeadKind::kRidge}) {
    HmlModel m = hml_train(d.X, d.labels, 2, config(head));
    m.class_names = {"left", "right"};
    const auto bytes = encode_model(m);
    const HmlModel back = decode_model(bytes);
    EXPECT_EQ(back.class_names, m.class_names);
    EXPECT_EQ(back.record.train_accuracy, m.record.train_accuracy);
    EXPECT_EQ(hml_predict(back, d.X), hml_predict(m, d.X)) << to_string(head);
    EXPECT_EQ(encode_model(back), bytes);
  }
}

TEST(ModelFile, DeterministicBytes) {
  const Data d = clusters(15, 2);
  EXPECT_EQ(encode_model(hml_train(d.X, d.labels, 2, config(HeadKind::kSit2))),
            encode_model(hml_train(d.X, d.labels, 2, config(HeadKind::kSit2))));
}

TEST(ModelFile, CorruptionDetected) {
  const Data d = clusters(10, 2);
  const auto bytes = encode_model(hml_train(d.X, d.labels, 2, config(HeadKind::kRidge)));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_model(bad), Error);
  auto cut = bytes;
  cut.resize(cut.size() - 8);
  EXPECT_THROW(decode_model(cut), Error);
}
