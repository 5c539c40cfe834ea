#pragma once

// Two-phase pipelines: an unsupervised ELM-AE feature stack followed by a
// supervised head. With the SIT2 head this is HML-ELM; with the ridge head
// it is ML-ELM; the ELM head gives a stacked ELM variant.

#include <chrono>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hmlelm/elm.hpp"
#include "hmlelm/feature_stack.hpp"
#include "hmlelm/numerics.hpp"
#include "hmlelm/sit2.hpp"

namespace hml {

enum class HeadKind { kSit2, kRidge, kElm };

inline std::string to_string(HeadKind h) {
  switch (h) {
    case HeadKind::kSit2: return "sit2";
    case HeadKind::kRidge: return "ridge";
    case HeadKind::kElm: return "elm";
  }
  return "?";
}

inline HeadKind head_from_string(const std::string& s) {
  if (s == "sit2") return HeadKind::kSit2;
  if (s == "ridge") return HeadKind::kRidge;
  if (s == "elm") return HeadKind::kElm;
  throw Error(ErrorKind::kInvalidArgument, "unknown head: " + s);
}

struct PipelineConfig {
  std::vector<int> layer_sizes;  // autoencoder widths M_1..M_L
  std::vector<double> Cs;        // one per autoencoder, then one for the head
  HeadKind head = HeadKind::kSit2;
  int head_size = 40;            // rules for sit2, hidden nodes for elm; unused by ridge
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> head_seed;  // defaults to a stream derived from seed
  CenterInit centers = CenterInit::kTrainingSamples;
  double width_scale = 0.0;

  double head_C() const { return Cs.back(); }

  void validate() const {
    require(Cs.size() == layer_sizes.size() + 1, ErrorKind::kInvalidArgument,
            "config: need one C per autoencoder layer plus one for the head");
    for (double c : Cs) require(c > 0.0, ErrorKind::kInvalidArgument, "config: every C must be positive");
    for (int m : layer_sizes) require(m > 0, ErrorKind::kInvalidArgument, "config: layer sizes must be positive");
    if (head != HeadKind::kRidge)
      require(head_size >= (head == HeadKind::kSit2 ? 2 : 1), ErrorKind::kInvalidArgument, "config: head size too small");
  }
};

struct RidgeHead {
  Matrix weights;  // (features + 1) x outputs, first row is the bias
};

using Head = std::variant<Sit2Model, ElmModel, RidgeHead>;

struct TrainingRecord {
  double standardize_seconds = 0.0;
  double stack_seconds = 0.0;
  double head_seconds = 0.0;
  double train_accuracy = 0.0;
};

struct HmlModel {
  PipelineConfig config;
  int n_classes = 0;
  std::vector<std::string> class_names;
  MinMaxScaler input_scaler;
  std::optional<FeatureStack> stack;  // absent when layer_sizes is empty
  MinMaxScaler head_scaler;
  Head head;
  TrainingRecord record;

  Eigen::Index input_width() const { return input_scaler.lo.size(); }
};

inline Rng head_rng(const PipelineConfig& c) {
  return c.head_seed ? Rng(*c.head_seed).split(2) : Rng(c.seed).split(2);
}

inline Matrix head_predict(const Head& head, const Matrix& F) {
  return std::visit(
      [&](const auto& h) -> Matrix {
        using H = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<H, Sit2Model>) return sit2_predict(h, F);
        else if constexpr (std::is_same_v<H, ElmModel>) return elm_predict(h, F);
        else {
          require(F.cols() + 1 == h.weights.rows(), ErrorKind::kDimension, "ridge head: feature width mismatch");
          return append_ones_column(F) * h.weights;
        }
      },
      head);
}

inline Head head_train(const PipelineConfig& config, const Matrix& F, const Matrix& T) {
  Rng rng = head_rng(config);
  switch (config.head) {
    case HeadKind::kSit2: {
      Sit2Options opts;
      opts.C = config.head_C();
      opts.centers = config.centers;
      opts.width_scale = config.width_scale;
      return sit2_train(F, T, config.head_size, rng, opts);
    }
    case HeadKind::kElm:
      return elm_train(F, T, config.head_size, config.head_C(), rng);
    case HeadKind::kRidge:
      check_class_targets(T);
      return RidgeHead{ridge_solve(append_ones_column(F), T, config.head_C())};
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown head");
}

// Standardized, stack-encoded and head-scaled features.
inline Matrix hml_features(const HmlModel& model, const Matrix& X) {
  require(X.cols() == model.input_width(), ErrorKind::kDimension, "hml: input width mismatch");
  Matrix F = model.input_scaler.transform(X);
  if (model.stack) F = stack_transform(*model.stack, F);
  return model.head_scaler.transform(F);
}

inline double accuracy_of(const Matrix& scores, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const auto pred = argmax_rows(scores);
  std::size_t hit = 0;
  for (std::size_t p = 0; p < labels.size(); ++p) hit += pred[p] == labels[p];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

inline HmlModel hml_train(const Matrix& X, std::span<const int> labels, int n_classes, const PipelineConfig& config) {
  using clock = std::chrono::steady_clock;
  config.validate();
  require(X.rows() >= 1, ErrorKind::kDimension, "hml_train: no samples");
  require(static_cast<std::size_t>(X.rows()) == labels.size(), ErrorKind::kDimension, "hml_train: label count mismatch");
  const Matrix T = one_hot(labels, n_classes);

  HmlModel model;
  model.config = config;
  model.n_classes = n_classes;
  for (int c = 0; c < n_classes; ++c) model.class_names.push_back(std::to_string(c));

  auto t0 = clock::now();
  model.input_scaler = MinMaxScaler::fit(X);
  Matrix F = model.input_scaler.transform(X);
  auto t1 = clock::now();
  if (!config.layer_sizes.empty()) {
    std::vector<double> stack_Cs(config.Cs.begin(), config.Cs.end() - 1);
    model.stack = stack_train(F, config.layer_sizes, stack_Cs, Rng(config.seed).split(1));
    F = stack_transform(*model.stack, F);
  }
  model.head_scaler = MinMaxScaler::fit(F);
  F = model.head_scaler.transform(F);
  auto t2 = clock::now();
  model.head = head_train(config, F, T);
  auto t3 = clock::now();

  model.record.standardize_seconds = std::chrono::duration<double>(t1 - t0).count();
  model.record.stack_seconds = std::chrono::duration<double>(t2 - t1).count();
  model.record.head_seconds = std::chrono::duration<double>(t3 - t2).count();
  model.record.train_accuracy = accuracy_of(head_predict(model.head, F), labels);
  return model;
}

inline Matrix hml_predict(const HmlModel& model, const Matrix& X) {
  require(X.cols() == model.input_width(), ErrorKind::kDimension, "hml_predict: input width mismatch");
  if (X.rows() == 0) return Matrix(0, model.n_classes);
  return head_predict(model.head, hml_features(model, X));
}

}  // namespace hml
