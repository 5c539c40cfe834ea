#pragma once

// Single-hidden-layer ELM: random input weights, closed-form output weights.

#include <string>

#include "hmlelm/numerics.hpp"

namespace hml {

enum class Activation { kSigmoid, kLinear };

inline std::string to_string(Activation a) { return a == Activation::kSigmoid ? "sigmoid" : "linear"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "linear") return Activation::kLinear;
  throw Error(ErrorKind::kInvalidArgument, "unknown activation: " + s);
}

inline Matrix activate(Matrix z, Activation a) {
  if (a == Activation::kSigmoid) z = sigmoid(z);
  return z;
}

struct ElmModel {
  Matrix input_weights;   // N x M
  RowVector biases;       // M
  Matrix output_weights;  // M x outputs
  Activation activation = Activation::kSigmoid;

  Eigen::Index n_inputs() const { return input_weights.rows(); }
  Eigen::Index n_hidden() const { return input_weights.cols(); }
  Eigen::Index n_outputs() const { return output_weights.cols(); }
};

// Rejects targets that cannot train a classifier: fewer than two columns, or
// more than one sample and every sample in the same class.
inline void check_class_targets(const Matrix& T) {
  require(T.cols() >= 2, ErrorKind::kInvalidArgument, "need >= 2 classes");
  if (T.rows() < 2) return;
  const auto labels = argmax_rows(T);
  for (int l : labels)
    if (l != labels.front()) return;
  throw Error(ErrorKind::kInvalidArgument, "need >= 2 classes");
}

inline Matrix elm_hidden(const ElmModel& model, const Matrix& X) {
  require(X.cols() == model.n_inputs(), ErrorKind::kDimension, "elm: input width mismatch");
  Matrix Z = X * model.input_weights;
  Z.rowwise() += model.biases;
  return activate(std::move(Z), model.activation);
}

// Input weights uniform in [-1, 1], biases uniform in [0, 1].
inline ElmModel elm_train(const Matrix& X, const Matrix& T, int n_hidden, double C, Rng& rng,
                          Activation activation = Activation::kSigmoid) {
  require(n_hidden > 0, ErrorKind::kInvalidArgument, "elm_train: hidden node count must be positive");
  require(X.rows() >= 1, ErrorKind::kDimension, "elm_train: no samples");
  require(X.rows() == T.rows(), ErrorKind::kDimension, "elm_train: X and T row counts differ");
  check_class_targets(T);

  ElmModel model;
  model.activation = activation;
  model.input_weights.resize(X.cols(), n_hidden);
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    for (int j = 0; j < n_hidden; ++j) model.input_weights(i, j) = rng.uniform(-1.0, 1.0);
  model.biases.resize(n_hidden);
  for (int j = 0; j < n_hidden; ++j) model.biases(j) = rng.uniform();

  model.output_weights = ridge_solve(elm_hidden(model, X), T, C);
  return model;
}

inline Matrix elm_predict(const ElmModel& model, const Matrix& X) {
  return elm_hidden(model, X) * model.output_weights;
}

}  // namespace hml
