#pragma once

// ELM autoencoders and their greedy stacking. Each layer draws orthonormal
// random hidden parameters, solves for output weights beta that map the
// hidden layer back onto its own input, and encodes with f(X beta^T).

#include <string>
#include <vector>

#include "hmlelm/elm.hpp"
#include "hmlelm/numerics.hpp"

namespace hml {

enum class AeMode { kCompressed, kEqual, kSparse };

inline std::string to_string(AeMode m) {
  switch (m) {
    case AeMode::kCompressed: return "compressed";
    case AeMode::kEqual: return "equal";
    case AeMode::kSparse: return "sparse";
  }
  return "?";
}

struct AeDiagnostics {
  double weight_orthonormality = 0.0;  // max |A^T A - I| (or A A^T when A is wide)
  double reconstruction = 0.0;         // |H beta - X|_F / |X|_F on the training batch
  double beta_orthonormality = 0.0;    // max |beta^T beta - I|, recorded only
};

struct Autoencoder {
  Matrix weights;  // N_s x M_s hidden weights A
  RowVector bias;  // M_s, unit norm
  Matrix beta;     // M_s x N_s
  AeMode mode = AeMode::kCompressed;
  Activation encode_activation = Activation::kSigmoid;
  double C = 1.0;
  AeDiagnostics diagnostics;

  Eigen::Index input_width() const { return beta.cols(); }
  Eigen::Index output_width() const { return beta.rows(); }
};

inline Matrix ae_hidden(const Autoencoder& ae, const Matrix& X) {
  Matrix Z = X * ae.weights;
  Z.rowwise() += ae.bias;
  return sigmoid(Z);
}

inline Autoencoder ae_train(const Matrix& X, int n_hidden, double C, Rng& rng) {
  require(X.rows() >= 1 && X.cols() >= 1, ErrorKind::kDimension, "ae_train: empty input");
  require(n_hidden > 0, ErrorKind::kInvalidArgument, "ae_train: hidden width must be positive");
  require(C > 0.0, ErrorKind::kInvalidArgument, "ae_train: C must be positive");
  const Eigen::Index n = X.cols();
  const Eigen::Index m = n_hidden;

  Autoencoder ae;
  ae.C = C;
  ae.mode = m < n ? AeMode::kCompressed : (m == n ? AeMode::kEqual : AeMode::kSparse);
  ae.encode_activation = m == n ? Activation::kLinear : Activation::kSigmoid;

  // Wide A (more hidden nodes than inputs) gets orthonormal rows instead.
  if (m <= n) {
    ae.weights = orthonormal_random(n, m, rng);
    ae.diagnostics.weight_orthonormality = orthonormality_error(ae.weights);
  } else {
    ae.weights = orthonormal_random(m, n, rng).transpose();
    ae.diagnostics.weight_orthonormality = orthonormality_error(ae.weights.transpose());
  }
  ae.bias = orthonormal_random(m, 1, rng).transpose();

  const Matrix H = ae_hidden(ae, X);
  ae.beta = ae.mode == AeMode::kEqual ? pinv_apply(H, X) : ridge_solve(H, X, C);

  const double xnorm = X.norm();
  ae.diagnostics.reconstruction = (H * ae.beta - X).norm() / (xnorm > 0.0 ? xnorm : 1.0);
  ae.diagnostics.beta_orthonormality = orthonormality_error(ae.beta);
  return ae;
}

inline Matrix ae_encode(const Autoencoder& ae, const Matrix& X) {
  require(X.cols() == ae.input_width(), ErrorKind::kDimension, "ae_encode: input width mismatch");
  return activate(X * ae.beta.transpose(), ae.encode_activation);
}

struct FeatureStack {
  std::vector<Autoencoder> layers;
  std::vector<int> layer_sizes;  // N, M_1, ..., M_L

  Eigen::Index input_width() const { return layer_sizes.front(); }
  Eigen::Index output_width() const { return layer_sizes.back(); }
};

// Layer s is trained on the encoding produced by layer s-1, with its own
// child stream of rng.
inline FeatureStack stack_train(const Matrix& X, const std::vector<int>& sizes, const std::vector<double>& Cs,
                                const Rng& rng) {
  require(!sizes.empty(), ErrorKind::kInvalidArgument, "stack_train: empty layer list");
  require(sizes.size() == Cs.size(), ErrorKind::kInvalidArgument, "stack_train: layer sizes and Cs differ in length");
  FeatureStack stack;
  stack.layer_sizes.push_back(static_cast<int>(X.cols()));
  Matrix current = X;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    Rng layer_rng = rng.split(s);
    stack.layers.push_back(ae_train(current, sizes[s], Cs[s], layer_rng));
    stack.layer_sizes.push_back(sizes[s]);
    if (s + 1 < sizes.size()) current = ae_encode(stack.layers.back(), current);
  }
  return stack;
}

inline Matrix stack_transform(const FeatureStack& stack, const Matrix& X) {
  require(!stack.layers.empty(), ErrorKind::kInvalidArgument, "stack_transform: empty stack");
  require(X.cols() == stack.input_width(), ErrorKind::kDimension, "stack_transform: input width mismatch");
  Matrix current = X;
  for (const auto& layer : stack.layers) current = ae_encode(layer, current);
  return current;
}

}  // namespace hml
