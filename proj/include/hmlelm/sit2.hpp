#pragma once

// Simplified interval type-2 fuzzy ELM (SIT2-FELM) with first-order TSK
// consequents
//
//   w_ij(x) = q_ij0 + sum_k q_ijk x_k
//
// and SC type reduction at the output. Training has three stages: random
// antecedents, consequents fitted against Nie-Tan weights, then consequents
// refitted per output against the weights implied by the SC switch
// assignments of the stage-two fit.

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hmlelm/elm.hpp"
#include "hmlelm/it2.hpp"
#include "hmlelm/numerics.hpp"

namespace hml {

enum class CenterInit {
  kTrainingSamples,  // centers are distinct randomly chosen training rows
  kUniformRange,     // centers uniform over each feature's [min, max]
};

inline std::string to_string(CenterInit c) {
  return c == CenterInit::kTrainingSamples ? "samples" : "uniform";
}

inline CenterInit center_init_from_string(const std::string& s) {
  if (s == "samples") return CenterInit::kTrainingSamples;
  if (s == "uniform") return CenterInit::kUniformRange;
  throw Error(ErrorKind::kInvalidArgument, "unknown center init: " + s);
}

enum class Sit2Stage { kInitialized, kRefined };

struct Sit2Options {
  double C = 1e3;
  CenterInit centers = CenterInit::kTrainingSamples;
  // Multiplier on the deviation range; <= 0 selects max(1, sqrt(N) / 4).
  double width_scale = 0.0;
  bool refine = true;
  // Forces sigma_lower == sigma_upper (a type-1 rule base).
  bool equal_deviations = false;
};

struct Sit2Record {
  double stage2_sse = 0.0;  // training sum of squares of the Nie-Tan fit
  double stage3_sse = 0.0;  // same, after refinement (SC-defuzzified outputs)
};

struct Sit2Model {
  It2RuleBase rules;
  Matrix consequents;  // (N+1)*M_f x outputs; rows grouped per rule as [q_j0, q_j1..q_jN]
  Sit2Stage stage = Sit2Stage::kInitialized;
  Sit2Record record;

  Eigen::Index n_rules() const { return rules.n_rules(); }
  Eigen::Index n_inputs() const { return rules.n_inputs(); }
  Eigen::Index n_outputs() const { return consequents.cols(); }
};

inline double default_width_scale(Eigen::Index n_inputs) {
  return std::max(1.0, std::sqrt(static_cast<double>(n_inputs)) / 4.0);
}

// Ridge regression on the row-wise Kronecker design H_p = phi_p (x) [1, x_p]
// without materializing H when it is wider than tall: the dual Gram matrix
// factors as (Phi Phi^T) o (Xa Xa^T), and Xa Xa^T is shared by every solve.
class KroneckerRidge {
 public:
  explicit KroneckerRidge(const Matrix& X) : xa_(append_ones_column(X)) {}

  Eigen::Index samples() const { return xa_.rows(); }
  Eigen::Index block() const { return xa_.cols(); }

  Matrix design(const Matrix& phi) const {
    Matrix H(xa_.rows(), phi.cols() * block());
    for (Eigen::Index j = 0; j < phi.cols(); ++j)
      H.middleCols(j * block(), block()) = xa_.array().colwise() * phi.col(j).array();
    return H;
  }

  Matrix solve(const Matrix& phi, const Matrix& T, double C) {
    require(phi.rows() == samples() && T.rows() == samples(), ErrorKind::kDimension, "KroneckerRidge: row mismatch");
    const Eigen::Index width = phi.cols() * block();
    if (width <= samples()) return ridge_solve_primal(design(phi), T, C);

    if (gram_.rows() != samples()) gram_ = detail::gram_rows(xa_);
    Matrix K = detail::gram_rows(phi);
    K.array() *= gram_.array();
    const bool regularized = std::isfinite(C);
    if (regularized) K.diagonal().array() += 1.0 / C;
    const Matrix alpha = detail::spd_solve(std::move(K), T, regularized);

    Matrix Q(width, T.cols());
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      const Matrix scaled = alpha.array().colwise() * phi.col(j).array();
      Q.middleRows(j * block(), block()) = xa_.transpose() * scaled;
    }
    require(Q.allFinite(), ErrorKind::kNumerical, "KroneckerRidge: non-finite solution");
    return Q;
  }

 private:
  Matrix xa_;
  Matrix gram_;
};

namespace detail {

struct FiringTable {
  Matrix lower;  // P x M_f
  Matrix upper;

  FiringInterval row(Eigen::Index p) const {
    FiringInterval f;
    f.lower = lower.row(p).transpose();
    f.upper = upper.row(p).transpose();
    return f;
  }
};

inline FiringTable fire_all(const It2RuleBase& rules, const Matrix& X) {
  FiringTable t{Matrix(X.rows(), rules.n_rules()), Matrix(X.rows(), rules.n_rules())};
  std::vector<double> x(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index p = 0; p < X.rows(); ++p) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) x[static_cast<std::size_t>(k)] = X(p, k);
    const FiringInterval f = firing_strengths(rules, x);
    t.lower.row(p) = f.lower.transpose();
    t.upper.row(p) = f.upper.transpose();
  }
  return t;
}

// Consequent values per rule: result[j] is P x outputs.
inline std::vector<Matrix> consequent_values(const Matrix& Q, const Matrix& X, Eigen::Index n_rules) {
  const Matrix xa = append_ones_column(X);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(n_rules));
  for (Eigen::Index j = 0; j < n_rules; ++j) out.push_back(xa * Q.middleRows(j * xa.cols(), xa.cols()));
  return out;
}

inline std::vector<double> gather(const std::vector<Matrix>& values, Eigen::Index p, Eigen::Index i) {
  std::vector<double> w(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) w[j] = values[j](p, i);
  return w;
}

inline void normalize_into(const FiringInterval& f, std::span<const std::uint8_t> z, double weight, Matrix& phi,
                           Eigen::Index p) {
  double den = 0.0;
  for (Eigen::Index j = 0; j < f.size(); ++j) den += z[static_cast<std::size_t>(j)] ? f.upper(j) : f.lower(j);
  for (Eigen::Index j = 0; j < f.size(); ++j)
    phi(p, j) += weight * (z[static_cast<std::size_t>(j)] ? f.upper(j) : f.lower(j)) / den;
}

}  // namespace detail

inline It2RuleBase sit2_antecedents(const Matrix& X, int n_rules, Rng& rng, const Sit2Options& opts) {
  const Eigen::Index P = X.rows(), N = X.cols();
  It2RuleBase rules;
  rules.centers.resize(n_rules, N);
  const RowVector lo = X.colwise().minCoeff();
  const RowVector hi = X.colwise().maxCoeff();

  if (opts.centers == CenterInit::kTrainingSamples) {
    // Distinct rows by partial Fisher-Yates; with fewer rows than rules, rows repeat.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(P));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (int j = 0; j < n_rules; ++j) {
      Eigen::Index row;
      if (P >= n_rules) {
        const auto jj = static_cast<std::size_t>(j);
        std::swap(idx[jj], idx[jj + static_cast<std::size_t>(rng.index(idx.size() - jj))]);
        row = idx[jj];
      } else {
        row = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(P)));
      }
      rules.centers.row(j) = X.row(row);
    }
  } else {
    for (int j = 0; j < n_rules; ++j)
      for (Eigen::Index k = 0; k < N; ++k) rules.centers(j, k) = rng.uniform(lo(k), hi(k));
  }

  double range = (hi - lo).mean();
  if (!(range > 0.0)) range = 1.0;
  const double width = opts.width_scale > 0.0 ? opts.width_scale : default_width_scale(N);
  rules.sigma_upper.resize(n_rules);
  rules.sigma_lower.resize(n_rules);
  for (int j = 0; j < n_rules; ++j) {
    rules.sigma_upper(j) = rng.uniform(0.5, 1.5) * (range / 2.0) * width;
    const double ratio = rng.uniform(0.6, 0.95);
    rules.sigma_lower(j) = opts.equal_deviations ? rules.sigma_upper(j) : ratio * rules.sigma_upper(j);
  }
  rules.validate();
  return rules;
}

// Per-output SC-defuzzified scores on precomputed firings.
inline Matrix sit2_scores(const Matrix& Q, const Matrix& X, const detail::FiringTable& firing, Eigen::Index n_rules,
                          Reducer reducer) {
  const auto values = detail::consequent_values(Q, X, n_rules);
  Matrix scores(X.rows(), Q.cols());
  for (Eigen::Index p = 0; p < X.rows(); ++p) {
    const FiringInterval f = firing.row(p);
    for (Eigen::Index i = 0; i < Q.cols(); ++i) {
      const auto w = detail::gather(values, p, i);
      scores(p, i) = defuzz(reduce(reducer, f, w));
    }
  }
  return scores;
}

inline Sit2Model sit2_train(const Matrix& X, const Matrix& T, int n_rules, Rng& rng, const Sit2Options& opts = {}) {
  require(X.rows() > 0, ErrorKind::kDimension, "sit2_train: no samples");
  require(X.rows() == T.rows(), ErrorKind::kDimension, "sit2_train: X and T row counts differ");
  require(n_rules >= 2, ErrorKind::kInvalidArgument, "sit2_train: need at least 2 rules");
  require(opts.C > 0.0, ErrorKind::kInvalidArgument, "sit2_train: C must be positive");
  check_class_targets(T);

  Sit2Model model;
  model.rules = sit2_antecedents(X, n_rules, rng, opts);
  const auto firing = detail::fire_all(model.rules, X);
  for (Eigen::Index p = 0; p < X.rows(); ++p)
    require(firing.upper.row(p).maxCoeff() > 0.0, ErrorKind::kVacuousFiring, "vacuous firing");

  KroneckerRidge solver(X);

  // Nie-Tan weights (lower + upper) / sum.
  Matrix phi = firing.lower + firing.upper;
  phi.array().colwise() /= phi.rowwise().sum().array();
  model.consequents = solver.solve(phi, T, opts.C);
  model.stage = Sit2Stage::kInitialized;
  const auto values = detail::consequent_values(model.consequents, X, n_rules);
  {
    Matrix nt = Matrix::Zero(T.rows(), T.cols());
    for (Eigen::Index j = 0; j < n_rules; ++j) nt += (values[static_cast<std::size_t>(j)].array().colwise() * phi.col(j).array()).matrix();
    model.record.stage2_sse = (nt - T).squaredNorm();
  }
  if (!opts.refine) return model;

  Matrix refined(model.consequents.rows(), model.consequents.cols());
  for (Eigen::Index i = 0; i < T.cols(); ++i) {
    Matrix phi_i = Matrix::Zero(X.rows(), n_rules);
    for (Eigen::Index p = 0; p < X.rows(); ++p) {
      const FiringInterval f = firing.row(p);
      const auto w = detail::gather(values, p, i);
      const ReducedInterval r = sc_reduce(f, w);
      detail::normalize_into(f, r.z_l, 0.5, phi_i, p);
      detail::normalize_into(f, r.z_r, 0.5, phi_i, p);
    }
    refined.col(i) = solver.solve(phi_i, T.col(i), opts.C);
  }
  model.consequents = std::move(refined);
  model.stage = Sit2Stage::kRefined;
  model.record.stage3_sse = (sit2_scores(model.consequents, X, firing, n_rules, Reducer::kSc) - T).squaredNorm();
  return model;
}

inline Matrix sit2_predict(const Sit2Model& model, const Matrix& X, Reducer reducer = Reducer::kSc) {
  require(X.cols() == model.n_inputs(), ErrorKind::kDimension, "sit2_predict: input width mismatch");
  if (X.rows() == 0) return Matrix(0, model.n_outputs());
  return sit2_scores(model.consequents, X, detail::fire_all(model.rules, X), model.n_rules(), reducer);
}

// Nie-Tan point output for each sample, used for comparing against the
// interval reducers.
inline Matrix sit2_predict_nt(const Sit2Model& model, const Matrix& X) {
  require(X.cols() == model.n_inputs(), ErrorKind::kDimension, "sit2_predict_nt: input width mismatch");
  const auto firing = detail::fire_all(model.rules, X);
  const auto values = detail::consequent_values(model.consequents, X, model.n_rules());
  Matrix scores(X.rows(), model.n_outputs());
  for (Eigen::Index p = 0; p < X.rows(); ++p) {
    const FiringInterval f = firing.row(p);
    for (Eigen::Index i = 0; i < model.n_outputs(); ++i) scores(p, i) = nt_defuzz(f, detail::gather(values, p, i));
  }
  return scores;
}

}  // namespace hml
