#pragma once

// Dense linear algebra and seeded randomness shared by every model in the
// library. Matrices are row-major and laid out (samples x features).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hmlelm/error.hpp"

namespace hml {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Counter-based generator: draw n is a pure function of (key, n), so
// streams are reproducible and can be split per layer without sharing
// state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() { return mix(key_ + kGolden * ++counter_); }

  // Independent child stream. Does not advance this generator.
  Rng split(std::uint64_t stream) const { return Rng(mix(key_ ^ mix(stream + kGolden)), 0); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    require(n > 0, ErrorKind::kInvalidArgument, "Rng::index: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Matrix sigmoid(const Matrix& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

namespace detail {

inline void mirror_lower(Matrix& K) {
  for (Eigen::Index i = 0; i < K.rows(); ++i)
    for (Eigen::Index j = i + 1; j < K.cols(); ++j) K(i, j) = K(j, i);
}

// Lower triangle of A A^T, mirrored to a full symmetric matrix.
inline Matrix gram_rows(const Matrix& A) {
  Matrix K = Matrix::Zero(A.rows(), A.rows());
  K.selfadjointView<Eigen::Lower>().rankUpdate(A);
  mirror_lower(K);
  return K;
}

// Solves K X = rhs for symmetric K, factoring in place. With a finite ridge
// the system is SPD up to rounding, so a failed Cholesky is retried with
// diagonal jitter 1e-10 * trace / n, doubled up to three times. Without a
// ridge, a failed or near-singular factorization is rank deficiency.
//
// Only the lower triangle is overwritten by the factorization, so K is
// restored from its upper triangle and saved diagonal between attempts.
inline Matrix spd_solve(Matrix K, const Matrix& rhs, bool regularized) {
  const Eigen::Index n = K.rows();
  const Vector diag = K.diagonal();
  auto restore = [&](double jitter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) K(i, j) = K(j, i);
      K(i, i) = diag(i) + jitter;
    }
  };

  Eigen::LLT<Eigen::Ref<Matrix>> llt(K);
  bool ok = llt.info() == Eigen::Success;
  if (ok && !regularized) {
    const double tol = 64.0 * std::numeric_limits<double>::epsilon();
    for (Eigen::Index i = 0; i < n && ok; ++i) {
      const double piv = K(i, i) * K(i, i);
      ok = piv > tol * std::max(diag(i), std::numeric_limits<double>::min());
    }
  }
  if (ok) return llt.solve(rhs);
  if (!regularized) throw Error(ErrorKind::kRankDeficient, "rank-deficient, supply finite C");

  double jitter = 1e-10 * diag.sum() / static_cast<double>(n);
  if (!(jitter > 0.0)) jitter = 1e-10;
  for (int attempt = 0; attempt < 3; ++attempt) {
    restore(jitter);
    llt.compute(K);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
    jitter *= 2.0;
  }
  throw Error(ErrorKind::kNumerical, "Cholesky failed after jittered retries");
}

inline void check_ridge_args(const Matrix& H, const Matrix& T, double C) {
  require(H.rows() == T.rows(), ErrorKind::kDimension, "ridge_solve: H and T row counts differ");
  require(H.rows() >= 1 && H.cols() >= 1, ErrorKind::kDimension, "ridge_solve: empty H");
  require(C > 0.0, ErrorKind::kInvalidArgument, "ridge_solve: C must be positive");
}

}  // namespace detail

// (I/C + H^T H)^-1 H^T T
inline Matrix ridge_solve_primal(const Matrix& H, const Matrix& T, double C) {
  detail::check_ridge_args(H, T, C);
  Matrix K = detail::gram_rows(H.transpose());
  const bool regularized = std::isfinite(C);
  if (regularized) K.diagonal().array() += 1.0 / C;
  Matrix B = detail::spd_solve(std::move(K), H.transpose() * T, regularized);
  require(all_finite(B), ErrorKind::kNumerical, "ridge_solve: non-finite solution");
  return B;
}

// H^T (I/C + H H^T)^-1 T
inline Matrix ridge_solve_dual(const Matrix& H, const Matrix& T, double C) {
  detail::check_ridge_args(H, T, C);
  Matrix K = detail::gram_rows(H);
  const bool regularized = std::isfinite(C);
  if (regularized) K.diagonal().array() += 1.0 / C;
  Matrix alpha = detail::spd_solve(std::move(K), T, regularized);
  Matrix B = H.transpose() * alpha;
  require(all_finite(B), ErrorKind::kNumerical, "ridge_solve: non-finite solution");
  return B;
}

// Minimizer of |HB - T|^2 + |B|^2 / C. Picks the primal form when H is tall
// (M <= P) and the dual form otherwise. C may be kInfinity.
inline Matrix ridge_solve(const Matrix& H, const Matrix& T, double C) {
  detail::check_ridge_args(H, T, C);
  return H.cols() <= H.rows() ? ridge_solve_primal(H, T, C) : ridge_solve_dual(H, T, C);
}

inline constexpr double kPinvFallbackC = 1e12;

// pinv(H) * X without forming pinv(H). Exactly singular systems fall back to
// ridge with C = 1e12.
inline Matrix pinv_apply(const Matrix& H, const Matrix& X) {
  try {
    return ridge_solve(H, X, kInfinity);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kRankDeficient) throw;
    return ridge_solve(H, X, kPinvFallbackC);
  }
}

inline Matrix pseudo_inverse(const Matrix& H) {
  require(H.rows() >= 1 && H.cols() >= 1, ErrorKind::kDimension, "pseudo_inverse: empty matrix");
  return pinv_apply(H, Matrix::Identity(H.rows(), H.rows()));
}

// rows x cols matrix with orthonormal columns, from QR of standard-normal
// draws with the sign of R's diagonal folded into Q.
inline Matrix orthonormal_random(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  require(rows >= 1 && cols >= 1, ErrorKind::kDimension, "orthonormal_random: empty shape");
  require(cols <= rows, ErrorKind::kInvalidArgument,
          "cannot orthonormalize wide matrix; transpose convention required");
  Matrix G(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const auto& R = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

// max |A^T A - I|
inline double orthonormality_error(const Matrix& A) {
  const Matrix G = A.transpose() * A;
  return (G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

inline Matrix one_hot(std::span<const int> labels, int n_classes) {
  Matrix T = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), n_classes);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    require(labels[p] >= 0 && labels[p] < n_classes, ErrorKind::kInvalidArgument, "one_hot: label out of range");
    T(static_cast<Eigen::Index>(p), labels[p]) = 1.0;
  }
  return T;
}

// Row-wise argmax; ties go to the lowest index.
inline std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index p = 0; p < scores.rows(); ++p) {
    int best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(p, c) > scores(p, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(p)] = best;
  }
  return out;
}

inline Matrix append_ones_column(const Matrix& X) {
  Matrix out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

// Per-feature affine map onto [0, 1], fitted on one matrix and frozen.
// Constant features map to 0.
struct MinMaxScaler {
  RowVector lo;
  RowVector scale;

  static MinMaxScaler fit(const Matrix& X) {
    require(X.rows() >= 1, ErrorKind::kDimension, "MinMaxScaler::fit: no rows");
    MinMaxScaler s;
    s.lo = X.colwise().minCoeff();
    const RowVector hi = X.colwise().maxCoeff();
    s.scale = (hi - s.lo).unaryExpr([](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
    return s;
  }

  Matrix transform(const Matrix& X) const {
    require(X.cols() == lo.size(), ErrorKind::kDimension, "MinMaxScaler: feature width mismatch");
    return (X.rowwise() - lo).array().rowwise() * scale.array();
  }
};

}  // namespace hml
