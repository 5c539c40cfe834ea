#pragma once

// Interval type-2 fuzzy inference: Gaussian rule firing with an uncertain
// deviation, and center-of-sets type reduction.
//
// A reduction maps per-rule firing intervals [lower_j, upper_j] and crisp
// consequents w_j to the interval [y_l, y_r] of weighted means
//
//   y(z) = sum_j c_j w_j / sum_j c_j,   c_j = z_j ? upper_j : lower_j,
//
// minimized (y_l) and maximized (y_r) over binary z. Four routes compute it:
// EKM (sorted switch-point search), SC (sort-free coordinate sweeps over z),
// exhaustive enumeration, and the Nie-Tan closed form as a point estimate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "hmlelm/numerics.hpp"

namespace hml {

struct It2RuleBase {
  Matrix centers;      // rules x inputs
  Vector sigma_lower;  // narrower deviation, per rule
  Vector sigma_upper;  // wider deviation, per rule

  Eigen::Index n_rules() const { return centers.rows(); }
  Eigen::Index n_inputs() const { return centers.cols(); }

  void validate() const {
    require(n_rules() >= 1 && n_inputs() >= 1, ErrorKind::kDimension, "rule base: empty");
    require(sigma_lower.size() == n_rules() && sigma_upper.size() == n_rules(), ErrorKind::kDimension,
            "rule base: deviation vectors do not match rule count");
    require(centers.allFinite() && sigma_lower.allFinite() && sigma_upper.allFinite(), ErrorKind::kInvalidArgument,
            "rule base: non-finite parameter");
    for (Eigen::Index j = 0; j < n_rules(); ++j) {
      require(sigma_lower(j) > 0.0 && sigma_lower(j) <= sigma_upper(j), ErrorKind::kInvalidArgument,
              "rule base: need 0 < sigma_lower <= sigma_upper");
    }
  }
};

struct FiringInterval {
  Vector lower;
  Vector upper;
  double scale_log = 0.0;  // log-offset removed from both bounds

  Eigen::Index size() const { return upper.size(); }
};

struct ReducedInterval {
  double y_l = 0.0;
  double y_r = 0.0;
  std::vector<std::uint8_t> z_l;  // 1 where the rule contributes its upper firing
  std::vector<std::uint8_t> z_r;
};

namespace detail {

inline void check_reduction_args(const FiringInterval& f, std::span<const double> w) {
  require(f.size() >= 1, ErrorKind::kDimension, "type reduction: no rules");
  require(f.lower.size() == f.upper.size() && static_cast<std::size_t>(f.size()) == w.size(), ErrorKind::kDimension,
          "type reduction: firing and consequent lengths differ");
  bool any = false;
  for (Eigen::Index j = 0; j < f.size(); ++j) any = any || f.upper(j) > 0.0;
  require(any, ErrorKind::kVacuousFiring, "vacuous firing");
}

inline bool all_lower_zero(const FiringInterval& f) {
  for (Eigen::Index j = 0; j < f.size(); ++j)
    if (f.lower(j) != 0.0) return false;
  return true;
}

// Endpoint when every lower firing is zero: the extreme consequent among
// rules with nonzero upper firing.
inline void extreme_consequents(const FiringInterval& f, std::span<const double> w, ReducedInterval& r) {
  const std::size_t m = w.size();
  double lo = kInfinity, hi = -kInfinity;
  for (std::size_t j = 0; j < m; ++j) {
    if (f.upper(static_cast<Eigen::Index>(j)) == 0.0) continue;
    lo = std::min(lo, w[j]);
    hi = std::max(hi, w[j]);
  }
  r.y_l = lo;
  r.y_r = hi;
  r.z_l.assign(m, 0);
  r.z_r.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    if (f.upper(static_cast<Eigen::Index>(j)) == 0.0) continue;
    r.z_l[j] = w[j] == lo;
    r.z_r[j] = w[j] == hi;
  }
}

}  // namespace detail

// y(z) summed directly from the chosen bounds.
inline double cos_value(const FiringInterval& f, std::span<const double> w, std::span<const std::uint8_t> z) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double c = z[j] ? f.upper(jj) : f.lower(jj);
    num += c * w[j];
    den += c;
  }
  return num / den;
}

// Product t-norm of per-dimension Gaussians, evaluated in the log domain.
// Both bounds are shifted by the largest upper log-firing, so the largest
// upper firing is exactly 1.
inline FiringInterval firing_strengths(const It2RuleBase& rules, std::span<const double> x) {
  require(static_cast<Eigen::Index>(x.size()) == rules.n_inputs(), ErrorKind::kDimension,
          "firing_strengths: input width mismatch");
  const Eigen::Index m = rules.n_rules();
  Eigen::Map<const RowVector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Vector log_lower(m), log_upper(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double d2 = (rules.centers.row(j) - xv).squaredNorm();
    log_upper(j) = -d2 / (2.0 * rules.sigma_upper(j) * rules.sigma_upper(j));
    log_lower(j) = -d2 / (2.0 * rules.sigma_lower(j) * rules.sigma_lower(j));
  }
  FiringInterval f;
  f.scale_log = log_upper.maxCoeff();
  f.upper = (log_upper.array() - f.scale_log).exp().matrix();
  f.lower = (log_lower.array() - f.scale_log).exp().matrix();
  return f;
}

// Nie-Tan direct defuzzification.
inline double nt_defuzz(const FiringInterval& f, std::span<const double> w) {
  require(static_cast<std::size_t>(f.size()) == w.size() && f.lower.size() == f.upper.size(), ErrorKind::kDimension,
          "nt_defuzz: firing and consequent lengths differ");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double c = f.lower(jj) + f.upper(jj);
    num += c * w[j];
    den += c;
  }
  require(den > 0.0, ErrorKind::kVacuousFiring, "vacuous firing");
  return num / den;
}

// Enhanced Karnik-Mendel. Consequents are sorted once, then each endpoint
// walks its switch point until it is consistent with the current estimate.
inline ReducedInterval ekm_reduce(const FiringInterval& f, std::span<const double> w) {
  detail::check_reduction_args(f, w);
  const std::size_t m = w.size();
  ReducedInterval r;
  if (detail::all_lower_zero(f)) {
    detail::extreme_consequents(f, w, r);
    return r;
  }
  if (m == 1) {
    r.y_l = r.y_r = w[0];
    r.z_l.assign(1, 1);
    r.z_r.assign(1, 1);
    return r;
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
  std::vector<double> ws(m), lo(m), up(m);
  for (std::size_t i = 0; i < m; ++i) {
    ws[i] = w[order[i]];
    lo[i] = f.lower(static_cast<Eigen::Index>(order[i]));
    up[i] = f.upper(static_cast<Eigen::Index>(order[i]));
  }

  // Largest k in [1, m-1] with ws[k-1] <= y (1-based switch point).
  auto switch_point = [&](double y) {
    std::size_t k = 1;
    while (k + 1 < m && ws[k] <= y) ++k;
    return k;
  };
  const std::size_t max_iters = m + 2;

  // Left endpoint: upper firings below the switch point, lower above.
  std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(m) / 2.4)), 1, m - 1);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = i < k ? up[i] : lo[i];
    a += c * ws[i];
    b += c;
  }
  double y = a / b;
  for (std::size_t iter = 0;; ++iter) {
    require(iter <= max_iters, ErrorKind::kNumerical, "ekm_reduce: left endpoint did not converge");
    const std::size_t kk = switch_point(y);
    if (kk == k) break;
    const double s = kk > k ? 1.0 : -1.0;
    for (std::size_t i = std::min(k, kk); i < std::max(k, kk); ++i) {
      a += s * ws[i] * (up[i] - lo[i]);
      b += s * (up[i] - lo[i]);
    }
    y = a / b;
    k = kk;
  }
  r.z_l.assign(m, 0);
  for (std::size_t i = 0; i < k; ++i) r.z_l[order[i]] = 1;

  // Right endpoint: lower firings below the switch point, upper above.
  k = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(m) / 1.7)), 1, m - 1);
  a = b = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = i < k ? lo[i] : up[i];
    a += c * ws[i];
    b += c;
  }
  y = a / b;
  for (std::size_t iter = 0;; ++iter) {
    require(iter <= max_iters, ErrorKind::kNumerical, "ekm_reduce: right endpoint did not converge");
    const std::size_t kk = switch_point(y);
    if (kk == k) break;
    const double s = kk > k ? 1.0 : -1.0;
    for (std::size_t i = std::min(k, kk); i < std::max(k, kk); ++i) {
      a -= s * ws[i] * (up[i] - lo[i]);
      b -= s * (up[i] - lo[i]);
    }
    y = a / b;
    k = kk;
  }
  r.z_r.assign(m, 0);
  for (std::size_t i = k; i < m; ++i) r.z_r[order[i]] = 1;

  r.y_l = cos_value(f, w, r.z_l);
  r.y_r = cos_value(f, w, r.z_r);
  return r;
}

namespace detail {

// One endpoint of the SC reducer. Starts from z = 1 and sweeps the rules,
// setting z_j from the sign of A_j = w_j * den - num, where (num, den) track
// the weighted-mean numerator and denominator of the current z. Exact ties
// keep z_j. Each flip moves y(z) strictly toward the endpoint, so every rule
// flips at most once.
inline std::vector<std::uint8_t> sc_endpoint(const FiringInterval& f, std::span<const double> w, bool left) {
  const std::size_t m = w.size();
  std::vector<std::uint8_t> z(m, 1);
  const std::size_t max_sweeps = m + 2;
  for (std::size_t sweep = 0;; ++sweep) {
    require(sweep < max_sweeps, ErrorKind::kNumerical, "sc_reduce: did not converge");
    // Re-summed every sweep so rounding from incremental updates cannot
    // accumulate across sweeps.
    double den = 0.0, num = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double c = z[j] ? f.upper(jj) : f.lower(jj);
      den += c;
      num += c * w[j];
    }
    bool flipped = false;
    for (std::size_t j = 0; j < m; ++j) {
      const double A = w[j] * den - num;
      if (A == 0.0) continue;
      const std::uint8_t want = left ? (A < 0.0) : (A > 0.0);
      if (want == z[j]) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      const double du = f.upper(jj) - f.lower(jj);
      if (z[j]) {
        den -= du;
        num -= du * w[j];
      } else {
        den += du;
        num += du * w[j];
      }
      z[j] = want;
      flipped = true;
    }
    if (!flipped) return z;
  }
}

}  // namespace detail

// Sort-free COS reduction.
inline ReducedInterval sc_reduce(const FiringInterval& f, std::span<const double> w) {
  detail::check_reduction_args(f, w);
  ReducedInterval r;
  if (detail::all_lower_zero(f)) {
    detail::extreme_consequents(f, w, r);
    return r;
  }
  r.z_l = detail::sc_endpoint(f, w, true);
  r.z_r = detail::sc_endpoint(f, w, false);
  r.y_l = cos_value(f, w, r.z_l);
  r.y_r = cos_value(f, w, r.z_r);
  return r;
}

inline constexpr std::size_t kBruteForceMaxRules = 20;

// Exhaustive search over all 2^M binary z. Assignments with a zero
// denominator are skipped.
inline ReducedInterval brute_force_cos(const FiringInterval& f, std::span<const double> w) {
  require(w.size() <= kBruteForceMaxRules, ErrorKind::kInvalidArgument, "brute_force_cos: too many rules for enumeration");
  detail::check_reduction_args(f, w);
  const std::size_t m = w.size();
  ReducedInterval r;
  r.y_l = kInfinity;
  r.y_r = -kInfinity;
  std::vector<std::uint8_t> z(m);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << m); ++mask) {
    double den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      z[j] = (mask >> j) & 1U;
      den += z[j] ? f.upper(static_cast<Eigen::Index>(j)) : f.lower(static_cast<Eigen::Index>(j));
    }
    if (!(den > 0.0)) continue;
    const double y = cos_value(f, w, z);
    if (y < r.y_l) {
      r.y_l = y;
      r.z_l = z;
    }
    if (y > r.y_r) {
      r.y_r = y;
      r.z_r = z;
    }
  }
  return r;
}

inline double defuzz(const ReducedInterval& r) { return 0.5 * (r.y_l + r.y_r); }

enum class Reducer { kSc, kEkm, kBruteForce };

inline ReducedInterval reduce(Reducer which, const FiringInterval& f, std::span<const double> w) {
  switch (which) {
    case Reducer::kSc: return sc_reduce(f, w);
    case Reducer::kEkm: return ekm_reduce(f, w);
    case Reducer::kBruteForce: return brute_force_cos(f, w);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown reducer");
}

}  // namespace hml
