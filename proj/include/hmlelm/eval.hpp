#pragma once

// Confusion matrices, accuracy, and the MAP vote rule for frame streams.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "hmlelm/numerics.hpp"

namespace hml {

struct ConfusionMatrix {
  // rows = truth, cols = predicted
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> counts;

  explicit ConfusionMatrix(int n_classes = 0) : counts(decltype(counts)::Zero(n_classes, n_classes)) {}

  int n_classes() const { return static_cast<int>(counts.rows()); }
  long long total() const { return counts.sum(); }

  void add(int truth, int predicted) {
    require(truth >= 0 && truth < n_classes() && predicted >= 0 && predicted < n_classes(), ErrorKind::kInvalidArgument,
            "confusion: class index out of range");
    ++counts(truth, predicted);
  }
};

inline ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int n_classes) {
  require(truth.size() == predicted.size(), ErrorKind::kDimension, "confusion: length mismatch");
  ConfusionMatrix cm(n_classes);
  for (std::size_t p = 0; p < truth.size(); ++p) cm.add(truth[p], predicted[p]);
  return cm;
}

struct AccuracyReport {
  double overall = 0.0;
  std::vector<double> per_class;  // one-vs-rest (TP + TN) / total
};

inline AccuracyReport accuracy(const ConfusionMatrix& cm) {
  const long long total = cm.total();
  require(cm.n_classes() > 0 && total > 0, ErrorKind::kInvalidArgument, "accuracy: empty confusion matrix");
  AccuracyReport r;
  const long long off = total - cm.counts.trace();
  r.overall = 1.0 - static_cast<double>(off) / static_cast<double>(total);
  for (int c = 0; c < cm.n_classes(); ++c) {
    const long long tp = cm.counts(c, c);
    const long long fn = cm.counts.row(c).sum() - tp;
    const long long fp = cm.counts.col(c).sum() - tp;
    const long long tn = total - tp - fn - fp;
    r.per_class.push_back(static_cast<double>(tp + tn) / static_cast<double>(total));
  }
  return r;
}

struct ActiveDecision {
  std::vector<double> fractions;  // vote share per class over the window
  std::optional<int> decision;
  std::size_t frames_used = 0;
};

// Hard argmax vote over the last `window` frames; decides the modal class
// when its share reaches t_c.
inline ActiveDecision active_classify(const Matrix& frame_scores, double t_c, std::size_t window) {
  require(frame_scores.rows() > 0, ErrorKind::kInvalidArgument, "active_classify: empty stream");
  require(window >= 1, ErrorKind::kInvalidArgument, "active_classify: window must be >= 1");
  require(t_c > 0.0 && t_c <= 1.0, ErrorKind::kInvalidArgument, "active_classify: threshold must be in (0, 1]");
  const auto n = static_cast<std::size_t>(frame_scores.rows());
  const std::size_t used = std::min(window, n);
  const auto votes = argmax_rows(frame_scores.bottomRows(static_cast<Eigen::Index>(used)));

  ActiveDecision d;
  d.frames_used = used;
  d.fractions.assign(static_cast<std::size_t>(frame_scores.cols()), 0.0);
  for (int v : votes) d.fractions[static_cast<std::size_t>(v)] += 1.0;
  for (double& f : d.fractions) f /= static_cast<double>(used);
  const auto best = std::max_element(d.fractions.begin(), d.fractions.end());
  if (*best >= t_c) d.decision = static_cast<int>(best - d.fractions.begin());
  return d;
}

struct StreamOutcome {
  std::optional<int> decision;
  std::size_t frames_seen = 0;  // frames consumed when the decision fired
};

// Feeds a stream frame by frame and stops at the first decision. Windows
// shorter than `window` are not judged.
inline StreamOutcome run_stream(const Matrix& frame_scores, double t_c, std::size_t window) {
  StreamOutcome out;
  for (Eigen::Index t = static_cast<Eigen::Index>(std::min<std::size_t>(window, static_cast<std::size_t>(frame_scores.rows())));
       t <= frame_scores.rows(); ++t) {
    const auto d = active_classify(frame_scores.topRows(t), t_c, window);
    if (d.decision) {
      out.decision = d.decision;
      out.frames_seen = static_cast<std::size_t>(t);
      return out;
    }
  }
  out.frames_seen = static_cast<std::size_t>(frame_scores.rows());
  return out;
}

}  // namespace hml
