#pragma once

// Rate-distortion bounds for a deployed classifier characterized by its
// confusion matrix: estimate-and-compress (E&C), indirect E&C with the
// effective distortion, the oracle curve of the label prior, the time-sharing
// chord and the merge-k operational baseline.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tosc/blahut_arimoto.hpp"
#include "tosc/curve.hpp"
#include "tosc/prob.hpp"

namespace tosc {

/// Row-stochastic p(estimate | true class) with the class prior p(y).
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;

  ConfusionMatrix(Matrix channel, Pmf prior) : channel_(std::move(channel)), prior_(std::move(prior)) {
    const std::size_t n = channel_.rows();
    if (n == 0 || channel_.cols() != n)
      throw ValidationError("confusion matrix must be square and nonempty");
    if (prior_.size() != n)
      throw ValidationError("confusion matrix: prior length " + std::to_string(prior_.size()) +
                            " does not match " + std::to_string(n) + " classes");
    for (std::size_t y = 0; y < n; ++y) {
      // Pmf validates and renormalizes within tolerance.
      const Pmf row(std::vector<double>(channel_.row(y).begin(), channel_.row(y).end()));
      std::copy(row.probs().begin(), row.probs().end(), channel_.row(y).begin());
    }
  }

  /// Counts table: rows normalized, prior proportional to row mass.
  static ConfusionMatrix from_counts(const Matrix& counts) {
    const std::size_t n = counts.rows();
    if (n == 0 || counts.cols() != n)
      throw ValidationError("confusion matrix must be square and nonempty");
    Matrix channel(n, n);
    std::vector<double> mass(n, 0.0);
    for (std::size_t y = 0; y < n; ++y) {
      const auto row = counts.row(y);
      for (double c : row)
        if (!std::isfinite(c) || c < 0.0)
          throw ValidationError("confusion matrix: negative or non-finite entry in row " +
                                std::to_string(y));
      mass[y] = std::accumulate(row.begin(), row.end(), 0.0);
      if (!(mass[y] > 0.0))
        throw ValidationError("confusion matrix: row " + std::to_string(y) + " is all zeros");
      for (std::size_t j = 0; j < n; ++j) channel(y, j) = row[j] / mass[y];
    }
    return ConfusionMatrix(std::move(channel), Pmf::from_weights(mass));
  }

  static ConfusionMatrix identity(std::size_t n) {
    return ConfusionMatrix(Matrix::identity(n), Pmf::uniform(n));
  }

  std::size_t classes() const noexcept { return channel_.rows(); }
  const Matrix& channel() const noexcept { return channel_; }
  const Pmf& prior() const noexcept { return prior_; }

 private:
  Matrix channel_;
  Pmf prior_;
};

struct TaskModelStats {
  double d_tm = 0.0;    // P(estimate != Y)
  Pmf estimate_marginal;
  Matrix posterior;     // posterior(y, est) = p(y | est); each column a pmf over y
  double d_zero = 0.0;  // 1 - max_y p(y)
  double estimate_entropy = 0.0;
  std::vector<std::size_t> unpredicted;  // estimates with p(est) = 0
  std::vector<std::string> warnings;
};

inline TaskModelStats stats(const ConfusionMatrix& cm) {
  const std::size_t n = cm.classes();
  const Matrix& ch = cm.channel();
  const Pmf& prior = cm.prior();

  TaskModelStats s;
  std::vector<double> marginal(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    s.d_tm += prior[y] * (1.0 - ch(y, y));
    for (std::size_t e = 0; e < n; ++e) marginal[e] += ch(y, e) * prior[y];
  }
  s.d_tm = std::clamp(s.d_tm, 0.0, 1.0);
  s.estimate_marginal = Pmf(marginal);

  s.posterior = Matrix(n, n);
  for (std::size_t e = 0; e < n; ++e) {
    const double pe = s.estimate_marginal[e];
    if (pe > 0.0) {
      for (std::size_t y = 0; y < n; ++y) s.posterior(y, e) = ch(y, e) * prior[y] / pe;
    } else {
      for (std::size_t y = 0; y < n; ++y) s.posterior(y, e) = prior[y];
      s.unpredicted.push_back(e);
      s.warnings.push_back("class " + std::to_string(e) +
                           " is never predicted; its posterior is set to the prior");
    }
  }
  s.d_zero = 1.0 - prior[prior.argmax()];
  s.estimate_entropy = entropy_bits(s.estimate_marginal);
  return s;
}

/// Task distortion P(reconstruction != Y) of an end-to-end channel p(rec | y).
inline double task_distortion(const Pmf& prior, const Matrix& end_to_end) {
  double d = 0.0;
  for (std::size_t y = 0; y < prior.size(); ++y) d += prior[y] * (1.0 - end_to_end(y, y));
  return std::clamp(d, 0.0, 1.0);
}

/// p(rec | y) = sum_est p(rec | est) p(est | y).
inline Matrix compose(const Matrix& est_given_y, const Matrix& rec_given_est) {
  const std::size_t n = est_given_y.rows(), m = rec_given_est.cols();
  Matrix out(n, m);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t e = 0; e < est_given_y.cols(); ++e) {
      const double w = est_given_y(y, e);
      if (w == 0.0) continue;
      const auto r = rec_given_est.row(e);
      for (std::size_t j = 0; j < m; ++j) out(y, j) += w * r[j];
    }
  return out;
}

/// E&C: compress the hard estimate against Hamming distortion, then score the
/// composed channel against the true label.
inline RDCurve ec_curve(const ConfusionMatrix& cm, std::span<const double> grid,
                        const BAConfig& cfg = {}) {
  const TaskModelStats s = stats(cm);
  const auto results =
      ba_sweep_results(s.estimate_marginal, DistortionMatrix::hamming(cm.classes()), grid, cfg);
  RDCurve curve{"ec", {}};
  for (const auto& r : results) {
    CurvePoint p = to_curve_point(r);
    p.distortion = task_distortion(cm.prior(), compose(cm.channel(), r.channel));
    curve.points.push_back(std::move(p));
  }
  curve.dedupe_distortion();
  return curve;
}

/// d(est, rec) = 1 - P(Y = rec | estimate = est).
inline DistortionMatrix effective_distortion(const TaskModelStats& s) {
  const std::size_t n = s.posterior.rows();
  Matrix m(n, n);
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t r = 0; r < n; ++r) m(e, r) = std::clamp(1.0 - s.posterior(r, e), 0.0, 1.0);
  return DistortionMatrix(std::move(m));
}

/// iE&C: the BA distortion under the effective distortion is the task
/// distortion itself.
inline RDCurve iec_curve(const ConfusionMatrix& cm, std::span<const double> grid,
                         const BAConfig& cfg = {}) {
  const TaskModelStats s = stats(cm);
  return ba_sweep(s.estimate_marginal, effective_distortion(s), grid, cfg, "iec");
}

struct TimeSharingValue {
  double rate = 0.0;
  bool degenerate = false;  // D0 == D_TM
};

/// Chord between (H(estimate), D_TM) and (0, D0).
inline TimeSharingValue ts_bound(const TaskModelStats& s, double d) {
  constexpr double tol = 1e-12;
  if (!(d >= s.d_tm - tol && d <= s.d_zero + tol))
    throw DomainError("ts_bound: distortion " + std::to_string(d) + " outside [D_TM, D0] = [" +
                      std::to_string(s.d_tm) + ", " + std::to_string(s.d_zero) + "]");
  const double span = s.d_zero - s.d_tm;
  if (!(span > tol)) return {0.0, true};
  const double t = std::clamp((s.d_zero - d) / span, 0.0, 1.0);
  return {t * s.estimate_entropy, false};
}

/// `count` evenly spaced points of the chord; lambda holds the fraction of
/// time the entropy-coded estimate is sent.
inline RDCurve ts_curve(const TaskModelStats& s, int count = 11) {
  RDCurve curve{"ts", {}};
  const int n = std::max(count, 2);
  for (int i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / (n - 1);
    const double d = frac * s.d_tm + (1.0 - frac) * s.d_zero;
    const TimeSharingValue v = ts_bound(s, d);
    CurvePoint p{frac, v.rate, d, {}};
    if (v.degenerate) add_flag(p.flags, "degenerate");
    curve.points.push_back(std::move(p));
  }
  curve.sort_by_distortion();
  return curve;
}

struct MergePoint {
  std::size_t k = 0;
  double rate = 0.0;
  double distortion = 0.0;
};

/// Merges the k least probable estimate symbols into the most probable one
/// and entropy-codes the induced marginal. Ties break by class index.
inline MergePoint merge_k_baseline(const ConfusionMatrix& cm, std::size_t k) {
  const std::size_t n = cm.classes();
  if (k + 1 > n)
    throw DomainError("merge_k: k = " + std::to_string(k) + " must lie in [0, " +
                      std::to_string(n - 1) + "]");
  const TaskModelStats s = stats(cm);
  const auto& pe = s.estimate_marginal;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pe[a] < pe[b]; });
  // Largest marginal, lowest index on ties.
  std::size_t target = 0;
  for (std::size_t e = 1; e < n; ++e)
    if (pe[e] > pe[target]) target = e;

  std::vector<std::size_t> map(n);
  std::iota(map.begin(), map.end(), std::size_t{0});
  std::size_t merged = 0;
  for (std::size_t idx = 0; idx < n && merged < k; ++idx) {
    if (order[idx] == target) continue;
    map[order[idx]] = target;
    ++merged;
  }

  std::vector<double> rec(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) rec[map[e]] += pe[e];
  Matrix end_to_end(n, n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t e = 0; e < n; ++e) end_to_end(y, map[e]) += cm.channel()(y, e);

  return {k, entropy_bits(Pmf(rec)), task_distortion(cm.prior(), end_to_end)};
}

inline RDCurve merge_curve(const ConfusionMatrix& cm) {
  RDCurve curve{"merge", {}};
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    const MergePoint m = merge_k_baseline(cm, k);
    curve.points.push_back({kNoLambda, m.rate, m.distortion, "k=" + std::to_string(k)});
  }
  curve.sort_by_distortion();
  return curve;
}

/// Oracle curve R_Y(D) of the label prior under Hamming distortion: closed
/// form for uniform priors, BA located at each requested distortion otherwise.
inline RDCurve ord_curve(const Pmf& prior, std::span<const double> d_grid,
                         const BAConfig& cfg = {}) {
  RDCurve curve{"ord", {}};
  const std::size_t k = prior.size();
  const double d0 = 1.0 - prior[prior.argmax()];
  const bool uniform = prior.is_uniform();
  const DistortionMatrix hamming = DistortionMatrix::hamming(k);
  for (double d : d_grid) {
    if (!(d >= 0.0)) throw DomainError("ord_curve: distortion must be nonnegative");
    if (k == 1 || d >= d0) {
      curve.points.push_back({kNoLambda, 0.0, d, {}});
    } else if (uniform) {
      curve.points.push_back({kNoLambda, rd_uniform_classes(k, d), d, {}});
    } else if (d == 0.0) {
      curve.points.push_back({kNoLambda, entropy_bits(prior), 0.0, {}});
    } else {
      const BAResult r = ba_point_at_distortion(prior, hamming, d, cfg, 1e-3, 60.0);
      curve.points.push_back(to_curve_point(r));
    }
  }
  curve.sort_by_distortion();
  return curve;
}

/// Evenly spaced distortions over [0, D0] of a prior.
inline std::vector<double> oracle_distortion_grid(const Pmf& prior, int count) {
  const double d0 = 1.0 - prior[prior.argmax()];
  const int n = std::max(count, 2);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = d0 * i / (n - 1);
  return g;
}

}  // namespace tosc
