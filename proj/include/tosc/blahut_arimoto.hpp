#pragma once

// Blahut-Arimoto iteration for the rate-distortion function of a discrete
// memoryless source, one operating point per Lagrange multiplier.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tosc/curve.hpp"
#include "tosc/prob.hpp"

namespace tosc {

struct BAConfig {
  /// Multiplier on distortion, natural-log units (slope of R(D) in nats).
  double lambda = 1.0;
  int max_iterations = 10000;
  /// Sup-norm change of the output marginal that ends the iteration.
  double convergence_tol = 1e-10;
  /// Starting output marginal; uniform when empty.
  std::optional<Pmf> initial_output;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw ValidationError("BA: multiplier must be positive and finite");
    if (max_iterations < 1) throw ValidationError("BA: max_iterations must be >= 1");
    if (!(convergence_tol > 0.0)) throw ValidationError("BA: convergence_tol must be positive");
  }
};

struct BAResult {
  double lambda = 0.0;
  double rate = 0.0;        // bits
  double distortion = 0.0;  // units of the distortion matrix
  Matrix channel;           // p(reconstruction | source), row-stochastic
  Pmf output_marginal;
  int iterations_used = 0;
  bool converged = false;
};

namespace detail {

// Per active source row: kernel exp(-lambda * (d_ij - min_j d_ij)) restricted
// to the column range where it does not underflow to zero.
struct BAKernel {
  std::vector<std::size_t> rows;  // active source indices
  std::vector<double> weight;     // source probability of each active row
  Matrix values;
  std::vector<std::size_t> lo, hi;
};

inline BAKernel make_kernel(const Pmf& source, const DistortionMatrix& d, double lambda) {
  BAKernel k;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] > 0.0) {
      k.rows.push_back(i);
      k.weight.push_back(source[i]);
    }
  }
  const std::size_t m = d.cols();
  k.values = Matrix(k.rows.size(), m);
  k.lo.resize(k.rows.size());
  k.hi.resize(k.rows.size());
  for (std::size_t a = 0; a < k.rows.size(); ++a) {
    const auto drow = d.row(k.rows[a]);
    const double dmin = *std::min_element(drow.begin(), drow.end());
    auto krow = k.values.row(a);
    std::size_t lo = m, hi = 0;
    for (std::size_t j = 0; j < m; ++j) {
      krow[j] = std::exp(-lambda * (drow[j] - dmin));
      if (krow[j] > 0.0) {
        lo = std::min(lo, j);
        hi = j + 1;
      }
    }
    k.lo[a] = lo;
    k.hi[a] = hi;
  }
  return k;
}

// Below this a row partition sum is recomputed in the log domain; it also
// bounds source-weight / partition-sum away from overflow.
inline constexpr double kUnderflowGuard = 1e-200;

// Output-marginal entries below this are set to zero.
inline constexpr double kNegligibleMass = 1e-250;

inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  for (; j < n; ++j) s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

// Channel row given log q, in the log domain with max subtraction. Used when
// the plain kernel product underflows.
inline void log_domain_row(std::span<const double> drow, std::span<const double> log_q,
                           double lambda, std::span<double> out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < log_q.size(); ++j) {
    out[j] = log_q[j] - lambda * drow[j];
    mx = std::max(mx, out[j]);
  }
  double z = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : out) v /= z;
}

inline void log_of(std::span<const double> q, std::vector<double>& out) {
  out.resize(q.size());
  for (std::size_t j = 0; j < q.size(); ++j)
    out[j] = q[j] > 0.0 ? std::log(q[j]) : -std::numeric_limits<double>::infinity();
}

// Fills `row` with the normalized channel row p(.|source row a).
inline void channel_row(const BAKernel& k, const DistortionMatrix& d, std::size_t a,
                        std::span<const double> q, double lambda, std::span<double> row) {
  const auto krow = k.values.row(a);
  const double z = dot(q.data() + k.lo[a], krow.data() + k.lo[a], k.hi[a] - k.lo[a]);
  if (!(z > kUnderflowGuard) || !std::isfinite(z)) {
    std::vector<double> log_q;
    log_of(q, log_q);
    log_domain_row(d.row(k.rows[a]), log_q, lambda, row);
    return;
  }
  std::fill(row.begin(), row.end(), 0.0);
  for (std::size_t j = k.lo[a]; j < k.hi[a]; ++j) row[j] = q[j] * krow[j] / z;
}

}  // namespace detail

/// One rate-distortion point at multiplier cfg.lambda. The reported rate is the
/// mutual information of the returned channel, so every point is achievable
/// even when the iteration stops on the iteration cap.
inline BAResult ba_point(const Pmf& source, const DistortionMatrix& d, const BAConfig& cfg) {
  cfg.validate();
  if (source.size() != d.rows())
    throw ValidationError("BA: source length " + std::to_string(source.size()) +
                          " does not match distortion rows " + std::to_string(d.rows()));
  const std::size_t m = d.cols();
  const double lambda = cfg.lambda;

  std::vector<double> q(m, 1.0 / static_cast<double>(m));
  if (cfg.initial_output) {
    if (cfg.initial_output->size() != m)
      throw ValidationError("BA: initial output marginal has wrong length");
    q = cfg.initial_output->vec();
  }

  const detail::BAKernel k = detail::make_kernel(source, d, lambda);
  const std::size_t na = k.rows.size();

  std::vector<double> coef(m), direct(m), q_next(m), scratch(m), log_q;
  BAResult res;
  res.lambda = lambda;

  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    std::fill(coef.begin(), coef.end(), 0.0);
    std::fill(direct.begin(), direct.end(), 0.0);
    bool have_log_q = false;
    for (std::size_t a = 0; a < na; ++a) {
      const auto krow = k.values.row(a);
      const std::size_t lo = k.lo[a], hi = k.hi[a];
      const double z = detail::dot(q.data() + lo, krow.data() + lo, hi - lo);
      if (z > detail::kUnderflowGuard && std::isfinite(z)) {
        const double s = k.weight[a] / z;
        double* c = coef.data();
        const double* kr = krow.data();
        for (std::size_t j = lo; j < hi; ++j) c[j] += s * kr[j];
      } else {
        if (!have_log_q) {
          detail::log_of(q, log_q);
          have_log_q = true;
        }
        detail::log_domain_row(d.row(k.rows[a]), log_q, lambda, scratch);
        for (std::size_t j = 0; j < m; ++j) direct[j] += k.weight[a] * scratch[j];
      }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      q_next[j] = q[j] * coef[j] + direct[j];
      sum += q_next[j];
    }
    double change = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      q_next[j] /= sum;
      // Collapsing output mass would otherwise sink into subnormals.
      if (q_next[j] < detail::kNegligibleMass) q_next[j] = 0.0;
      change = std::max(change, std::abs(q_next[j] - q[j]));
    }
    q.swap(q_next);
    if (change < cfg.convergence_tol) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.iterations_used = it;

  // Final channel and its exact output marginal.
  Matrix channel(source.size(), m);
  std::vector<double> marginal(m, 0.0);
  for (std::size_t a = 0; a < na; ++a) {
    auto row = channel.row(k.rows[a]);
    detail::channel_row(k, d, a, q, lambda, row);
    for (std::size_t j = 0; j < m; ++j) marginal[j] += k.weight[a] * row[j];
  }
  double msum = 0.0;
  for (double v : marginal) msum += v;
  for (double& v : marginal) v /= msum;

  double rate = 0.0, dist = 0.0;
  for (std::size_t a = 0; a < na; ++a) {
    const auto row = channel.row(k.rows[a]);
    const auto drow = d.row(k.rows[a]);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = row[j];
      if (w <= 0.0 || marginal[j] <= 0.0) continue;
      rate += k.weight[a] * w * std::log2(w / marginal[j]);
      dist += k.weight[a] * w * drow[j];
    }
  }
  // Rows of zero-probability source symbols carry the output marginal.
  for (std::size_t i = 0; i < source.size(); ++i)
    if (!(source[i] > 0.0)) std::copy(marginal.begin(), marginal.end(), channel.row(i).begin());

  res.rate = std::max(rate, 0.0);
  res.distortion = dist;
  res.channel = std::move(channel);
  res.output_marginal = Pmf(std::move(marginal));
  return res;
}

inline void validate_lambda_grid(std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
      throw ValidationError("lambda grid entries must be positive and finite");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ValidationError("lambda grid must be strictly increasing");
  }
}

/// `count` points from lo to hi, log- or linearly spaced.
inline std::vector<double> lambda_grid(double lo, double hi, int count, bool log_spaced = true) {
  if (count < 1) throw ValidationError("lambda grid: count must be >= 1");
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("lambda grid: need 0 < min <= max");
  if (count > 1 && !(hi > lo)) throw ValidationError("lambda grid: need min < max");
  std::vector<double> g(static_cast<std::size_t>(count));
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    g[static_cast<std::size_t>(i)] =
        log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                   : lo + t * (hi - lo);
  }
  g.back() = hi;
  return g;
}

/// Raw per-multiplier results, in grid order.
inline std::vector<BAResult> ba_sweep_results(const Pmf& source, const DistortionMatrix& d,
                                              std::span<const double> grid,
                                              const BAConfig& base) {
  validate_lambda_grid(grid);
  std::vector<BAResult> out;
  out.reserve(grid.size());
  for (double lambda : grid) {
    BAConfig cfg = base;
    cfg.lambda = lambda;
    out.push_back(ba_point(source, d, cfg));
  }
  return out;
}

inline CurvePoint to_curve_point(const BAResult& r) {
  CurvePoint p{r.lambda, r.rate, r.distortion, {}};
  if (!r.converged) add_flag(p.flags, "not-converged");
  return p;
}

inline RDCurve ba_sweep(const Pmf& source, const DistortionMatrix& d,
                        std::span<const double> grid, const BAConfig& base = {},
                        std::string method = "ba") {
  RDCurve curve{std::move(method), {}};
  for (const auto& r : ba_sweep_results(source, d, grid, base))
    curve.points.push_back(to_curve_point(r));
  curve.dedupe_distortion();
  return curve;
}

/// The RD point whose distortion equals `target`, located by bisection on
/// log(lambda). Distortion is nonincreasing in lambda.
inline BAResult ba_point_at_distortion(const Pmf& source, const DistortionMatrix& d,
                                       double target, const BAConfig& base = {},
                                       double lambda_lo = 1e-4, double lambda_hi = 1e3,
                                       int steps = 60) {
  BAConfig cfg = base;
  double lo = std::log(lambda_lo), hi = std::log(lambda_hi);
  cfg.lambda = lambda_hi;
  BAResult best = ba_point(source, d, cfg);
  if (best.distortion >= target) return best;
  cfg.lambda = lambda_lo;
  BAResult at_lo = ba_point(source, d, cfg);
  if (at_lo.distortion <= target) return at_lo;
  for (int s = 0; s < steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    cfg.lambda = std::exp(mid);
    BAResult r = ba_point(source, d, cfg);
    if (r.distortion > target) {
      lo = mid;
    } else {
      hi = mid;
      best = std::move(r);
    }
    if (std::abs(best.distortion - target) < 1e-10) break;
  }
  return best;
}

}  // namespace tosc
