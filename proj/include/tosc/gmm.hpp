#pragma once

// Binary label observed through additive Gaussian noise, X = 2Y - 1 + Z,
// discretized on a uniform grid so that every bound reduces to a finite BA
// problem.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "tosc/blahut_arimoto.hpp"
#include "tosc/class_bounds.hpp"
#include "tosc/curve.hpp"
#include "tosc/prob.hpp"

namespace tosc {

struct GmmSpec {
  double q = 0.5;  // P(Y = 1)
  double mean0 = -1.0;
  double mean1 = 1.0;
  double noise_variance = 1.0;
  double half_width = 6.0;
  int bins = 1201;

  void validate() const {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("gmm: q must lie in (0, 1)");
    if (!(noise_variance > 0.0)) throw ValidationError("gmm: noise variance must be positive");
    if (!(half_width > 0.0)) throw ValidationError("gmm: grid half-width must be positive");
    if (bins < 3 || bins % 2 == 0) throw ValidationError("gmm: grid bins must be odd and >= 3");
  }
};

struct DiscretizedGmm {
  GmmSpec spec;
  std::vector<double> grid;  // cell centers, ascending, grid[bins/2] == 0
  double cell_width = 0.0;
  Pmf p_x;
  std::array<Pmf, 2> p_x_given_y;  // index = label
  Matrix p_y_given_x;              // bins x 2
  std::array<double, 2> truncated_mass{};  // density mass lost outside the grid

  std::size_t size() const noexcept { return grid.size(); }
  Pmf prior() const { return Pmf{1.0 - spec.q, spec.q}; }
};

inline DiscretizedGmm discretize(const GmmSpec& spec) {
  spec.validate();
  DiscretizedGmm g;
  g.spec = spec;
  const auto n = static_cast<std::size_t>(spec.bins);
  g.cell_width = 2.0 * spec.half_width / static_cast<double>(n - 1);
  g.grid.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g.grid[i] = -spec.half_width + static_cast<double>(i) * g.cell_width;
  g.grid[n / 2] = 0.0;

  const double sigma = std::sqrt(spec.noise_variance);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  const std::array<double, 2> means{spec.mean0, spec.mean1};
  std::array<std::vector<double>, 2> cond;
  for (int c = 0; c < 2; ++c) {
    cond[c].resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (g.grid[i] - means[c]) / sigma;
      cond[c][i] = norm * std::exp(-0.5 * z * z) * g.cell_width;
      total += cond[c][i];
    }
    g.truncated_mass[c] = 1.0 - total;
    for (double& v : cond[c]) v /= total;
  }

  const double q = spec.q;
  std::vector<double> px(n);
  g.p_y_given_x = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double j0 = (1.0 - q) * cond[0][i];
    const double j1 = q * cond[1][i];
    px[i] = j0 + j1;
    const double s = j0 + j1;
    if (s > 0.0) {
      g.p_y_given_x(i, 0) = j0 / s;
      g.p_y_given_x(i, 1) = j1 / s;
    } else {
      g.p_y_given_x(i, 0) = 1.0 - q;
      g.p_y_given_x(i, 1) = q;
    }
  }
  g.p_x = Pmf::from_weights(px);
  g.p_x_given_y = {Pmf(std::move(cond[0])), Pmf(std::move(cond[1]))};
  return g;
}

/// Confusion matrix of the sign estimator (estimate 1 iff x >= 0).
inline ConfusionMatrix sign_confusion(const DiscretizedGmm& g) {
  Matrix ch(2, 2);
  for (int y = 0; y < 2; ++y)
    for (std::size_t i = 0; i < g.size(); ++i)
      ch(y, g.grid[i] >= 0.0 ? 1 : 0) += g.p_x_given_y[y][i];
  return ConfusionMatrix(std::move(ch), g.prior());
}

/// Error probability of the sign estimator on the grid.
inline double d_tm_gmm(const DiscretizedGmm& g) {
  const double q = g.spec.q;
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.grid[i] < 0.0)
      err += q * g.p_x_given_y[1][i];
    else
      err += (1.0 - q) * g.p_x_given_y[0][i];
  }
  return err;
}

/// Oracle curve of the Bernoulli(q) label.
inline RDCurve gmm_ord_curve(const DiscretizedGmm& g, std::span<const double> d_grid) {
  RDCurve curve{"ord", {}};
  for (double d : d_grid) curve.points.push_back({kNoLambda, rd_binary(g.spec.q, d), d, {}});
  curve.sort_by_distortion();
  return curve;
}

/// Indirect RD of the label given X through the effective distortion
/// 1 - p(rec | x).
inline RDCurve gmm_ird_curve(const DiscretizedGmm& g, std::span<const double> grid,
                             const BAConfig& cfg = {}) {
  Matrix eff(g.size(), 2);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t r = 0; r < 2; ++r) eff(i, r) = std::clamp(1.0 - g.p_y_given_x(i, r), 0.0, 1.0);
  return ba_sweep(g.p_x, DistortionMatrix(std::move(eff)), grid, cfg, "ird");
}

inline RDCurve gmm_ec_curve(const DiscretizedGmm& g, std::span<const double> grid,
                            const BAConfig& cfg = {}) {
  return ec_curve(sign_confusion(g), grid, cfg);
}

/// MAP error of the label from the reconstruction of a channel p(xhat | x).
inline double map_error_after_channel(const DiscretizedGmm& g, const Matrix& channel) {
  const std::size_t n = g.size(), m = channel.cols();
  std::vector<double> joint0(m, 0.0), joint1(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a0 = g.p_x[i] * g.p_y_given_x(i, 0);
    const double a1 = g.p_x[i] * g.p_y_given_x(i, 1);
    const auto row = channel.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      joint0[j] += a0 * row[j];
      joint1[j] += a1 * row[j];
    }
  }
  // sum_xhat p(xhat) (1 - max_y p(y | xhat)) = sum_xhat min_y p(y, xhat)
  double err = 0.0;
  for (std::size_t j = 0; j < m; ++j) err += std::min(joint0[j], joint1[j]);
  return std::clamp(err, 0.0, 1.0);
}

/// Iteration cap used for the C&E sweep. The bins x bins problem converges
/// slowly where the optimal reconstruction support collapses.
inline constexpr int kCeMaxIterations = 2000;

/// C&E: squared-error compression of X on its own grid, MAP label estimate
/// at the receiver. With `warm_start` the grid is walked from the largest
/// multiplier down, each point starting from the previous output marginal.
inline RDCurve gmm_ce_curve(const DiscretizedGmm& g, std::span<const double> grid,
                            const BAConfig& cfg = {}, bool warm_start = true) {
  validate_lambda_grid(grid);
  const DistortionMatrix mse = DistortionMatrix::squared_error(g.grid);
  RDCurve curve{"ce", {}};
  std::optional<Pmf> previous;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    BAConfig point_cfg = cfg;
    point_cfg.lambda = warm_start ? grid[grid.size() - 1 - n] : grid[n];
    if (warm_start && previous) point_cfg.initial_output = previous;
    const BAResult r = ba_point(g.p_x, mse, point_cfg);
    CurvePoint p = to_curve_point(r);
    p.distortion = map_error_after_channel(g, r.channel);
    curve.points.push_back(std::move(p));
    if (warm_start) previous = r.output_marginal;
  }
  curve.dedupe_distortion();
  return curve;
}

/// Distortions evenly spaced over [0, min(q, 1 - q)].
inline std::vector<double> gmm_oracle_distortion_grid(const DiscretizedGmm& g, int count) {
  const double d0 = std::min(g.spec.q, 1.0 - g.spec.q);
  const int n = std::max(count, 2);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = d0 * i / (n - 1);
  return out;
}

}  // namespace tosc
