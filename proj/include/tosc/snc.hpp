#pragma once

// Sample-and-communicate: draw the reconstruction from the tempered softmax
// posterior of a task model and send the sample. Rate is I(X; Yhat) estimated
// from a labeled logits dataset; distortion is the expected misclassification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tosc/blahut_arimoto.hpp"
#include "tosc/class_bounds.hpp"
#include "tosc/curve.hpp"
#include "tosc/prob.hpp"

namespace tosc {

/// Labeled pre-softmax outputs. Labels are 0-based class indices.
struct LogitsDataset {
  std::size_t classes = 0;
  std::vector<std::size_t> labels;
  Matrix logits;  // records x classes

  std::size_t size() const noexcept { return labels.size(); }

  void validate() const {
    if (classes < 2) throw ValidationError("logits: need at least 2 classes");
    if (labels.size() < 2) throw ValidationError("logits: need at least 2 records");
    if (logits.rows() != labels.size() || logits.cols() != classes)
      throw ValidationError("logits: table shape does not match labels and class count");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= classes)
        throw ValidationError("logits: record " + std::to_string(i) + " has label " +
                              std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(classes) + ")");
      for (double v : logits.row(i))
        if (!std::isfinite(v))
          throw ValidationError("logits: record " + std::to_string(i) + " has a non-finite logit");
    }
  }
};

namespace detail {

// softmax(lambda * logits) into `out`, max-subtracted.
inline void tempered_softmax(std::span<const double> logits, double lambda, std::span<double> out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = lambda * logits[j];
    mx = std::max(mx, out[j]);
  }
  if (!std::isfinite(mx)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return;
  }
  double z = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : out) v /= z;
}

}  // namespace detail

inline Pmf tempered_posterior(std::span<const double> logits, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("tempered posterior: lambda must be positive");
  for (double v : logits)
    if (!std::isfinite(v)) throw ValidationError("tempered posterior: non-finite logit");
  std::vector<double> out(logits.size());
  detail::tempered_softmax(logits, lambda, out);
  return Pmf(std::move(out));
}

struct SncPoint {
  double lambda = 0.0;
  double rate = 0.0;        // bits
  double distortion = 0.0;  // misclassification probability
};

/// Plug-in estimates from exact per-record posteriors:
///   rate = H(mean posterior) - mean H(posterior)
///   distortion = 1 - mean posterior mass on the true label
inline SncPoint snc_point(const LogitsDataset& ds, double lambda) {
  ds.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("snc: lambda must be positive and finite");
  const std::size_t k = ds.classes;
  std::vector<double> post(k), marginal(k, 0.0);
  double cond_entropy = 0.0, hit = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    detail::tempered_softmax(ds.logits.row(i), lambda, post);
    double h = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      marginal[j] += post[j];
      h -= xlog2x(post[j]);
    }
    cond_entropy += h;
    hit += post[ds.labels[i]];
  }
  const double n = static_cast<double>(ds.size());
  double h_marginal = 0.0;
  for (double& m : marginal) {
    m /= n;
    h_marginal -= xlog2x(m);
  }
  SncPoint p;
  p.lambda = lambda;
  p.rate = std::clamp(h_marginal - cond_entropy / n, 0.0, std::log2(static_cast<double>(k)));
  p.distortion = std::clamp(1.0 - hit / n, 0.0, 1.0);
  return p;
}

inline RDCurve snc_sweep(const LogitsDataset& ds, std::span<const double> grid) {
  validate_lambda_grid(grid);
  RDCurve curve{"snc", {}};
  for (double lambda : grid) {
    const SncPoint p = snc_point(ds, lambda);
    curve.points.push_back({p.lambda, p.rate, p.distortion, "empirical"});
  }
  curve.sort_by_distortion();
  return curve;
}

/// Empirical argmax confusion counts, rows = true label, no smoothing.
inline Matrix argmax_confusion_counts(const LogitsDataset& ds) {
  Matrix counts(ds.classes, ds.classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.logits.row(i);
    const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    counts(ds.labels[i], pred) += 1.0;
  }
  return counts;
}

inline ConfusionMatrix argmax_confusion(const LogitsDataset& ds) {
  return ConfusionMatrix::from_counts(argmax_confusion_counts(ds));
}

// ---------------------------------------------------------------------------
// Synthetic logits
// ---------------------------------------------------------------------------

enum class SynthKind { kGmm, kDirichlet };

struct SynthParams {
  SynthKind kind = SynthKind::kGmm;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;

  // gmm: X = 2Y - 1 + Z, Z ~ N(0, noise_variance), P(Y = 1) = q.
  double q = 0.5;
  double noise_variance = 1.0;
  double logit_scale = 1.0;  // logits = logit_scale * log p(y | x)

  // dirichlet: posterior ~ Dir(base on every class + concentration on y).
  std::size_t classes = 10;
  double concentration = 20.0;  // +inf gives one-hot posteriors
  double base_concentration = 1.0;
  std::vector<double> prior;  // empty = uniform
};

namespace detail {

// Finite stand-in for log 0 so that datasets stay finite.
inline double safe_log(double p) {
  return p > 0.0 ? std::log(p) : std::numeric_limits<double>::lowest();
}

}  // namespace detail

inline LogitsDataset synth_logits(const SynthParams& params) {
  if (params.samples < 2) throw ValidationError("synth: need at least 2 samples");
  std::mt19937_64 rng(params.seed);
  LogitsDataset ds;

  if (params.kind == SynthKind::kGmm) {
    if (!(params.q > 0.0 && params.q < 1.0)) throw ValidationError("synth: q must lie in (0, 1)");
    if (!(params.noise_variance > 0.0)) throw ValidationError("synth: noise variance must be positive");
    if (!(params.logit_scale > 0.0)) throw ValidationError("synth: logit scale must be positive");
    ds.classes = 2;
    ds.labels.resize(params.samples);
    ds.logits = Matrix(params.samples, 2);
    std::bernoulli_distribution label(params.q);
    std::normal_distribution<double> noise(0.0, std::sqrt(params.noise_variance));
    const double log_prior[2] = {std::log(1.0 - params.q), std::log(params.q)};
    for (std::size_t i = 0; i < params.samples; ++i) {
      const std::size_t y = label(rng) ? 1 : 0;
      const double x = 2.0 * static_cast<double>(y) - 1.0 + noise(rng);
      double l[2];
      for (int c = 0; c < 2; ++c) {
        const double e = x - (2.0 * c - 1.0);
        l[c] = log_prior[c] - e * e / (2.0 * params.noise_variance);
      }
      const double mx = std::max(l[0], l[1]);
      const double lse = mx + std::log(std::exp(l[0] - mx) + std::exp(l[1] - mx));
      ds.labels[i] = y;
      ds.logits(i, 0) = params.logit_scale * (l[0] - lse);
      ds.logits(i, 1) = params.logit_scale * (l[1] - lse);
    }
  } else {
    const std::size_t k = params.classes;
    if (k < 2) throw ValidationError("synth: need at least 2 classes");
    if (!(params.concentration > 0.0)) throw ValidationError("synth: concentration must be positive");
    if (!(params.base_concentration > 0.0))
      throw ValidationError("synth: base concentration must be positive");
    std::vector<double> prior = params.prior;
    if (prior.empty()) prior.assign(k, 1.0);
    if (prior.size() != k) throw ValidationError("synth: prior length must equal class count");
    std::discrete_distribution<std::size_t> label(prior.begin(), prior.end());
    std::gamma_distribution<double> base(params.base_concentration, 1.0);
    const bool hard = std::isinf(params.concentration);
    std::gamma_distribution<double> peak(hard ? 1.0 : params.concentration, 1.0);

    ds.classes = k;
    ds.labels.resize(params.samples);
    ds.logits = Matrix(params.samples, k);
    std::vector<double> v(k);
    for (std::size_t i = 0; i < params.samples; ++i) {
      const std::size_t y = label(rng);
      ds.labels[i] = y;
      auto row = ds.logits.row(i);
      if (hard) {
        for (std::size_t j = 0; j < k; ++j) row[j] = j == y ? 0.0 : detail::safe_log(0.0);
        continue;
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        v[j] = base(rng);
        if (j == y) v[j] += peak(rng);  // Dir(a + c e_y) via additive gammas
        sum += v[j];
      }
      for (std::size_t j = 0; j < k; ++j) row[j] = detail::safe_log(v[j] / sum);
    }
  }
  ds.validate();
  return ds;
}

}  // namespace tosc
