#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "tosc/tosc.hpp"

namespace oracle {

// Binary entropy through natural logs.
inline double h2(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return -(u * std::log(u) + (1.0 - u) * std::log(1.0 - u)) / std::numbers::ln2;
}

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h / std::numbers::ln2;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Hamming RD of a pmf below its knee D <= (K - 1) p_min:
// R(D) = H(p) - h(D) - D log2(K - 1).
inline double hamming_rd_below_knee(const std::vector<double>& p, double d) {
  const double k = static_cast<double>(p.size());
  return entropy(p) - h2(d) - d * std::log2(k - 1.0);
}

// I(X; Xhat) in bits and E[d] of an explicit channel.
struct Evaluated {
  double rate = 0.0;
  double distortion = 0.0;
};

inline Evaluated evaluate_channel(const std::vector<double>& p,
                                  const std::vector<std::vector<double>>& w,
                                  const std::vector<std::vector<double>>& d) {
  const std::size_t m = w.front().size();
  std::vector<double> q(m, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) q[j] += p[i] * w[i][j];
  Evaluated e;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double a = p[i] * w[i][j];
      if (a <= 0.0) continue;
      e.rate += a * std::log2(w[i][j] / q[j]);
      e.distortion += a * d[i][j];
    }
  return e;
}

// Dense matrix product, plain loops.
inline std::vector<std::vector<double>> matmul(const std::vector<std::vector<double>>& a,
                                               const std::vector<std::vector<double>>& b) {
  std::vector<std::vector<double>> c(a.size(), std::vector<double>(b.front().size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b.front().size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

}  // namespace oracle

namespace testing_support {

/// Rate of `upper` (monotone envelope, linear interpolation) minus the rate
/// of `lower` at each of lower's own points with distortion in [lo, hi].
/// Returns the worst (smallest) margin.
inline double worst_margin_at_lower_points(const tosc::RDCurve& lower, const tosc::RDCurve& upper,
                                           double lo, double hi) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& p : lower.points) {
    if (p.distortion < lo || p.distortion > hi || !tosc::covers(upper, p.distortion)) continue;
    worst = std::min(worst, tosc::interpolate_rate(upper, p.distortion) - p.rate);
  }
  return worst;
}

/// Random square confusion channel with given mean diagonal, uniform prior.
inline tosc::ConfusionMatrix random_confusion(std::size_t k, double diag, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.04, 0.04);
  std::gamma_distribution<double> off(0.5, 1.0);
  tosc::Matrix ch(k, k);
  for (std::size_t y = 0; y < k; ++y) {
    const double dv = std::clamp(diag + jitter(rng), 0.0, 1.0);
    std::vector<double> w(k, 0.0);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != y) s += (w[j] = off(rng));
    for (std::size_t j = 0; j < k; ++j) ch(y, j) = j == y ? dv : (1.0 - dv) * w[j] / s;
  }
  return tosc::ConfusionMatrix(std::move(ch), tosc::Pmf::uniform(k));
}

inline std::vector<std::vector<double>> rows_of(const tosc::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tosc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
