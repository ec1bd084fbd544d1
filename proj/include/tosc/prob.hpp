#pragma once

// Finite-alphabet probability primitives: validated pmfs, cost matrices,
// entropies and the closed-form Hamming rate-distortion functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tosc {

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Simplex tolerance. Vectors off by less than this are renormalized.
inline constexpr double kProbTol = 1e-9;

/// x * log2(x) with the 0 * log 0 = 0 convention.
inline double xlog2x(double x) {
  if (x <= 0.0) return 0.0;
  return x * std::log2(x);
}

/// Probability vector over a finite alphabet.
class Pmf {
 public:
  Pmf() = default;

  explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ValidationError("pmf: empty alphabet");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      const double p = probs_[i];
      if (!std::isfinite(p) || p < 0.0) {
        throw ValidationError("pmf: entry " + std::to_string(i) +
                              " is negative or not finite");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTol) {
      throw ValidationError("pmf: entries sum to " + std::to_string(sum) +
                            ", expected 1");
    }
    for (double& p : probs_) p /= sum;
  }

  Pmf(std::initializer_list<double> probs)
      : Pmf(std::vector<double>(probs)) {}

  static Pmf uniform(std::size_t n) {
    if (n == 0) throw ValidationError("pmf: empty alphabet");
    return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  /// Normalizes arbitrary nonnegative weights (e.g. counts).
  static Pmf from_weights(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0)
        throw ValidationError("pmf: weights must be finite and nonnegative");
      sum += w;
    }
    if (!(sum > 0.0)) throw ValidationError("pmf: weights sum to zero");
    std::vector<double> p(weights.begin(), weights.end());
    for (double& v : p) v /= sum;
    return Pmf(std::move(p));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& vec() const noexcept { return probs_; }

  std::size_t argmax() const {
    return static_cast<std::size_t>(
        std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
  }

  bool is_uniform(double tol = 1e-12) const {
    const double u = 1.0 / static_cast<double>(probs_.size());
    return std::all_of(probs_.begin(), probs_.end(),
                       [&](double p) { return std::abs(p - u) <= tol; });
  }

 private:
  std::vector<double> probs_;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw ValidationError("matrix: ragged rows");
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Nonnegative finite source x reconstruction cost table.
class DistortionMatrix {
 public:
  DistortionMatrix() = default;

  explicit DistortionMatrix(Matrix costs) : costs_(std::move(costs)) {
    if (costs_.rows() == 0 || costs_.cols() == 0)
      throw ValidationError("distortion matrix: needs at least one row and column");
    for (std::size_t i = 0; i < costs_.rows(); ++i) {
      for (std::size_t j = 0; j < costs_.cols(); ++j) {
        const double c = costs_(i, j);
        if (!std::isfinite(c) || c < 0.0) {
          throw ValidationError("distortion matrix: entry (" + std::to_string(i) +
                                "," + std::to_string(j) +
                                ") is negative or not finite");
        }
      }
    }
  }

  static DistortionMatrix hamming(std::size_t n) {
    Matrix m(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
    return DistortionMatrix(std::move(m));
  }

  /// (x_i - x_j)^2 over a shared reconstruction grid.
  static DistortionMatrix squared_error(std::span<const double> points) {
    Matrix m(points.size(), points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = 0; j < points.size(); ++j) {
        const double e = points[i] - points[j];
        m(i, j) = e * e;
      }
    return DistortionMatrix(std::move(m));
  }

  std::size_t rows() const noexcept { return costs_.rows(); }
  std::size_t cols() const noexcept { return costs_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return costs_(i, j); }
  std::span<const double> row(std::size_t i) const { return costs_.row(i); }
  const Matrix& matrix() const noexcept { return costs_; }

 private:
  Matrix costs_;
};

inline double entropy_bits(const Pmf& p) {
  double h = 0.0;
  for (double v : p.probs()) h -= xlog2x(v);
  return std::max(h, 0.0);
}

inline double binary_entropy(double u) {
  if (!(u >= 0.0 && u <= 1.0))
    throw DomainError("binary_entropy: argument must lie in [0, 1]");
  return std::max(-xlog2x(u) - xlog2x(1.0 - u), 0.0);
}

/// Rate-distortion function of a Bernoulli(q) source under Hamming distortion.
inline double rd_binary(double q, double d) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("rd_binary: q must lie in [0, 1]");
  if (!(d >= 0.0)) throw DomainError("rd_binary: distortion must be nonnegative");
  if (d >= std::min(q, 1.0 - q)) return 0.0;
  return std::max(binary_entropy(q) - binary_entropy(d), 0.0);
}

/// Rate-distortion function of a uniform k-ary source under Hamming distortion.
inline double rd_uniform_classes(std::size_t k, double d) {
  if (k < 2) throw DomainError("rd_uniform_classes: need at least 2 classes");
  if (!(d >= 0.0)) throw DomainError("rd_uniform_classes: distortion must be nonnegative");
  const double kd = static_cast<double>(k);
  const double d0 = 1.0 - 1.0 / kd;
  if (d >= d0) return 0.0;
  const double r = std::log2(kd) - binary_entropy(d) - d * std::log2(kd - 1.0);
  return std::max(r, 0.0);
}

}  // namespace tosc
