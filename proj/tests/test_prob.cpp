#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"
#include "tosc/prob.hpp"

using namespace tosc;

TEST(Pmf, RejectsNegativeAndNonNormalized) {
  EXPECT_THROW(Pmf({0.5, 0.6}), ValidationError);
  EXPECT_THROW(Pmf({1.2, -0.2}), ValidationError);
  EXPECT_THROW(Pmf(std::vector<double>{}), ValidationError);
  EXPECT_THROW(Pmf({std::nan(""), 1.0}), ValidationError);
}

TEST(Pmf, RenormalizesWithinTolerance) {
  const Pmf p({0.5 + 4e-10, 0.5});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(Pmf, FromWeights) {
  const std::vector<double> w{90, 10};
  const Pmf p = Pmf::from_weights(w);
  EXPECT_DOUBLE_EQ(p[0], 0.9);
  EXPECT_DOUBLE_EQ(p[1], 0.1);
  EXPECT_THROW(Pmf::from_weights(std::vector<double>{0, 0}), ValidationError);
}

TEST(DistortionMatrix, ValidatesEntries) {
  EXPECT_THROW(DistortionMatrix(Matrix::from_rows({{0, -1}})), ValidationError);
  EXPECT_THROW(DistortionMatrix(Matrix::from_rows({{0, INFINITY}})), ValidationError);
  const auto h = DistortionMatrix::hamming(3);
  EXPECT_EQ(h(0, 0), 0.0);
  EXPECT_EQ(h(0, 2), 1.0);
  const std::vector<double> pts{-1, 0, 2};
  const auto sq = DistortionMatrix::squared_error(pts);
  EXPECT_DOUBLE_EQ(sq(0, 2), 9.0);
}

TEST(Entropy, TrivialValues) {
  EXPECT_DOUBLE_EQ(entropy_bits(Pmf::uniform(2)), 1.0);
  EXPECT_DOUBLE_EQ(entropy_bits(Pmf({1.0, 0.0, 0.0})), 0.0);
}

TEST(Entropy, UniformTenMatchesLog2) {
  EXPECT_NEAR(entropy_bits(Pmf::uniform(10)), std::log(10.0) / std::log(2.0), 1e-12);
}

TEST(Entropy, PermutationInvariantAndBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(2 + trial % 9);
    for (double& v : w) v = u(rng);
    const Pmf p = Pmf::from_weights(w);
    auto shuffled = p.vec();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double h = entropy_bits(p);
    EXPECT_NEAR(h, entropy_bits(Pmf(shuffled)), 1e-12);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(w.size())) + 1e-12);
    EXPECT_NEAR(h, oracle::entropy(p.vec()), 1e-12);
  }
}

TEST(BinaryEntropy, Values) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), oracle::h2(0.11), 1e-14);
  EXPECT_NEAR(binary_entropy(0.11), 0.499916, 1e-6);
  EXPECT_THROW(binary_entropy(-0.1), DomainError);
  EXPECT_THROW(binary_entropy(1.1), DomainError);
}

TEST(RdBinary, Values) {
  EXPECT_DOUBLE_EQ(rd_binary(0.5, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(rd_binary(0.5, 0.5), 0.0);
  EXPECT_NEAR(rd_binary(0.5, 0.1587), 1.0 - oracle::h2(0.1587), 1e-12);
  EXPECT_NEAR(rd_binary(0.5, 0.1587), 0.369, 1e-3);
  EXPECT_EQ(rd_binary(0.3, 0.3), 0.0);
  EXPECT_EQ(rd_binary(0.3, 0.35), 0.0);
  EXPECT_NEAR(rd_binary(0.3, 0.1), oracle::h2(0.3) - oracle::h2(0.1), 1e-12);
}

TEST(RdUniformClasses, Values) {
  EXPECT_NEAR(rd_uniform_classes(10, 0.0), std::log2(10.0), 1e-12);
  EXPECT_EQ(rd_uniform_classes(10, 0.9), 0.0);
  EXPECT_EQ(rd_uniform_classes(10, 0.95), 0.0);
  EXPECT_THROW(rd_uniform_classes(1, 0.1), DomainError);
  EXPECT_NEAR(rd_uniform_classes(100, 0.26),
              std::log2(100.0) - oracle::h2(0.26) - 0.26 * std::log2(99.0), 1e-12);
}

TEST(RdUniformClasses, BinaryIsSpecialCase) {
  for (double d = 0.0; d <= 0.6; d += 0.01)
    EXPECT_NEAR(rd_uniform_classes(2, d), rd_binary(0.5, d), 1e-12) << d;
}

TEST(ClosedForms, NonincreasingAndConvex) {
  const auto check = [](auto f, double d_max) {
    const int n = 400;
    std::vector<double> r(n + 1);
    for (int i = 0; i <= n; ++i) r[i] = f(d_max * i / n);
    for (int i = 1; i <= n; ++i) EXPECT_LE(r[i], r[i - 1] + 1e-12);
    for (int i = 1; i < n; ++i) EXPECT_GE(r[i - 1] + r[i + 1] - 2 * r[i], -1e-12);
  };
  check([](double d) { return rd_binary(0.5, d); }, 0.5);
  check([](double d) { return rd_binary(0.3, d); }, 0.3);
  check([](double d) { return rd_uniform_classes(10, d); }, 0.9);
  check([](double d) { return rd_uniform_classes(100, d); }, 0.99);
}
