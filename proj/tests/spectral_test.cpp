#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "sigsal/errors.hpp"
#include "sigsal/spectral.hpp"
#include "test_util.hpp"

namespace sigsal {
namespace {

using testing::random_normal;

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double norm(std::span<const double> a) {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

TEST(Dct1, AllOnesIsDcOnly) {
  const auto X = dct1(Tensor::full({4}, 1.0));
  EXPECT_NEAR(X.coefficients[0], 2.0, 1e-15);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(X.coefficients[k], 0.0, 1e-15);
}

TEST(Dct1, ImpulseLengthTwo) {
  const auto X = dct1(Tensor({2}, {1.0, 0.0}));
  EXPECT_NEAR(X.coefficients[0], 0.70710678118654752, 1e-15);
  EXPECT_NEAR(X.coefficients[1], 0.70710678118654752, 1e-15);
}

TEST(Dct1, MatchesNaiveOracleOnBothPaths) {
  Rng rng(Seed{101});
  for (std::size_t n : {1u, 2u, 3u, 5u, 7u, 8u, 12u, 16u, 31u, 64u, 100u, 256u}) {
    const Tensor x = random_normal({n}, rng);
    const auto fast = dct1(x);
    EXPECT_LT(max_diff(fast.coefficients.data(), oracle::dct1(x.values())), 1e-10) << "n=" << n;
    const Tensor X = random_normal({n}, rng);
    EXPECT_LT(max_diff(idct1({X, Basis::kDct}).data(), oracle::idct1(X.values())), 1e-10) << "n=" << n;
  }
}

TEST(Dct1, DcCoefficientInvertsToConstant) {
  Tensor X({16});
  X[0] = 3.0;
  const Tensor x = idct1({X, Basis::kDct});
  for (double v : x.data()) EXPECT_NEAR(v, 3.0 / 4.0, 1e-15);
}

TEST(Dct1, InversePair) {
  Rng rng(Seed{3});
  for (std::size_t n : {1u, 6u, 32u, 1000u, 1024u}) {
    const Tensor x = random_normal({n}, rng);
    EXPECT_LT(max_diff(idct1(dct1(x)).data(), x.data()), 1e-10);
  }
}

TEST(Dct1, ErrorsOnEmptyOrWrongBasis) {
  EXPECT_THROW(dct1(Tensor({2, 2})), Error);
  try {
    idct1({Tensor({4}), Basis::kSpatial});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidBasis);
  }
}

TEST(Dct2, AllOnesFourByFour) {
  const auto X = dct2(Tensor::full({4, 4}, 1.0));
  EXPECT_NEAR(X.coefficients.at(0, 0), 4.0, 1e-14);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_NEAR(X.coefficients[i], 0.0, 1e-14);
}

TEST(Dct2, ParsevalAndInverse) {
  Rng rng(Seed{7});
  const Tensor x = random_normal({32, 32}, rng);
  const auto X = dct2(x);
  EXPECT_NEAR(norm(x.data()), norm(X.coefficients.data()), 1e-10);
  EXPECT_LT(max_diff(idct2(X).data(), x.data()), 1e-10);
}

TEST(Dct2, RectangularMatchesDoubleSumOracle) {
  Rng rng(Seed{17});
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {3, 16}, {16, 5}, {1, 9}, {16, 16}}) {
    const Tensor x = random_normal({h, w}, rng);
    EXPECT_LT(max_diff(dct2(x).coefficients.data(), oracle::dct2(x).data()), 1e-9);
    EXPECT_LT(max_diff(idct2({x, Basis::kDct}).data(), oracle::idct2(x).data()), 1e-9);
  }
}

TEST(Dct2, Linearity) {
  Rng rng(Seed{19});
  const Tensor x = random_normal({12, 16}, rng);
  const Tensor y = random_normal({12, 16}, rng);
  const double a = 1.7, b = -0.3;
  Tensor combo(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) combo[i] = a * x[i] + b * y[i];
  const auto X = dct2(x), Y = dct2(y), C = dct2(combo);
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_NEAR(C.coefficients[i], a * X.coefficients[i] + b * Y.coefficients[i], 1e-10);
}

TEST(Signature, AllOnesHasOnlyDc) {
  const auto sig = signature(Tensor::full({4, 4}, 1.0));
  EXPECT_EQ(sig.signs().at(0, 0), 1.0);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_EQ(sig.signs()[i], 0.0);
}

TEST(Signature, PositiveScaleAndOddness) {
  Rng rng(Seed{23});
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = random_normal({9, 14}, rng);
    const auto s = signature(x);
    EXPECT_EQ(signature(scaled(x, 3.7)), s);
    EXPECT_EQ(signature(scaled(x, 1e6)), s);
    EXPECT_EQ(signature(scaled(x, -1.0)).signs(), scaled(s.signs(), -1.0));
    for (double v : s.signs().data()) EXPECT_TRUE(v == -1.0 || v == 0.0 || v == 1.0);
  }
}

TEST(Signature, RejectsNonSignEntries) { EXPECT_THROW(SignatureTensor(Tensor({2}, {0.5, 1.0})), Error); }

TEST(Reconstruct, ZeroAndDc) {
  EXPECT_EQ(reconstruct(SignatureTensor(Tensor({3, 5}))), Tensor({3, 5}));
  Tensor dc({4});
  dc[0] = 1.0;
  const Tensor r = reconstruct(SignatureTensor(dc));
  for (double v : r.data()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(Reconstruct, SpikeTrainPeaksOnSupport) {
  // Without background, the top-|supp| magnitudes of IDCT(Sig(f)) should sit on
  // supp(f) in nearly every draw.
  Rng rng(Seed{29});
  const std::size_t n = 256;
  int hits = 0, total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng.below(8);
    Tensor f({n});
    const auto support = rng.sample_without_replacement(n, k);
    for (auto i : support) f[i] = rng.rademacher();
    const Tensor r = reconstruct(signature(f));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return std::abs(r[a]) > std::abs(r[b]); });
    for (std::size_t i = 0; i < k; ++i) {
      hits += f[order[i]] != 0.0 ? 1 : 0;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(hits) / total, 0.95);
}

}  // namespace
}  // namespace sigsal
