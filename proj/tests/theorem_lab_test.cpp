#include <cmath>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "sigsal/errors.hpp"
#include "sigsal/spectral.hpp"
#include "sigsal/theorem_lab.hpp"

namespace sigsal::theorem {
namespace {

// Pinned from the naive-DCT oracle pipeline: 244/256 (six of the sixteen
// background coefficients flip a sign).
constexpr double kPinnedSimilarity = 0.953125;

double oracle_similarity(const Tensor& f, const Tensor& img) {
  const std::size_t n = f.size();
  const auto rf = oracle::idct1(oracle::sign(Tensor({n}, oracle::dct1(f.values()))).values());
  const auto ri = oracle::idct1(oracle::sign(Tensor({n}, oracle::dct1(img.values()))).values());
  long double dot = 0, a = 0, b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += rf[i] * ri[i];
    a += rf[i] * rf[i];
    b += ri[i] * ri[i];
  }
  return static_cast<double>(dot / std::sqrt(a * b));
}

TEST(Mixture, NoBackgroundMeansImageEqualsForeground) {
  const auto mix = sample_mixture({64, 5, 0, Seed{1}});
  EXPECT_EQ(mix.image, mix.foreground);
  std::size_t nonzero = 0;
  for (double v : mix.foreground.data()) {
    if (v != 0) {
      ++nonzero;
      EXPECT_EQ(std::abs(v), 1.0);
    }
  }
  EXPECT_EQ(nonzero, 5u);
}

TEST(Mixture, DenseRademacherForeground) {
  const auto mix = sample_mixture({40, 40, 0, Seed{2}});
  for (double v : mix.foreground.data()) EXPECT_EQ(std::abs(v), 1.0);
}

TEST(Mixture, BackgroundHasExactDctSupport) {
  const auto mix = sample_mixture({128, 4, 21, Seed{3}});
  const auto X = dct1(mix.background);
  std::size_t support = 0;
  for (double v : X.coefficients.data()) support += std::abs(v) > 1e-12 ? 1 : 0;
  EXPECT_EQ(support, 21u);
  for (std::size_t i = 0; i < 128; ++i) EXPECT_EQ(mix.image[i], mix.foreground[i] + mix.background[i]);
}

TEST(Mixture, InvalidSpecs) {
  auto code = [](SparseMixSpec s) {
    try {
      sample_mixture(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code({16, 0, 0, Seed{}}), ErrorCode::kInvalidSpec);
  EXPECT_EQ(code({16, 17, 0, Seed{}}), ErrorCode::kInvalidSpec);
  EXPECT_EQ(code({16, 2, 17, Seed{}}), ErrorCode::kInvalidSpec);
  EXPECT_FALSE((SparseMixSpec{1024, 20, 171, Seed{}}).in_theorem_regime());
  EXPECT_TRUE((SparseMixSpec{1024, 20, 170, Seed{}}).in_theorem_regime());
}

TEST(TrialSimilarity, IdentityAndNegation) {
  const auto mix = sample_mixture({100, 6, 0, Seed{4}});
  EXPECT_NEAR(trial_similarity(mix.foreground, mix.foreground), 1.0, 1e-15);
  EXPECT_NEAR(trial_similarity(mix.foreground, scaled(mix.foreground, -1.0)), -1.0, 1e-15);
}

TEST(TrialSimilarity, PinnedAgainstOraclePipeline) {
  const auto mix = sample_mixture({256, 8, 16, Seed{2024}});
  EXPECT_NEAR(oracle_similarity(mix.foreground, mix.image), kPinnedSimilarity, 1e-12);
  EXPECT_NEAR(trial_similarity(mix.foreground, mix.image), kPinnedSimilarity, 1e-12);
}

TEST(TrialSimilarity, AgreesWithOracleOnRandomMixtures) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto mix = sample_mixture({200, 7, 30, Seed{s}});
    EXPECT_NEAR(trial_similarity(mix.foreground, mix.image), oracle_similarity(mix.foreground, mix.image), 1e-12);
  }
}

TEST(TrialSimilarity, ZeroForegroundIsDegenerate) {
  EXPECT_THROW(trial_similarity(Tensor({8}), Tensor::full({8}, 1.0)), Error);
}

TEST(Estimate, NoBackgroundIsExactlyOne) {
  const auto est = estimate_bound({128, 10, 0, Seed{5}}, 25);
  EXPECT_EQ(est.trials, 25u);
  EXPECT_EQ(est.similarities.size(), 25u);
  for (double v : est.similarities) EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_NEAR(est.mean_similarity, 1.0, 1e-15);
}

TEST(Estimate, DeterministicPerSeed) {
  const auto a = estimate_bound({256, 8, 40, Seed{6}}, 30);
  const auto b = estimate_bound({256, 8, 40, Seed{6}}, 30);
  EXPECT_EQ(a.similarities, b.similarities);
  EXPECT_EQ(similarities_csv(a), similarities_csv(b));
  const auto c = estimate_bound({256, 8, 40, Seed{7}}, 30);
  EXPECT_NE(a.similarities, c.similarities);
}

TEST(Estimate, SparserBackgroundScoresHigher) {
  const auto sparse = estimate_bound({1024, 20, 32, Seed{8}}, 200);
  const auto dense = estimate_bound({1024, 20, 170, Seed{8}}, 200);
  const double margin = 3.0 * std::hypot(sparse.std_error, dense.std_error);
  EXPECT_GE(sparse.mean_similarity - dense.mean_similarity, -margin);
}

TEST(Estimate, BoundHoldsInRegime) {
  const auto est = estimate_bound({512, 10, 85, Seed{9}}, 300);
  EXPECT_GE(est.mean_similarity, 0.5);
  EXPECT_GE(est.mean_similarity - 3 * est.std_error, 0.45);
  for (double v : est.similarities) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Estimate2D, RunsAndStaysBounded) {
  const auto est = estimate_bound_2d({16, 16, 6, 20, Seed{10}}, 20);
  EXPECT_EQ(est.similarities.size(), 20u);
  EXPECT_GT(est.mean_similarity, 0.0);
  EXPECT_LE(est.mean_similarity, 1.0);
}

TEST(Summary, JsonCarriesFields) {
  const auto est = estimate_bound({64, 4, 8, Seed{11}}, 5);
  const std::string j = summary_json(est);
  for (const char* key : {"\"n\"", "\"fg_support\"", "\"bg_support\"", "\"trials\"", "\"mean\"", "\"stderr\""})
    EXPECT_NE(j.find(key), std::string::npos) << key;
}

}  // namespace
}  // namespace sigsal::theorem
