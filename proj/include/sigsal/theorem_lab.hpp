#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sigsal/rng.hpp"
#include "sigsal/tensor.hpp"

namespace sigsal::theorem {

enum class ForegroundLaw { kRademacher, kPositive };

// I = f + b with f spatially sparse and b = IDCT(x), x sparse.
struct SparseMixSpec {
  std::size_t n = 0;
  std::size_t fg_support = 0;
  std::size_t bg_support = 0;
  Seed seed{};
  ForegroundLaw fg_law = ForegroundLaw::kRademacher;

  void validate() const;  // InvalidSpec
  // Background sparsity inside the bound's hypothesis, |supp(x)| <= n/6.
  bool in_theorem_regime() const { return bg_support <= n / 6; }
};

struct Mixture {
  Tensor foreground;
  Tensor background;
  Tensor image;
  std::vector<std::size_t> fg_indices;  // sorted
};

Mixture sample_mixture(const SparseMixSpec& spec);

// cos(IDCT(Sig(f)), IDCT(Sig(I))); works for rank-1 and rank-2 inputs.
double trial_similarity(const Tensor& foreground, const Tensor& image);

struct TheoremEstimate {
  SparseMixSpec spec;
  std::size_t trials = 0;
  double mean_similarity = 0.0;
  double std_error = 0.0;
  std::vector<double> similarities;
};

// Trial i draws its mixture from derive_seed(spec.seed, i).
TheoremEstimate estimate_bound(const SparseMixSpec& spec, std::size_t trials);

// 2D analogue on an h x w grid; b = IDCT2(x).
struct SparseMixSpec2D {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t fg_support = 0;
  std::size_t bg_support = 0;
  Seed seed{};
  ForegroundLaw fg_law = ForegroundLaw::kRademacher;

  void validate() const;
};

Mixture sample_mixture_2d(const SparseMixSpec2D& spec);
TheoremEstimate estimate_bound_2d(const SparseMixSpec2D& spec, std::size_t trials);

// "trial,similarity" rows with %.17g values.
std::string similarities_csv(const TheoremEstimate& est);
// {n, fg_support, bg_support, trials, mean, stderr, seed, in_theorem_regime}
std::string summary_json(const TheoremEstimate& est, int indent = 2);

}  // namespace sigsal::theorem
