#include "sigsal/theorem_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "sigsal/errors.hpp"
#include "sigsal/numeric.hpp"
#include "sigsal/parallel.hpp"
#include "sigsal/spectral.hpp"

namespace sigsal::theorem {
namespace {

double draw_foreground(Rng& rng, ForegroundLaw law) {
  return law == ForegroundLaw::kRademacher ? rng.rademacher() : 1.0;
}

// Shared by the 1D and 2D samplers; `inverse` maps sparse coefficients to b.
template <typename Inverse>
Mixture sample(const Shape& shape, std::size_t fg_support, std::size_t bg_support, Seed seed, ForegroundLaw law,
               Inverse inverse) {
  const std::size_t n = shape_volume(shape);
  Rng rng(seed);
  Mixture mix;
  mix.foreground = Tensor(shape);
  mix.fg_indices = rng.sample_without_replacement(n, fg_support);
  for (auto idx : mix.fg_indices) mix.foreground[idx] = draw_foreground(rng, law);
  std::sort(mix.fg_indices.begin(), mix.fg_indices.end());

  Tensor coefficients(shape);
  for (auto idx : rng.sample_without_replacement(n, bg_support)) {
    double v = rng.normal();
    // An exact zero would silently shrink the support.
    while (v == 0.0) v = rng.normal();
    coefficients[idx] = v;
  }
  mix.background = inverse(SpectralTensor{std::move(coefficients), Basis::kDct});
  mix.image = mix.foreground;
  for (std::size_t i = 0; i < n; ++i) mix.image[i] += mix.background[i];
  return mix;
}

TheoremEstimate summarize(TheoremEstimate est) {
  const double t = static_cast<double>(est.similarities.size());
  double sum = 0.0;
  for (double v : est.similarities) sum += v;
  est.mean_similarity = sum / t;
  if (est.similarities.size() > 1) {
    double ss = 0.0;
    for (double v : est.similarities) ss += (v - est.mean_similarity) * (v - est.mean_similarity);
    est.std_error = std::sqrt(ss / (t - 1.0)) / std::sqrt(t);
  }
  return est;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void SparseMixSpec::validate() const {
  if (n == 0) fail(ErrorCode::kInvalidSpec, "signal length must be >= 1");
  if (fg_support < 1 || fg_support > n) fail(ErrorCode::kInvalidSpec, "fg_support must lie in [1, n]");
  if (bg_support > n) fail(ErrorCode::kInvalidSpec, "bg_support must lie in [0, n]");
}

void SparseMixSpec2D::validate() const {
  const std::size_t n = height * width;
  if (n == 0) fail(ErrorCode::kInvalidSpec, "grid must be non-empty");
  if (fg_support < 1 || fg_support > n) fail(ErrorCode::kInvalidSpec, "fg_support must lie in [1, h*w]");
  if (bg_support > n) fail(ErrorCode::kInvalidSpec, "bg_support must lie in [0, h*w]");
}

Mixture sample_mixture(const SparseMixSpec& spec) {
  spec.validate();
  return sample({spec.n}, spec.fg_support, spec.bg_support, spec.seed, spec.fg_law,
                [](const SpectralTensor& x) { return idct1(x); });
}

Mixture sample_mixture_2d(const SparseMixSpec2D& spec) {
  spec.validate();
  return sample({spec.height, spec.width}, spec.fg_support, spec.bg_support, spec.seed, spec.fg_law,
                [](const SpectralTensor& x) { return idct2(x); });
}

double trial_similarity(const Tensor& foreground, const Tensor& image) {
  return cosine_similarity(reconstruct(signature(foreground)), reconstruct(signature(image)));
}

TheoremEstimate estimate_bound(const SparseMixSpec& spec, std::size_t trials) {
  spec.validate();
  if (trials == 0) fail(ErrorCode::kInvalidSpec, "trials must be >= 1");
  TheoremEstimate est;
  est.spec = spec;
  est.trials = trials;
  est.similarities.resize(trials);
  parallel_for(trials, [&](std::size_t i) {
    SparseMixSpec trial = spec;
    trial.seed = derive_seed(spec.seed, i);
    const auto mix = sample_mixture(trial);
    est.similarities[i] = trial_similarity(mix.foreground, mix.image);
  });
  return summarize(std::move(est));
}

TheoremEstimate estimate_bound_2d(const SparseMixSpec2D& spec, std::size_t trials) {
  spec.validate();
  if (trials == 0) fail(ErrorCode::kInvalidSpec, "trials must be >= 1");
  TheoremEstimate est;
  est.spec = {spec.height * spec.width, spec.fg_support, spec.bg_support, spec.seed, spec.fg_law};
  est.trials = trials;
  est.similarities.resize(trials);
  parallel_for(trials, [&](std::size_t i) {
    SparseMixSpec2D trial = spec;
    trial.seed = derive_seed(spec.seed, i);
    const auto mix = sample_mixture_2d(trial);
    est.similarities[i] = trial_similarity(mix.foreground, mix.image);
  });
  return summarize(std::move(est));
}

std::string similarities_csv(const TheoremEstimate& est) {
  std::string csv = "trial,similarity\n";
  for (std::size_t i = 0; i < est.similarities.size(); ++i)
    csv += std::to_string(i) + "," + format_double(est.similarities[i]) + "\n";
  return csv;
}

std::string summary_json(const TheoremEstimate& est, int indent) {
  nlohmann::json j{{"n", est.spec.n},
                   {"fg_support", est.spec.fg_support},
                   {"bg_support", est.spec.bg_support},
                   {"trials", est.trials},
                   {"mean", est.mean_similarity},
                   {"stderr", est.std_error},
                   {"seed", est.spec.seed.value},
                   {"in_theorem_regime", est.spec.in_theorem_regime()}};
  return j.dump(indent);
}

}  // namespace sigsal::theorem
