#pragma once

#include <cstddef>

#include "sigsal/numeric.hpp"
#include "sigsal/tensor.hpp"

namespace sigsal {

// One convolutional layer's output, laid out [channels, height, width].
class ActivationStack {
 public:
  explicit ActivationStack(Tensor values);

  std::size_t channels() const { return values_.dim(0); }
  std::size_t height() const { return values_.dim(1); }
  std::size_t width() const { return values_.dim(2); }
  const Tensor& values() const noexcept { return values_; }
  Tensor channel(std::size_t c) const { return values_.channel(c); }

 private:
  Tensor values_;
};

struct BilateralParams {
  double sigma_spatial = 3.0;  // pixels on the activation grid
  double sigma_range = 0.1;    // value units after pre-normalization to [0,1]
  int radius = 6;

  void validate() const;
};

// Window of side 2*radius+1, clipped at the borders; weights are the product
// of a spatial and a range Gaussian.
Tensor bilateral_filter(const Tensor& map, const BilateralParams& p);

// minmax_normalize(IDCT(Sig(img))^2): background suppression for one image.
Tensor suppress_background(const Tensor& img);

// Mean over channels of IDCT(Sig(A_s))^2, before any filtering.
Tensor channel_signature_energy(const ActivationStack& acts);

// Channel energy -> normalize -> bilateral filter -> resize -> normalize.
SaliencyMap signature_activation_map(const ActivationStack& acts, std::size_t out_h, std::size_t out_w,
                                     const BilateralParams& p = {});

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

// Leading unit eigenvector of the channel Gram matrix V^T V (sign fixed so
// the largest-magnitude entry is positive).
std::vector<double> principal_channel_direction(const ActivationStack& acts, const PowerIterationOptions& opts = {});

// |V u| reshaped to the grid, resized, normalized.
SaliencyMap eigen_cam_map(const ActivationStack& acts, std::size_t out_h, std::size_t out_w,
                          const PowerIterationOptions& opts = {});

struct Rgb {
  double r, g, b;
};
Rgb jet_color(double v);

// alpha * jet(map) + (1 - alpha) * gray, laid out [h, w, 3].
Tensor render_overlay(const Tensor& img, const SaliencyMap& map, double alpha);

}  // namespace sigsal
