#pragma once

#include <cstddef>

#include "sigsal/tensor.hpp"

namespace sigsal {

// Rank-2 map with every value in [0,1].
class SaliencyMap {
 public:
  explicit SaliencyMap(Tensor values);

  std::size_t height() const { return values_.dim(0); }
  std::size_t width() const { return values_.dim(1); }
  const Tensor& values() const noexcept { return values_; }
  double at(std::size_t i, std::size_t j) const { return values_.at(i, j); }

  bool operator==(const SaliencyMap& other) const = default;

 private:
  Tensor values_;
};

// (x - min) / (max - min); a constant tensor maps to all zeros.
Tensor minmax_normalize(const Tensor& t);

// Bilinear resampling with half-pixel centers; source coordinates are clamped
// to the valid range so borders replicate.
Tensor resize_bilinear(const Tensor& t, std::size_t out_h, std::size_t out_w);

double cosine_similarity(const Tensor& a, const Tensor& b);

// Pearson correlation of fractional (tie-averaged) ranks.
double spearman_rank(const Tensor& a, const Tensor& b);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace sigsal
