#pragma once

#include <cstddef>
#include <span>

#include "sigsal/tensor.hpp"

namespace sigsal {

enum class Basis { kSpatial, kDct };

struct SpectralTensor {
  Tensor coefficients;
  Basis basis = Basis::kDct;
};

// Entries restricted to {-1, 0, +1}.
class SignatureTensor {
 public:
  explicit SignatureTensor(Tensor signs);
  const Tensor& signs() const noexcept { return signs_; }
  bool operator==(const SignatureTensor& other) const = default;

 private:
  Tensor signs_;
};

// Orthonormal DCT-II: X_k = s_k * sum_n x_n cos(pi (2n+1) k / 2N),
// s_0 = sqrt(1/N), s_k = sqrt(2/N). Power-of-two lengths >= 8 use an FFT of
// the even/odd reordered input; other lengths use a cached basis matrix.
SpectralTensor dct1(const Tensor& x);
Tensor idct1(const SpectralTensor& X);

// Separable 2D transform: rows first, then columns. The inverse undoes the
// column pass first.
SpectralTensor dct2(const Tensor& x);
Tensor idct2(const SpectralTensor& X);

// Coefficients whose magnitude is at most this fraction of the largest
// coefficient are treated as exact zeros by signature().
inline constexpr double kSignZeroTolerance = 1e-12;

// sign(DCT(x)) for rank-1 or rank-2 inputs, with sign(0) = 0.
SignatureTensor signature(const Tensor& x);
SignatureTensor sign_of(const Tensor& coefficients);

// Inverse DCT of the sign tensor (rank matches the signature).
Tensor reconstruct(const SignatureTensor& sig);

namespace detail {
// In-place orthonormal transform of one contiguous line of length n.
void dct_line(std::span<double> line);
void idct_line(std::span<double> line);
}  // namespace detail

}  // namespace sigsal
