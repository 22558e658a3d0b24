#include "sigsal/spectral.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "sigsal/errors.hpp"

namespace sigsal {
namespace {

using Complex = std::complex<double>;

constexpr std::size_t kFftMinLength = 8;

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// cos(pi * m / (2N)) with m reduced modulo 4N so the argument stays small.
double half_cos(std::size_t m, std::size_t n) {
  m %= 4 * n;
  return std::cos(std::numbers::pi * static_cast<double>(m) / static_cast<double>(2 * n));
}

struct DctPlan {
  std::size_t n = 0;
  std::vector<double> scale;    // s_k
  std::vector<double> matrix;   // C[k*n + i], orthonormal, matrix path only
  std::vector<Complex> roots;   // exp(-2 pi i k / n), k < n/2, FFT path only
  std::vector<Complex> shift;   // exp(-i pi k / 2n), FFT path only
  std::vector<std::size_t> bitrev;

  bool use_fft() const { return !roots.empty(); }
};

std::shared_ptr<const DctPlan> make_plan(std::size_t n) {
  auto plan = std::make_shared<DctPlan>();
  plan->n = n;
  plan->scale.resize(n);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) plan->scale[k] = k == 0 ? s0 : sk;

  if (is_pow2(n) && n >= kFftMinLength) {
    plan->roots.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      plan->roots[k] = {std::cos(a), std::sin(a)};
    }
    plan->shift.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // exp(-i pi k / 2n) = cos(pi k / 2n) - i sin(pi k / 2n); sin x = cos(pi/2 - x).
      plan->shift[k] = {half_cos(k, n), -half_cos(4 * n + n - k, n)};
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    plan->bitrev.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      plan->bitrev[i] = r;
    }
  } else {
    plan->matrix.resize(n * n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) plan->matrix[k * n + i] = plan->scale[k] * half_cos((2 * i + 1) * k, n);
  }
  return plan;
}

std::shared_ptr<const DctPlan> plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const DctPlan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = make_plan(n);
  return slot;
}

// Iterative radix-2 FFT; inverse=true uses conjugate roots without 1/n.
void fft(std::vector<Complex>& a, const DctPlan& plan, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    if (i < plan.bitrev[i]) std::swap(a[i], a[plan.bitrev[i]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        Complex w = plan.roots[j * stride];
        if (inverse) w = std::conj(w);
        const Complex u = a[start + j];
        const Complex v = a[start + j + len / 2] * w;
        a[start + j] = u + v;
        a[start + j + len / 2] = u - v;
      }
    }
  }
}

void dct_fft(std::span<double> x, const DctPlan& plan) {
  const std::size_t n = plan.n;
  std::vector<Complex> v(n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    v[i] = x[2 * i];
    v[n - 1 - i] = x[2 * i + 1];
  }
  fft(v, plan, false);
  for (std::size_t k = 0; k < n; ++k) x[k] = plan.scale[k] * (plan.shift[k] * v[k]).real();
}

void idct_fft(std::span<double> x, const DctPlan& plan) {
  const std::size_t n = plan.n;
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = x[k] / plan.scale[k];
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tail = k == 0 ? 0.0 : y[n - k];
    v[k] = std::conj(plan.shift[k]) * Complex(y[k], -tail);
  }
  fft(v, plan, true);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    x[2 * i] = v[i].real() * inv_n;
    x[2 * i + 1] = v[n - 1 - i].real() * inv_n;
  }
}

void matrix_apply(std::span<double> x, const DctPlan& plan, bool transpose) {
  const std::size_t n = plan.n;
  std::vector<double> out(n, 0.0);
  if (!transpose) {
    for (std::size_t k = 0; k < n; ++k) {
      const double* row = &plan.matrix[k * n];
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += row[i] * x[i];
      out[k] = acc;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const double* row = &plan.matrix[k * n];
      const double coef = x[k];
      for (std::size_t i = 0; i < n; ++i) out[i] += row[i] * coef;
    }
  }
  std::copy(out.begin(), out.end(), x.begin());
}

enum class Direction { kForward, kInverse };

void transform_line(std::span<double> line, Direction dir) {
  const auto plan = plan_for(line.size());
  if (plan->use_fft()) {
    dir == Direction::kForward ? dct_fft(line, *plan) : idct_fft(line, *plan);
  } else {
    matrix_apply(line, *plan, dir == Direction::kInverse);
  }
}

void transform_rows(Tensor& t, Direction dir) {
  const std::size_t h = t.dim(0), w = t.dim(1);
  auto data = t.data();
  for (std::size_t i = 0; i < h; ++i) transform_line(data.subspan(i * w, w), dir);
}

void transform_cols(Tensor& t, Direction dir) {
  const std::size_t h = t.dim(0), w = t.dim(1);
  std::vector<double> col(h);
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < h; ++i) col[i] = t.at(i, j);
    transform_line(col, dir);
    for (std::size_t i = 0; i < h; ++i) t.at(i, j) = col[i];
  }
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.empty() || x.rank() != rank)
    fail(ErrorCode::kInvalidShape, std::string(op) + " needs a non-empty rank-" + std::to_string(rank) + " tensor, got " +
                                       shape_to_string(x.shape()));
}

void require_dct(const SpectralTensor& X) {
  if (X.basis != Basis::kDct) fail(ErrorCode::kInvalidBasis, "inverse transform needs DCT-basis coefficients");
}

}  // namespace

namespace detail {
void dct_line(std::span<double> line) { transform_line(line, Direction::kForward); }
void idct_line(std::span<double> line) { transform_line(line, Direction::kInverse); }
}  // namespace detail

SignatureTensor::SignatureTensor(Tensor signs) : signs_(std::move(signs)) {
  for (double v : signs_.data())
    if (v != -1.0 && v != 0.0 && v != 1.0) fail(ErrorCode::kInvalidArgument, "signature entries must be -1, 0 or +1");
}

SpectralTensor dct1(const Tensor& x) {
  require_rank(x, 1, "dct1");
  SpectralTensor out{x, Basis::kDct};
  detail::dct_line(out.coefficients.data());
  return out;
}

Tensor idct1(const SpectralTensor& X) {
  require_dct(X);
  require_rank(X.coefficients, 1, "idct1");
  Tensor out = X.coefficients;
  detail::idct_line(out.data());
  return out;
}

SpectralTensor dct2(const Tensor& x) {
  require_rank(x, 2, "dct2");
  SpectralTensor out{x, Basis::kDct};
  transform_rows(out.coefficients, Direction::kForward);
  transform_cols(out.coefficients, Direction::kForward);
  return out;
}

Tensor idct2(const SpectralTensor& X) {
  require_dct(X);
  require_rank(X.coefficients, 2, "idct2");
  Tensor out = X.coefficients;
  transform_cols(out, Direction::kInverse);
  transform_rows(out, Direction::kInverse);
  return out;
}

SignatureTensor sign_of(const Tensor& coefficients) {
  double peak = 0.0;
  for (double v : coefficients.data()) peak = std::max(peak, std::abs(v));
  const double zero_band = kSignZeroTolerance * peak;
  Tensor signs(coefficients.shape());
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const double v = coefficients[i];
    signs[i] = std::abs(v) <= zero_band ? 0.0 : (v > 0.0 ? 1.0 : -1.0);
  }
  return SignatureTensor(std::move(signs));
}

SignatureTensor signature(const Tensor& x) {
  if (x.rank() == 1) return sign_of(dct1(x).coefficients);
  if (x.rank() == 2) return sign_of(dct2(x).coefficients);
  fail(ErrorCode::kInvalidShape, "signature needs a rank-1 or rank-2 tensor");
}

Tensor reconstruct(const SignatureTensor& sig) {
  const SpectralTensor X{sig.signs(), Basis::kDct};
  if (sig.signs().rank() == 1) return idct1(X);
  if (sig.signs().rank() == 2) return idct2(X);
  fail(ErrorCode::kInvalidShape, "reconstruct needs a rank-1 or rank-2 signature");
}

}  // namespace sigsal
