#include "sigsal/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sigsal/errors.hpp"
#include "sigsal/parallel.hpp"
#include "sigsal/spectral.hpp"

namespace sigsal {

ActivationStack::ActivationStack(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 3) fail(ErrorCode::kInvalidShape, "activation stack must be rank-3 [S,h,w]");
  if (!values_.all_finite()) fail(ErrorCode::kInvalidArgument, "activation stack contains non-finite values");
}

void BilateralParams::validate() const {
  if (!(sigma_spatial > 0.0) || !(sigma_range > 0.0) || radius < 1)
    fail(ErrorCode::kInvalidArgument, "bilateral params need sigmas > 0 and radius >= 1");
}

Tensor bilateral_filter(const Tensor& map, const BilateralParams& p) {
  p.validate();
  if (map.rank() != 2) fail(ErrorCode::kInvalidShape, "bilateral_filter needs a rank-2 map");
  const auto h = static_cast<long>(map.dim(0));
  const auto w = static_cast<long>(map.dim(1));
  const long r = p.radius;
  const long side = 2 * r + 1;

  std::vector<double> spatial(static_cast<std::size_t>(side * side));
  const double ks = -1.0 / (2.0 * p.sigma_spatial * p.sigma_spatial);
  for (long dy = -r; dy <= r; ++dy)
    for (long dx = -r; dx <= r; ++dx)
      spatial[static_cast<std::size_t>((dy + r) * side + (dx + r))] = std::exp(ks * static_cast<double>(dy * dy + dx * dx));
  const double kr = -1.0 / (2.0 * p.sigma_range * p.sigma_range);
  const double lo = map.min(), hi = map.max();

  Tensor out(map.shape());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const double center = map.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
      double num = 0.0, den = 0.0;
      for (long qy = std::max(0L, y - r); qy <= std::min(h - 1, y + r); ++qy) {
        for (long qx = std::max(0L, x - r); qx <= std::min(w - 1, x + r); ++qx) {
          const double v = map.at(static_cast<std::size_t>(qy), static_cast<std::size_t>(qx));
          const double d = v - center;
          const double wgt = spatial[static_cast<std::size_t>((qy - y + r) * side + (qx - x + r))] * std::exp(kr * d * d);
          num += wgt * v;
          den += wgt;
        }
      }
      out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = std::clamp(num / den, lo, hi);
    }
  }
  return out;
}

Tensor suppress_background(const Tensor& img) {
  if (img.rank() != 2) fail(ErrorCode::kInvalidShape, "suppress_background needs a rank-2 image");
  return minmax_normalize(hadamard_square(reconstruct(signature(img))));
}

Tensor channel_signature_energy(const ActivationStack& acts) {
  const std::size_t channels = acts.channels();
  std::vector<Tensor> energy(channels);
  parallel_for(channels, [&](std::size_t s) { energy[s] = hadamard_square(reconstruct(signature(acts.channel(s)))); });
  // Fixed summation order keeps the result independent of the thread count.
  Tensor acc({acts.height(), acts.width()});
  for (const auto& e : energy)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += e[i];
  const double inv = 1.0 / static_cast<double>(channels);
  for (auto& v : acc.data()) v *= inv;
  return acc;
}

SaliencyMap signature_activation_map(const ActivationStack& acts, std::size_t out_h, std::size_t out_w,
                                     const BilateralParams& p) {
  p.validate();
  if (out_h == 0 || out_w == 0) fail(ErrorCode::kInvalidShape, "output dims must be >= 1");
  const Tensor energy = minmax_normalize(channel_signature_energy(acts));
  const Tensor smoothed = bilateral_filter(energy, p);
  return SaliencyMap(minmax_normalize(resize_bilinear(smoothed, out_h, out_w)));
}

std::vector<double> principal_channel_direction(const ActivationStack& acts, const PowerIterationOptions& opts) {
  const std::size_t channels = acts.channels();
  const std::size_t plane = acts.height() * acts.width();
  const auto data = acts.values().data();

  std::vector<double> gram(channels * channels, 0.0);
  for (std::size_t a = 0; a < channels; ++a) {
    for (std::size_t b = a; b < channels; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) acc += data[a * plane + i] * data[b * plane + i];
      gram[a * channels + b] = gram[b * channels + a] = acc;
    }
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < channels; ++a) trace += gram[a * channels + a];
  if (trace == 0.0) fail(ErrorCode::kDegenerateInput, "eigen_cam_map of an all-zero stack");

  auto multiply = [&](const std::vector<double>& u) {
    std::vector<double> out(channels, 0.0);
    for (std::size_t a = 0; a < channels; ++a)
      for (std::size_t b = 0; b < channels; ++b) out[a] += gram[a * channels + b] * u[b];
    return out;
  };
  auto normalize = [](std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) return false;
    for (double& x : v) x /= n;
    return true;
  };

  std::vector<double> u(channels, 1.0);
  normalize(u);
  if (auto probe = multiply(u); !normalize(probe)) {
    // Start vector is in the null space; restart from the heaviest channel.
    std::size_t best = 0;
    for (std::size_t a = 1; a < channels; ++a)
      if (gram[a * channels + a] > gram[best * channels + best]) best = a;
    std::fill(u.begin(), u.end(), 0.0);
    u[best] = 1.0;
  }
  for (int it = 0; it < opts.max_iterations; ++it) {
    auto next = multiply(u);
    if (!normalize(next)) break;
    double delta = 0.0;
    for (std::size_t a = 0; a < channels; ++a) delta = std::max(delta, std::abs(next[a] - u[a]));
    u = std::move(next);
    if (delta <= opts.tolerance) break;
  }
  const auto peak = std::max_element(u.begin(), u.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  if (*peak < 0.0)
    for (double& x : u) x = -x;
  return u;
}

SaliencyMap eigen_cam_map(const ActivationStack& acts, std::size_t out_h, std::size_t out_w,
                          const PowerIterationOptions& opts) {
  if (out_h == 0 || out_w == 0) fail(ErrorCode::kInvalidShape, "output dims must be >= 1");
  const auto u = principal_channel_direction(acts, opts);
  const std::size_t plane = acts.height() * acts.width();
  const auto data = acts.values().data();
  Tensor projection({acts.height(), acts.width()});
  for (std::size_t s = 0; s < acts.channels(); ++s)
    for (std::size_t i = 0; i < plane; ++i) projection[i] += data[s * plane + i] * u[s];
  for (auto& v : projection.data()) v = std::abs(v);
  return SaliencyMap(minmax_normalize(resize_bilinear(projection, out_h, out_w)));
}

Rgb jet_color(double v) {
  const double t = std::clamp(v, 0.0, 1.0);
  auto ramp = [t](double center) { return std::clamp(1.5 - std::abs(4.0 * t - center), 0.0, 1.0); };
  return {ramp(3.0), ramp(2.0), ramp(1.0)};
}

Tensor render_overlay(const Tensor& img, const SaliencyMap& map, double alpha) {
  if (img.rank() != 2 || img.dim(0) != map.height() || img.dim(1) != map.width())
    fail(ErrorCode::kInvalidShape, "overlay image " + shape_to_string(img.shape()) + " does not match map");
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::kInvalidArgument, "overlay alpha must lie in [0,1]");
  const std::size_t h = img.dim(0), w = img.dim(1);
  Tensor out({h, w, 3});
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double gray = std::clamp(img.at(i, j), 0.0, 1.0);
      const Rgb c = jet_color(map.at(i, j));
      out.at(i, j, 0) = std::clamp(alpha * c.r + (1.0 - alpha) * gray, 0.0, 1.0);
      out.at(i, j, 1) = std::clamp(alpha * c.g + (1.0 - alpha) * gray, 0.0, 1.0);
      out.at(i, j, 2) = std::clamp(alpha * c.b + (1.0 - alpha) * gray, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace sigsal
