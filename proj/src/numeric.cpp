#include "sigsal/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sigsal/errors.hpp"

namespace sigsal {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    fail(ErrorCode::kInvalidShape, std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                       shape_to_string(b.shape()));
}

std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

}  // namespace

SaliencyMap::SaliencyMap(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 2) fail(ErrorCode::kInvalidShape, "saliency map must be rank-2");
  for (double v : values_.data())
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::kInvalidArgument, "saliency values must lie in [0,1]");
}

Tensor minmax_normalize(const Tensor& t) {
  const double lo = t.min();
  const double hi = t.max();
  Tensor out(t.shape(), 0.0);
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  auto src = t.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp((src[i] - lo) / range, 0.0, 1.0);
  return out;
}

Tensor resize_bilinear(const Tensor& t, std::size_t out_h, std::size_t out_w) {
  if (t.rank() != 2 || t.empty()) fail(ErrorCode::kInvalidShape, "resize_bilinear needs a non-empty rank-2 tensor");
  if (out_h == 0 || out_w == 0) fail(ErrorCode::kInvalidShape, "resize_bilinear target dims must be >= 1");
  const std::size_t in_h = t.dim(0);
  const std::size_t in_w = t.dim(1);
  if (in_h == out_h && in_w == out_w) return t;

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> v(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    const double last = static_cast<double>(in - 1);
    for (std::size_t i = 0; i < out; ++i) {
      const double src = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, last);
      const auto lo = static_cast<std::size_t>(std::floor(src));
      v[i] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
    }
    return v;
  };
  const auto ty = taps(in_h, out_h);
  const auto tx = taps(in_w, out_w);
  auto lerp = [](double a, double b, double f) {
    const double v = a + f * (b - a);
    return std::clamp(v, std::min(a, b), std::max(a, b));
  };

  Tensor out({out_h, out_w});
  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t j = 0; j < out_w; ++j) {
      const double top = lerp(t.at(ty[i].lo, tx[j].lo), t.at(ty[i].lo, tx[j].hi), tx[j].frac);
      const double bot = lerp(t.at(ty[i].hi, tx[j].lo), t.at(ty[i].hi, tx[j].hi), tx[j].frac);
      out.at(i, j) = lerp(top, bot, ty[i].frac);
    }
  }
  return out;
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "cosine_similarity");
  double dot = 0.0, na = 0.0, nb = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    na += x[i] * x[i];
    nb += y[i] * y[i];
  }
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::kDegenerateInput, "cosine_similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double spearman_rank(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "spearman_rank");
  if (a.size() < 2) fail(ErrorCode::kInvalidShape, "spearman_rank needs at least 2 elements");
  const auto ra = fractional_ranks(a.data());
  const auto rb = fractional_ranks(b.data());
  const double n = static_cast<double>(ra.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) fail(ErrorCode::kDegenerateInput, "spearman_rank of a constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace sigsal
