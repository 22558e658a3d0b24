// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sigsal/micronet.hpp"
#include "sigsal/saliency.hpp"
#include "sigsal/sanity.hpp"
#include "sigsal/spectral.hpp"
#include "sigsal/theorem_lab.hpp"
#include "sigsal/wsol.hpp"
#include "test_util.hpp"

namespace {

using namespace sigsal;
using sigsal::testing::random_normal;
using sigsal::testing::random_tensor;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s  %-28s %.2fs%s\n", out.pass ? "PASS" : "FAIL", name.c_str(), secs, out.detail.str().c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sum_sq(const Tensor& t) {
  long double s = 0;
  for (double v : t.values()) s += static_cast<long double>(v) * v;
  return static_cast<double>(s);
}

void dct_correctness(Outcome& o) {
  const auto start = Clock::now();
  Rng rng(Seed{101});
  double oracle_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    if (i % 2 == 0) {
      const std::size_t n = 1 + rng.below(256);
      const Tensor x = random_tensor({n}, rng);
      oracle_err = std::max(oracle_err, max_diff(dct1(x).coefficients.values(), oracle::dct1(x.values())));
    } else {
      const std::size_t h = 1 + rng.below(16), w = 1 + rng.below(16);
      const Tensor x = random_tensor({h, w}, rng);
      oracle_err = std::max(oracle_err, max_diff(dct2(x).coefficients.values(), oracle::dct2(x).values()));
    }
  }
  double roundtrip_err = 0.0, parseval_err = 0.0;
  const std::vector<std::pair<std::size_t, std::size_t>> sizes{{1, 1},   {7, 13},   {64, 64},  {100, 37},
                                                               {128, 256}, {333, 512}, {512, 512}};
  for (auto [h, w] : sizes) {
    const Tensor x = random_tensor({h, w}, rng);
    const auto X = dct2(x);
    roundtrip_err = std::max(roundtrip_err, max_diff(idct2(X).values(), x.values()));
    parseval_err = std::max(parseval_err, std::abs(sum_sq(X.coefficients) - sum_sq(x)) / std::max(1.0, sum_sq(x)));
  }
  for (std::size_t n : {1u, 2u, 3u, 8u, 255u, 512u, 1024u}) {
    const Tensor x = random_tensor({n}, rng);
    const auto X = dct1(x);
    roundtrip_err = std::max(roundtrip_err, max_diff(idct1(X).values(), x.values()));
    parseval_err = std::max(parseval_err, std::abs(sum_sq(X.coefficients) - sum_sq(x)) / std::max(1.0, sum_sq(x)));
  }
  const double secs = seconds_since(start);
  o.detail << " oracle=" << oracle_err << " roundtrip=" << roundtrip_err << " parseval=" << parseval_err;
  o.require(oracle_err <= 1e-9, "oracle within 1e-9");
  o.require(roundtrip_err <= 1e-10, "idct(dct(x)) within 1e-10");
  o.require(parseval_err <= 1e-10, "Parseval within 1e-10");
  o.require(secs < 10.0, "runtime < 10 s");
}

void scale_invariance(Outcome& o) {
  const auto start = Clock::now();
  Rng rng(Seed{202});
  std::size_t mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t s = 1 + rng.below(8), h = 2 + rng.below(15), w = 2 + rng.below(15);
    const Tensor a = random_normal({s, h, w}, rng);
    const SaliencyMap base = signature_activation_map(ActivationStack(a), 32, 32);
    for (double alpha : {0.5, 3.7, 1e6})
      if (!(signature_activation_map(ActivationStack(scaled(a, alpha)), 32, 32) == base)) ++mismatches;
  }
  const double secs = seconds_since(start);
  o.detail << " mismatches=" << mismatches << "/300";
  o.require(mismatches == 0, "bitwise equal for every alpha");
  o.require(secs < 30.0, "runtime < 30 s");
}

void pipeline_oracle(Outcome& o) {
  Rng rng(Seed{303});
  double err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Tensor a = random_normal({4, 8, 8}, rng);
    const BilateralParams p;
    const SaliencyMap got = signature_activation_map(ActivationStack(a), 32, 32, p);
    const Tensor want = oracle::signature_map(a, 32, 32, p.sigma_spatial, p.sigma_range, p.radius);
    err = std::max(err, max_diff(got.values().values(), want.values()));
  }
  o.detail << " max_err=" << err;
  o.require(err <= 1e-9, "naive pipeline within 1e-9");
}

void theorem_bound(Outcome& o) {
  const auto start = Clock::now();
  const theorem::SparseMixSpec spec{1024, 20, 170, Seed{7}};
  const auto est = theorem::estimate_bound(spec, 1000);
  const double secs = seconds_since(start);
  o.detail << " mean=" << est.mean_similarity << " stderr=" << est.std_error
           << " lower=" << est.mean_similarity - 3 * est.std_error;
  o.require(spec.in_theorem_regime(), "bg_support <= n/6");
  o.require(est.mean_similarity - 3 * est.std_error >= 0.45, "mean - 3 stderr >= 0.45");
  o.require(est.mean_similarity >= 0.5, "mean >= 0.5");
  o.require(secs < 10.0, "runtime < 10 s");
}

void background_suppression(Outcome& o) {
  double min_ratio = INFINITY, ratio_sum = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const theorem::SparseMixSpec2D spec{32, 32, 10, 64, derive_seed(Seed{404}, i)};
    const auto mix = theorem::sample_mixture_2d(spec);
    const Tensor e = suppress_background(mix.image);
    std::vector<bool> on(e.size(), false);
    for (auto idx : mix.fg_indices) on[idx] = true;
    double in_sum = 0, out_sum = 0;
    std::size_t in_n = 0, out_n = 0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (on[k]) {
        in_sum += e[k];
        ++in_n;
      } else {
        out_sum += e[k];
        ++out_n;
      }
    }
    const double ratio = (in_sum / in_n) / (out_sum / out_n);
    min_ratio = std::min(min_ratio, ratio);
    ratio_sum += ratio;
  }
  o.detail << " min_ratio=" << min_ratio << " mean_ratio=" << ratio_sum / 50;
  o.require(min_ratio >= 2.0, "on/off-support energy ratio >= 2 on every image");
}

SaliencyMap rectangle_map(std::size_t h, std::size_t w, const wsol::BBox& b) {
  Tensor t({h, w});
  for (long y = b.y_min; y <= b.y_max; ++y)
    for (long x = b.x_min; x <= b.x_max; ++x) t.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = 1.0;
  return SaliencyMap(std::move(t));
}

void wsol_harness(Outcome& o) {
  const wsol::BBox a{0, 0, 9, 9};
  o.require(wsol::iou(a, a) == 1.0, "iou(a, a) == 1");
  o.require(wsol::iou(a, {20, 20, 25, 25}) == 0.0, "disjoint iou == 0");
  o.require(wsol::iou(a, {10, 0, 12, 9}) == 0.0, "adjacent iou == 0");
  const double partial = wsol::iou(a, {5, 5, 14, 14});
  o.require(std::abs(partial - 25.0 / 175.0) <= 1e-12, "iou == 25/175 within 1e-12");

  Rng rng(Seed{505});
  std::vector<wsol::WsolRecord> rects, noise;
  for (std::size_t i = 0; i < 10; ++i) {
    const long x0 = static_cast<long>(rng.below(20)), y0 = static_cast<long>(rng.below(20));
    const wsol::BBox b{x0, y0, x0 + 4 + static_cast<long>(rng.below(8)), y0 + 4 + static_cast<long>(rng.below(8))};
    rects.push_back({"rect" + std::to_string(i), rectangle_map(32, 32, b), {b}});
    noise.push_back({"noise" + std::to_string(i), SaliencyMap(random_tensor({32, 32}, rng, 0, 1)), {b}});
  }
  const double rect_err = wsol::evaluate(rects).error_rate;
  const double noise_err = wsol::evaluate(noise).error_rate;
  o.detail << " iou=" << partial << " rect_error=" << rect_err << " noise_error=" << noise_err;
  o.require(rect_err == 0.0, "rectangle suite error 0");
  o.require(noise_err >= 0.8, "noise suite error >= 0.8");
}

Tensor disc_image() {
  Tensor img({32, 32});
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x) {
      const double dy = y - 12.0, dx = x - 19.0;
      img.at(y, x) = 0.2 + 0.01 * x + (dy * dy + dx * dx < 25 ? 0.6 : 0.0);
    }
  return img;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void sanity_harness(Outcome& o) {
  const auto model = micronet::init_reference_micronet(Seed{606});
  const Tensor img = disc_image();
  const std::string tap(micronet::kReferenceTap);
  for (auto mode : {sanity::Mode::kCascading, sanity::Mode::kIndependent}) {
    const auto run = sanity::run_sanity(model, img, tap, mode, Seed{17});
    const std::string m(sanity::mode_name(mode));
    for (const auto& s : run.stages) {
      if (!s.upstream) o.require(s.map == run.original, m + ": downstream stage " + s.layer + " bitwise equal");
      if (s.layer == tap) {
        o.detail << " " << m << "_tap_diff=" << s.max_abs_diff;
        o.require(s.max_abs_diff > 1e-6, m + ": tap stage max_abs_diff > 1e-6");
      }
    }
  }
  sigsal::testing::ScratchDir a("accept_a"), b("accept_b");
  sanity::write_sanity_run(sanity::run_sanity(model, img, tap, sanity::Mode::kCascading, Seed{18}), a.path());
  sanity::write_sanity_run(sanity::run_sanity(model, img, tap, sanity::Mode::kCascading, Seed{18}), b.path());
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    ++files;
    const auto name = entry.path().filename();
    o.require(slurp(entry.path()) == slurp(b.path() / name), "rerun byte-identical: " + name.string());
  }
  o.detail << " files=" << files;
  o.require(files > 0, "run wrote files");
}

void micronet_ops(Outcome& o) {
  Rng rng(Seed{707});
  double conv_err = 0, dense_err = 0, soft_err = 0, prob_err = 0;
  for (int i = 0; i < 30; ++i) {
    const std::size_t c = 1 + rng.below(3), h = 3 + rng.below(8), w = 3 + rng.below(8), out = 1 + rng.below(4);
    const std::size_t kh = 1 + rng.below(std::min<std::size_t>(h, 5)), kw = 1 + rng.below(std::min<std::size_t>(w, 5));
    const std::size_t stride = 1 + rng.below(2);
    const bool same = rng.below(2) == 0;
    const Tensor in = random_normal({c, h, w}, rng);
    const micronet::LayerWeights cw{random_normal({out, c, kh, kw}, rng), random_normal({out}, rng)};
    const Tensor got = micronet::conv2d(in, cw, stride, same ? micronet::Padding::kSame : micronet::Padding::kValid);
    conv_err = std::max(conv_err, max_diff(got.values(), oracle::conv2d(in, cw.kernel, cw.bias, stride, same).values()));

    const std::size_t n = 1 + rng.below(32), m = 1 + rng.below(8);
    const Tensor x = random_normal({n}, rng);
    const micronet::LayerWeights dw{random_normal({m, n}, rng), random_normal({m}, rng)};
    dense_err = std::max(dense_err, max_diff(micronet::dense(x, dw).values(), oracle::dense(x, dw.kernel, dw.bias).values()));

    const Tensor z = random_tensor({m}, rng, -30, 30);
    soft_err = std::max(soft_err, max_diff(micronet::softmax(z).values(), oracle::softmax(z.values())));
  }
  for (int i = 0; i < 20; ++i) {
    const auto model = micronet::init_reference_micronet(derive_seed(Seed{708}, i));
    const auto shape = micronet::reference_input_shape();
    const auto trace = micronet::forward(model, random_tensor({shape[shape.size() - 2], shape.back()}, rng, 0, 1));
    double total = 0;
    for (double p : trace.probabilities.values()) total += p;
    prob_err = std::max(prob_err, std::abs(total - 1.0));
  }
  o.detail << " conv=" << conv_err << " dense=" << dense_err << " softmax=" << soft_err << " prob_sum=" << prob_err;
  o.require(conv_err <= 1e-12, "conv2d within 1e-12");
  o.require(dense_err <= 1e-12, "dense within 1e-12");
  o.require(soft_err <= 1e-12, "softmax within 1e-12");
  o.require(prob_err <= 1e-9, "probabilities sum to 1 within 1e-9");
}

}  // namespace

int main() {
  criterion("dct_correctness", dct_correctness);
  criterion("signature_scale_invariance", scale_invariance);
  criterion("pipeline_oracle_equivalence", pipeline_oracle);
  criterion("theorem_bound", theorem_bound);
  criterion("background_suppression", background_suppression);
  criterion("wsol_harness", wsol_harness);
  criterion("sanity_harness", sanity_harness);
  criterion("micronet_ops", micronet_ops);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
