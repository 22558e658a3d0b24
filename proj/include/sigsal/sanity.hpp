#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sigsal/micronet.hpp"
#include "sigsal/numeric.hpp"
#include "sigsal/saliency.hpp"

namespace sigsal::sanity {

enum class Mode { kCascading, kIndependent };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

struct Stage {
  std::string layer;
  bool upstream = false;  // randomized layer sits at or before the tap
  SaliencyMap map;
  double spearman_to_original = 0.0;
  double max_abs_diff = 0.0;
};

struct SanityRun {
  Mode mode = Mode::kCascading;
  std::string tap;
  std::uint64_t seed = 0;
  SaliencyMap original;
  std::vector<Stage> stages;  // output end first
};

// Signature Activation map of `tap`'s output, resized to the input grid.
SaliencyMap tapped_map(const micronet::ModelBundle& m, const Tensor& img, const std::string& tap,
                       const BilateralParams& p);

// Rank correlation that stays finite: identical maps score 1, and a constant
// map (no rank information) scores 0 against anything else.
double map_rank_agreement(const SaliencyMap& a, const SaliencyMap& b);

SanityRun run_sanity(const micronet::ModelBundle& m, const Tensor& img, const std::string& tap, Mode mode, Seed seed,
                     const BilateralParams& p = {});

// original.npy, stage_<i>_<layer>.npy, metrics.csv, run.json
void write_sanity_run(const SanityRun& run, const std::filesystem::path& dir);
std::string metrics_csv(const SanityRun& run);

}  // namespace sigsal::sanity
