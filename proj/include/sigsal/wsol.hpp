#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sigsal/numeric.hpp"
#include "sigsal/tensor.hpp"

namespace sigsal::wsol {

// Inclusive pixel rectangle; x is the column, y the row.
struct BBox {
  long x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  long width() const { return x_max - x_min + 1; }
  long height() const { return y_max - y_min + 1; }
  long area() const { return width() * height(); }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }
  bool within(std::size_t h, std::size_t w) const;
  bool operator==(const BBox&) const = default;
};

struct Component {
  std::vector<std::pair<std::size_t, std::size_t>> pixels;  // (row, col)
  BBox box;
  std::size_t area() const { return pixels.size(); }
};

enum class Connectivity { kFour, kEight };

// Ordered by area (desc), then y_min, then x_min.
std::vector<Component> connected_components(const Tensor& mask, Connectivity conn = Connectivity::kEight);

inline constexpr int kThresholdSteps = 100;  // t = 0.01, 0.02, ..., 1.00
inline constexpr double kIouPositive = 0.5;

struct BoxSearch {
  double threshold = 0.0;
  std::size_t component_count = 0;  // components at the chosen threshold
  bool exact_count = false;         // component_count == target
  std::vector<BBox> boxes;          // at most target_count, largest first
};

double sweep_threshold(int step);

// Smallest threshold whose component count equals target_count; otherwise
// the closest count (ties to the smaller threshold), truncated to the
// target_count largest components. NoComponents if no threshold yields any.
BoxSearch boxes_from_map(const SaliencyMap& map, std::size_t target_count,
                         Connectivity conn = Connectivity::kEight);

double iou(const BBox& a, const BBox& b);

struct MatchResult {
  std::vector<double> ious;  // per ground-truth box; 0 if unmatched
  std::vector<long> matched_pred;  // per ground-truth box; -1 if unmatched
  bool positive = false;
};

// Greedy: repeatedly pair the remaining (pred, gt) with the largest IoU.
// Positive iff every gt box is matched with IoU > 0.5.
MatchResult match_and_score(const std::vector<BBox>& pred, const std::vector<BBox>& gt);

struct WsolRecord {
  std::string id;
  SaliencyMap map;
  std::vector<BBox> gt_boxes;
};

struct ImageResult {
  std::string id;
  double threshold = 0.0;
  std::size_t component_count = 0;
  bool exact_count = false;
  bool no_components = false;
  std::vector<BBox> predicted;
  std::vector<double> ious;
  bool positive = false;
};

struct WsolReport {
  std::vector<ImageResult> images;
  double error_rate = 0.0;
};

ImageResult evaluate_record(const WsolRecord& record, Connectivity conn = Connectivity::kEight);
WsolReport evaluate(const std::vector<WsolRecord>& records, Connectivity conn = Connectivity::kEight);

// Manifest: {"records": [{"id", "map": "<path.npy>", "gt": [[x0,y0,x1,y1], ...]}]}.
// Relative map paths resolve against the manifest's directory.
std::vector<WsolRecord> load_manifest(const std::filesystem::path& path);
std::string report_to_json(const WsolReport& report, int indent = 2);

}  // namespace sigsal::wsol
