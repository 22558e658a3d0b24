#include "sigsal/wsol.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "sigsal/errors.hpp"
#include "sigsal/npy.hpp"
#include "sigsal/parallel.hpp"

namespace sigsal::wsol {

bool BBox::within(std::size_t h, std::size_t w) const {
  return valid() && x_min >= 0 && y_min >= 0 && x_max < static_cast<long>(w) && y_max < static_cast<long>(h);
}

std::vector<Component> connected_components(const Tensor& mask, Connectivity conn) {
  if (mask.rank() != 2) fail(ErrorCode::kInvalidShape, "connected_components needs a rank-2 mask");
  for (double v : mask.data())
    if (v != 0.0 && v != 1.0) fail(ErrorCode::kInvalidArgument, "mask entries must be 0 or 1");
  const long h = static_cast<long>(mask.dim(0));
  const long w = static_cast<long>(mask.dim(1));
  std::vector<char> seen(mask.size(), 0);
  std::vector<Component> out;
  std::vector<std::pair<long, long>> stack;

  for (long y0 = 0; y0 < h; ++y0) {
    for (long x0 = 0; x0 < w; ++x0) {
      const auto start = static_cast<std::size_t>(y0 * w + x0);
      if (mask[start] == 0.0 || seen[start]) continue;
      Component comp;
      comp.box = {x0, y0, x0, y0};
      seen[start] = 1;
      stack.assign(1, {y0, x0});
      while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        comp.pixels.emplace_back(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
        comp.box.x_min = std::min(comp.box.x_min, x);
        comp.box.x_max = std::max(comp.box.x_max, x);
        comp.box.y_min = std::min(comp.box.y_min, y);
        comp.box.y_max = std::max(comp.box.y_max, y);
        for (long dy = -1; dy <= 1; ++dy) {
          for (long dx = -1; dx <= 1; ++dx) {
            if ((dy == 0 && dx == 0) || (conn == Connectivity::kFour && dy != 0 && dx != 0)) continue;
            const long ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            const auto idx = static_cast<std::size_t>(ny * w + nx);
            if (mask[idx] == 0.0 || seen[idx]) continue;
            seen[idx] = 1;
            stack.emplace_back(ny, nx);
          }
        }
      }
      std::sort(comp.pixels.begin(), comp.pixels.end());
      out.push_back(std::move(comp));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
    return a.box.x_min < b.box.x_min;
  });
  return out;
}

double sweep_threshold(int step) { return static_cast<double>(step) / kThresholdSteps; }

BoxSearch boxes_from_map(const SaliencyMap& map, std::size_t target_count, Connectivity conn) {
  if (target_count == 0) fail(ErrorCode::kInvalidArgument, "target_count must be >= 1");
  const Tensor& values = map.values();
  Tensor mask(values.shape());

  BoxSearch best;
  std::vector<Component> best_components;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  bool any = false;
  for (int step = 1; step <= kThresholdSteps; ++step) {
    const double t = sweep_threshold(step);
    for (std::size_t i = 0; i < values.size(); ++i) mask[i] = values[i] >= t ? 1.0 : 0.0;
    auto comps = connected_components(mask, conn);
    if (!comps.empty()) any = true;
    const std::size_t count = comps.size();
    const std::size_t gap = count > target_count ? count - target_count : target_count - count;
    if (gap < best_gap) {
      best_gap = gap;
      best.threshold = t;
      best.component_count = count;
      best_components = std::move(comps);
    }
    if (gap == 0) break;
  }
  if (!any) fail(ErrorCode::kNoComponents, "map has no pixel >= " + std::to_string(sweep_threshold(1)));
  best.exact_count = best_gap == 0;
  for (std::size_t i = 0; i < best_components.size() && i < target_count; ++i) best.boxes.push_back(best_components[i].box);
  return best;
}

double iou(const BBox& a, const BBox& b) {
  const long ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  const long iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = static_cast<double>(ix * iy);
  const double uni = static_cast<double>(a.area() + b.area()) - inter;
  return inter / uni;
}

MatchResult match_and_score(const std::vector<BBox>& pred, const std::vector<BBox>& gt) {
  MatchResult r;
  r.ious.assign(gt.size(), 0.0);
  r.matched_pred.assign(gt.size(), -1);
  std::vector<char> pred_used(pred.size(), 0), gt_used(gt.size(), 0);
  for (std::size_t round = 0; round < std::min(pred.size(), gt.size()); ++round) {
    double best = -1.0;
    std::size_t bp = 0, bg = 0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (pred_used[p]) continue;
      for (std::size_t g = 0; g < gt.size(); ++g) {
        if (gt_used[g]) continue;
        const double v = iou(pred[p], gt[g]);
        if (v > best) {
          best = v;
          bp = p;
          bg = g;
        }
      }
    }
    pred_used[bp] = gt_used[bg] = 1;
    r.ious[bg] = best;
    r.matched_pred[bg] = static_cast<long>(bp);
  }
  r.positive = !gt.empty() && std::all_of(r.ious.begin(), r.ious.end(), [](double v) { return v > kIouPositive; });
  return r;
}

ImageResult evaluate_record(const WsolRecord& record, Connectivity conn) {
  if (record.gt_boxes.empty()) fail(ErrorCode::kInvalidArgument, record.id + ": record needs at least one gt box");
  for (const auto& b : record.gt_boxes)
    if (!b.within(record.map.height(), record.map.width()))
      fail(ErrorCode::kInvalidArgument, record.id + ": gt box outside the map");
  ImageResult r;
  r.id = record.id;
  try {
    auto search = boxes_from_map(record.map, record.gt_boxes.size(), conn);
    r.threshold = search.threshold;
    r.component_count = search.component_count;
    r.exact_count = search.exact_count;
    r.predicted = std::move(search.boxes);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoComponents) throw;
    r.no_components = true;
  }
  const auto match = match_and_score(r.predicted, record.gt_boxes);
  r.ious = match.ious;
  r.positive = match.positive;
  return r;
}

WsolReport evaluate(const std::vector<WsolRecord>& records, Connectivity conn) {
  if (records.empty()) fail(ErrorCode::kNoData, "no WSOL records");
  WsolReport report;
  report.images.resize(records.size());
  parallel_for(records.size(), [&](std::size_t i) { report.images[i] = evaluate_record(records[i], conn); });
  std::size_t negatives = 0;
  for (const auto& r : report.images) negatives += r.positive ? 0 : 1;
  report.error_rate = static_cast<double>(negatives) / static_cast<double>(records.size());
  return report;
}

std::vector<WsolRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  if (!j.contains("records") || !j["records"].is_array()) fail(ErrorCode::kFormat, "manifest needs a 'records' array");
  std::vector<WsolRecord> out;
  for (const auto& r : j["records"]) {
    if (!r.contains("id") || !r.contains("map") || !r.contains("gt")) fail(ErrorCode::kFormat, "record needs id, map, gt");
    std::filesystem::path map_path = r["map"].get<std::string>();
    if (map_path.is_relative()) map_path = path.parent_path() / map_path;
    std::vector<BBox> gt;
    for (const auto& b : r["gt"]) {
      if (!b.is_array() || b.size() != 4) fail(ErrorCode::kFormat, "gt boxes are [x_min,y_min,x_max,y_max]");
      gt.push_back({b[0].get<long>(), b[1].get<long>(), b[2].get<long>(), b[3].get<long>()});
    }
    Tensor values = read_tensor(map_path);
    if (values.rank() != 2) fail(ErrorCode::kInvalidShape, map_path.string() + ": map must be rank-2");
    out.push_back({r["id"].get<std::string>(), SaliencyMap(std::move(values)), std::move(gt)});
  }
  return out;
}

std::string report_to_json(const WsolReport& report, int indent) {
  using nlohmann::json;
  json images = json::array();
  for (const auto& r : report.images) {
    json boxes = json::array();
    for (const auto& b : r.predicted) boxes.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
    images.push_back({{"id", r.id},
                      {"threshold", r.threshold},
                      {"component_count", r.component_count},
                      {"exact_count", r.exact_count},
                      {"no_components", r.no_components},
                      {"predicted", boxes},
                      {"ious", r.ious},
                      {"positive", r.positive}});
  }
  json j{{"images", images}, {"total", report.images.size()}, {"error_rate", report.error_rate}};
  return j.dump(indent);
}

}  // namespace sigsal::wsol
