#include "sigsal/sanity.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "sigsal/errors.hpp"
#include "sigsal/npy.hpp"
#include "sigsal/parallel.hpp"

namespace sigsal::sanity {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_constant(const Tensor& t) { return t.min() == t.max(); }

}  // namespace

std::string_view mode_name(Mode mode) { return mode == Mode::kCascading ? "cascading" : "independent"; }

Mode parse_mode(std::string_view name) {
  if (name == "cascading") return Mode::kCascading;
  if (name == "independent") return Mode::kIndependent;
  fail(ErrorCode::kInvalidArgument, "mode must be 'cascading' or 'independent'");
}

SaliencyMap tapped_map(const micronet::ModelBundle& m, const Tensor& img, const std::string& tap,
                       const BilateralParams& p) {
  const auto trace = micronet::forward(m, img);
  const Tensor& acts = trace.output(tap);
  if (acts.rank() != 3) fail(ErrorCode::kShapeError, "tap '" + tap + "' is not a [C,h,w] activation");
  const auto& in = m.input_shape();
  return signature_activation_map(ActivationStack(acts), in[1], in[2], p);
}

double map_rank_agreement(const SaliencyMap& a, const SaliencyMap& b) {
  if (a == b) return 1.0;
  if (is_constant(a.values()) || is_constant(b.values())) return 0.0;
  return spearman_rank(a.values(), b.values());
}

SanityRun run_sanity(const micronet::ModelBundle& m, const Tensor& img, const std::string& tap, Mode mode, Seed seed,
                     const BilateralParams& p) {
  const std::size_t tap_index = m.layer_index(tap);
  SanityRun run{mode, tap, seed.value, tapped_map(m, img, tap, p), {}};

  auto params = m.parametric_indices();
  std::vector<std::size_t> order(params.rbegin(), params.rend());
  std::vector<std::optional<Stage>> stages(order.size());
  parallel_for(order.size(), [&](std::size_t i) {
    const auto& name = m.layers()[order[i]].name;
    const auto perturbed = mode == Mode::kCascading ? micronet::cascading_randomize(m, name, seed)
                                                    : micronet::randomize_layer(m, name, seed);
    auto map = tapped_map(perturbed, img, tap, p);
    const double rho = map_rank_agreement(run.original, map);
    const double diff = max_abs_diff(run.original.values(), map.values());
    stages[i] = Stage{name, order[i] <= tap_index, std::move(map), rho, diff};
  });
  for (auto& s : stages) run.stages.push_back(std::move(*s));
  return run;
}

std::string metrics_csv(const SanityRun& run) {
  std::string csv = "stage,layer,upstream_flag,spearman,max_abs_diff\n";
  for (std::size_t i = 0; i < run.stages.size(); ++i) {
    const auto& s = run.stages[i];
    csv += std::to_string(i) + "," + s.layer + "," + (s.upstream ? "1" : "0") + "," +
           format_double(s.spearman_to_original) + "," + format_double(s.max_abs_diff) + "\n";
  }
  return csv;
}

void write_sanity_run(const SanityRun& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string());
  write_tensor(run.original.values(), dir / "original.npy");
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t i = 0; i < run.stages.size(); ++i) {
    const auto& s = run.stages[i];
    const std::string file = "stage_" + std::to_string(i) + "_" + s.layer + ".npy";
    write_tensor(s.map.values(), dir / file);
    stages.push_back({{"stage", i},
                      {"layer", s.layer},
                      {"upstream", s.upstream},
                      {"map", file},
                      {"spearman", s.spearman_to_original},
                      {"max_abs_diff", s.max_abs_diff}});
  }
  {
    std::ofstream out(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write metrics.csv");
    out << metrics_csv(run);
  }
  nlohmann::json meta{{"mode", mode_name(run.mode)}, {"tap", run.tap}, {"seed", run.seed}, {"stages", stages}};
  std::ofstream out(dir / "run.json", std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write run.json");
  out << meta.dump(2) << '\n';
}

}  // namespace sigsal::sanity
