// sigsal: command-line front end for the Signature Activation engine.
//
// Every subcommand reads and writes files (NPY/PGM/JSON in, NPY/PGM/PPM/CSV/JSON
// out). Exit status: 0 success, 1 engine or I/O error, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "sigsal/errors.hpp"
#include "sigsal/image_io.hpp"
#include "sigsal/micronet.hpp"
#include "sigsal/npy.hpp"
#include "sigsal/saliency.hpp"
#include "sigsal/sanity.hpp"
#include "sigsal/spectral.hpp"
#include "sigsal/theorem_lab.hpp"
#include "sigsal/wsol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sigsal::cli {
namespace {

struct Common {
  bool json = false;
};

struct BilateralFlags {
  BilateralParams params;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sigma-spatial", params.sigma_spatial, "Bilateral spatial sigma (grid pixels)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--sigma-range", params.sigma_range, "Bilateral range sigma (normalized units)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--radius", params.radius, "Bilateral window radius")->check(CLI::Range(1, 1 << 20))->capture_default_str();
  }
};

void require_parent(const fs::path& out) {
  const fs::path parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) fail(ErrorCode::kIo, "output directory does not exist: " + parent.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

Tensor load_image(const fs::path& path) {
  if (path.extension() == ".npy") {
    Tensor t = read_tensor(path);
    if (t.rank() != 2) fail(ErrorCode::kInvalidShape, path.string() + ": image must be rank-2");
    return t;
  }
  return read_gray_image(path);
}

void emit(const Common& common, const json& summary) {
  if (common.json) std::cout << summary.dump() << std::endl;
}

json shape_json(const Tensor& t) { return json(t.shape()); }

// --- dct --------------------------------------------------------------------

struct DctArgs {
  std::string in, out;
  bool inverse = false;
};

void cmd_dct(const DctArgs& a, const Common& c) {
  require_parent(a.out);
  const Tensor x = read_tensor(a.in);
  Tensor y;
  if (x.rank() == 1) y = a.inverse ? idct1({x, Basis::kDct}) : dct1(x).coefficients;
  else if (x.rank() == 2) y = a.inverse ? idct2({x, Basis::kDct}) : dct2(x).coefficients;
  else fail(ErrorCode::kInvalidShape, "dct accepts rank-1 or rank-2 tensors");
  write_tensor(y, a.out);
  emit(c, {{"command", "dct"}, {"inverse", a.inverse}, {"shape", shape_json(y)}, {"out", a.out}});
}

// --- suppress ---------------------------------------------------------------

struct SuppressArgs {
  std::string image, out, pgm;
};

void cmd_suppress(const SuppressArgs& a, const Common& c) {
  require_parent(a.out);
  if (!a.pgm.empty()) require_parent(a.pgm);
  const Tensor out = suppress_background(load_image(a.image));
  write_tensor(out, a.out);
  if (!a.pgm.empty()) write_gray_image(out, a.pgm);
  emit(c, {{"command", "suppress"}, {"shape", shape_json(out)}, {"out", a.out}});
}

// --- map --------------------------------------------------------------------

struct MapArgs {
  std::string activations, out, method = "signature", pgm, image, overlay;
  std::size_t height = 0, width = 0;
  double alpha = 0.5;
  BilateralFlags bilateral;
};

void cmd_map(const MapArgs& a, const Common& c) {
  require_parent(a.out);
  if (!a.pgm.empty()) require_parent(a.pgm);
  if (!a.overlay.empty()) {
    require_parent(a.overlay);
    if (a.image.empty()) fail(ErrorCode::kInvalidArgument, "--overlay needs --image");
  }
  std::optional<Tensor> img;
  if (!a.image.empty()) img = load_image(a.image);
  std::size_t h = a.height, w = a.width;
  if (img) {
    if (h == 0) h = img->dim(0);
    if (w == 0) w = img->dim(1);
  }
  if (h == 0 || w == 0) fail(ErrorCode::kInvalidArgument, "give --height/--width or an --image to size the map");

  const ActivationStack acts(read_tensor(a.activations));
  const SaliencyMap map = a.method == "eigen" ? eigen_cam_map(acts, h, w)
                                              : signature_activation_map(acts, h, w, a.bilateral.params);
  write_tensor(map.values(), a.out);
  if (!a.pgm.empty()) write_gray_image(map.values(), a.pgm);
  if (!a.overlay.empty()) {
    const Tensor& base = *img;
    const SaliencyMap fitted = (base.dim(0) == h && base.dim(1) == w)
                                   ? map
                                   : SaliencyMap(minmax_normalize(resize_bilinear(map.values(), base.dim(0), base.dim(1))));
    write_rgb_image(render_overlay(base, fitted, a.alpha), a.overlay);
  }
  emit(c, {{"command", "map"},
           {"method", a.method},
           {"channels", acts.channels()},
           {"grid", {acts.height(), acts.width()}},
           {"shape", {h, w}},
           {"out", a.out}});
}

// --- boxes ------------------------------------------------------------------

struct BoxesArgs {
  std::string in, out;
  std::size_t target = 1;
};

void cmd_boxes(const BoxesArgs& a, const Common& c) {
  if (!a.out.empty()) require_parent(a.out);
  const SaliencyMap map(read_tensor(a.in));
  const auto result = wsol::boxes_from_map(map, a.target);
  json boxes = json::array();
  for (const auto& b : result.boxes) boxes.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
  const json j{{"command", "boxes"},
               {"threshold", result.threshold},
               {"component_count", result.component_count},
               {"exact_count", result.exact_count},
               {"boxes", boxes}};
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
  if (c.json) emit(c, j);
  else
    for (const auto& b : result.boxes) std::cout << b.x_min << ' ' << b.y_min << ' ' << b.x_max << ' ' << b.y_max << '\n';
}

// --- wsol -------------------------------------------------------------------

struct WsolArgs {
  std::string manifest, out;
  bool four_connected = false;
};

void cmd_wsol(const WsolArgs& a, const Common& c) {
  if (!a.out.empty()) require_parent(a.out);
  const auto records = wsol::load_manifest(a.manifest);
  const auto report = wsol::evaluate(records, a.four_connected ? wsol::Connectivity::kFour : wsol::Connectivity::kEight);
  if (!a.out.empty()) write_text(a.out, wsol::report_to_json(report) + "\n");
  if (c.json) emit(c, {{"command", "wsol"}, {"total", report.images.size()}, {"error_rate", report.error_rate}});
  else std::cout << "error_rate " << report.error_rate << " over " << report.images.size() << " images\n";
}

// --- sanity -----------------------------------------------------------------

struct SanityArgs {
  std::string model, image, layer = std::string(micronet::kReferenceTap), mode = "cascading", out;
  std::uint64_t seed = 0;
  std::uint64_t model_seed = 0;
  BilateralFlags bilateral;
};

micronet::ModelBundle model_or_reference(const std::string& dir, std::uint64_t model_seed) {
  return dir.empty() ? micronet::init_reference_micronet(Seed{model_seed}) : micronet::load_model(dir);
}

void cmd_sanity(const SanityArgs& a, const Common& c) {
  const auto model = model_or_reference(a.model, a.model_seed);
  const Tensor img = load_image(a.image);
  const auto run = sanity::run_sanity(model, img, a.layer, sanity::parse_mode(a.mode), Seed{a.seed}, a.bilateral.params);
  sanity::write_sanity_run(run, a.out);
  json stages = json::array();
  for (const auto& s : run.stages)
    stages.push_back({{"layer", s.layer}, {"upstream", s.upstream}, {"spearman", s.spearman_to_original},
                      {"max_abs_diff", s.max_abs_diff}});
  if (c.json) emit(c, {{"command", "sanity"}, {"mode", a.mode}, {"tap", a.layer}, {"stages", stages}, {"out", a.out}});
  else std::cout << sanity::metrics_csv(run);
}

// --- theorem ----------------------------------------------------------------

struct TheoremArgs {
  std::size_t n = 1024, fg = 20, bg = 170, trials = 1000, grid_h = 0, grid_w = 0;
  std::uint64_t seed = 0;
  std::string out = ".";
};

void cmd_theorem(const TheoremArgs& a, const Common& c) {
  fs::create_directories(a.out);
  theorem::TheoremEstimate est;
  if (a.grid_h > 0 || a.grid_w > 0) {
    if (a.grid_h == 0 || a.grid_w == 0) fail(ErrorCode::kInvalidArgument, "--grid-height and --grid-width go together");
    est = theorem::estimate_bound_2d({a.grid_h, a.grid_w, a.fg, a.bg, Seed{a.seed}}, a.trials);
  } else {
    est = theorem::estimate_bound({a.n, a.fg, a.bg, Seed{a.seed}}, a.trials);
  }
  write_text(fs::path(a.out) / "similarities.csv", theorem::similarities_csv(est));
  const std::string summary = theorem::summary_json(est);
  write_text(fs::path(a.out) / "summary.json", summary + "\n");
  if (c.json) std::cout << json::parse(summary).dump() << std::endl;
  else std::cout << "mean " << est.mean_similarity << " stderr " << est.std_error << " over " << est.trials << " trials\n";
}

// --- infer ------------------------------------------------------------------

struct InferArgs {
  std::string model, image, layer, out;
  std::uint64_t model_seed = 0;
};

void cmd_infer(const InferArgs& a, const Common& c) {
  if (!a.out.empty()) {
    require_parent(a.out);
    if (a.layer.empty()) fail(ErrorCode::kInvalidArgument, "--out needs --layer");
  }
  const auto model = model_or_reference(a.model, a.model_seed);
  const auto trace = micronet::forward(model, load_image(a.image));
  if (!a.out.empty()) write_tensor(trace.output(a.layer), a.out);
  const auto& p = trace.probabilities.values();
  if (c.json) emit(c, {{"command", "infer"}, {"probabilities", p}});
  else {
    for (std::size_t i = 0; i < p.size(); ++i) std::cout << i << ' ' << p[i] << '\n';
  }
}

// --- init-model -------------------------------------------------------------

struct InitArgs {
  std::string out;
  std::uint64_t seed = 0;
};

void cmd_init_model(const InitArgs& a, const Common& c) {
  micronet::save_model(micronet::init_reference_micronet(Seed{a.seed}), a.out);
  emit(c, {{"command", "init-model"}, {"out", a.out}, {"seed", a.seed}});
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Signature Activation saliency engine"};
  app.require_subcommand(1);
  Common common;
  std::function<void()> action;

  auto add_json = [&](CLI::App* cmd) { cmd->add_flag("--json", common.json, "Print a JSON summary on stdout"); };

  DctArgs dct;
  auto* dct_cmd = app.add_subcommand("dct", "Orthonormal DCT-II (or inverse) of a rank-1/2 NPY tensor");
  dct_cmd->add_option("--in", dct.in)->required()->check(CLI::ExistingFile);
  dct_cmd->add_option("--out", dct.out)->required();
  dct_cmd->add_flag("--inverse", dct.inverse, "Apply the inverse transform (DCT-III)");
  add_json(dct_cmd);
  dct_cmd->callback([&] { action = [&] { cmd_dct(dct, common); }; });

  SuppressArgs sup;
  auto* sup_cmd = app.add_subcommand("suppress", "Background suppression via the image signature");
  auto* sup_image = sup_cmd->add_option("--image", sup.image, "Input PGM (P5) or rank-2 NPY")->check(CLI::ExistingFile);
  sup_cmd->add_option("--in", sup.image, "Alias of --image")->check(CLI::ExistingFile)->excludes(sup_image);
  sup_cmd->add_option("--out", sup.out)->required();
  sup_cmd->add_option("--pgm", sup.pgm, "Also write the result as an 8-bit PGM");
  add_json(sup_cmd);
  sup_cmd->callback([&] {
    if (sup.image.empty()) throw CLI::RequiredError("--image");
    action = [&] { cmd_suppress(sup, common); };
  });

  MapArgs map;
  auto* map_cmd = app.add_subcommand("map", "Saliency map from an activation stack [S,h,w]");
  map_cmd->add_option("--activations", map.activations)->required()->check(CLI::ExistingFile);
  map_cmd->add_option("--out", map.out)->required();
  map_cmd->add_option("--height", map.height)->check(CLI::PositiveNumber);
  map_cmd->add_option("--width", map.width)->check(CLI::PositiveNumber);
  map_cmd->add_option("--method", map.method)->check(CLI::IsMember({"signature", "eigen"}))->capture_default_str();
  map_cmd->add_option("--image", map.image, "Source image (PGM or NPY); sizes the map and the overlay")
      ->check(CLI::ExistingFile);
  map_cmd->add_option("--overlay", map.overlay, "Write a PPM heatmap overlay");
  map_cmd->add_option("--alpha", map.alpha, "Overlay blend weight")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  map_cmd->add_option("--pgm", map.pgm, "Also write the map as an 8-bit PGM");
  map.bilateral.attach(map_cmd);
  add_json(map_cmd);
  map_cmd->callback([&] { action = [&] { cmd_map(map, common); }; });

  BoxesArgs boxes;
  auto* boxes_cmd = app.add_subcommand("boxes", "Bounding boxes from a saliency map by threshold sweep");
  boxes_cmd->add_option("--in", boxes.in)->required()->check(CLI::ExistingFile);
  boxes_cmd->add_option("--target", boxes.target, "Number of boxes wanted")->check(CLI::PositiveNumber)->capture_default_str();
  boxes_cmd->add_option("--out", boxes.out, "Write the result JSON here");
  add_json(boxes_cmd);
  boxes_cmd->callback([&] { action = [&] { cmd_boxes(boxes, common); }; });

  WsolArgs wsol_args;
  auto* wsol_cmd = app.add_subcommand("wsol", "Weakly supervised localization error rate over a manifest");
  wsol_cmd->add_option("--manifest", wsol_args.manifest)->required()->check(CLI::ExistingFile);
  wsol_cmd->add_option("--out", wsol_args.out, "Write the full report JSON here");
  wsol_cmd->add_flag("--four-connected", wsol_args.four_connected, "Use 4-connectivity for components");
  add_json(wsol_cmd);
  wsol_cmd->callback([&] { action = [&] { cmd_wsol(wsol_args, common); }; });

  SanityArgs san;
  auto* san_cmd = app.add_subcommand("sanity", "Cascading / independent randomization checks");
  san_cmd->add_option("--model", san.model, "Model directory (default: seeded reference micronet)")
      ->check(CLI::ExistingDirectory);
  san_cmd->add_option("--model-seed", san.model_seed, "Seed for the reference micronet")->capture_default_str();
  san_cmd->add_option("--image", san.image)->required()->check(CLI::ExistingFile);
  san_cmd->add_option("--layer", san.layer, "Tapped activation layer")->capture_default_str();
  san_cmd->add_option("--mode", san.mode)->check(CLI::IsMember({"cascading", "independent"}))->capture_default_str();
  san_cmd->add_option("--seed", san.seed)->capture_default_str();
  san_cmd->add_option("--out", san.out)->required();
  san.bilateral.attach(san_cmd);
  add_json(san_cmd);
  san_cmd->callback([&] { action = [&] { cmd_sanity(san, common); }; });

  TheoremArgs thm;
  auto* thm_cmd = app.add_subcommand("theorem", "Monte-Carlo estimate of signature foreground recovery");
  thm_cmd->add_option("--n", thm.n, "Signal length")->check(CLI::PositiveNumber)->capture_default_str();
  thm_cmd->add_option("--fg", thm.fg, "Foreground support size")->check(CLI::PositiveNumber)->capture_default_str();
  thm_cmd->add_option("--bg", thm.bg, "Background DCT support size")->capture_default_str();
  thm_cmd->add_option("--trials", thm.trials)->check(CLI::PositiveNumber)->capture_default_str();
  thm_cmd->add_option("--seed", thm.seed)->capture_default_str();
  thm_cmd->add_option("--grid-height", thm.grid_h, "Run the 2D variant on this grid height");
  thm_cmd->add_option("--grid-width", thm.grid_w, "Run the 2D variant on this grid width");
  thm_cmd->add_option("--out", thm.out, "Directory for similarities.csv and summary.json")->capture_default_str();
  add_json(thm_cmd);
  thm_cmd->callback([&] { action = [&] { cmd_theorem(thm, common); }; });

  InferArgs inf;
  auto* inf_cmd = app.add_subcommand("infer", "Forward pass of a micronet; optionally dump one layer");
  inf_cmd->add_option("--model", inf.model, "Model directory (default: seeded reference micronet)")
      ->check(CLI::ExistingDirectory);
  inf_cmd->add_option("--model-seed", inf.model_seed)->capture_default_str();
  inf_cmd->add_option("--image", inf.image)->required()->check(CLI::ExistingFile);
  inf_cmd->add_option("--layer", inf.layer, "Layer whose output is written to --out");
  inf_cmd->add_option("--out", inf.out);
  add_json(inf_cmd);
  inf_cmd->callback([&] { action = [&] { cmd_infer(inf, common); }; });

  InitArgs init;
  auto* init_cmd = app.add_subcommand("init-model", "Write the reference micronet with seeded weights");
  init_cmd->add_option("--out", init.out)->required();
  init_cmd->add_option("--seed", init.seed)->capture_default_str();
  add_json(init_cmd);
  init_cmd->callback([&] { action = [&] { cmd_init_model(init, common); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    action();
  } catch (const Error& e) {
    std::cerr << "sigsal: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sigsal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sigsal::cli

int main(int argc, char** argv) { return sigsal::cli::run(argc, argv); }
