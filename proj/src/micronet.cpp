#include "sigsal/micronet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "sigsal/errors.hpp"
#include "sigsal/npy.hpp"

namespace sigsal::micronet {
namespace {

using nlohmann::json;

struct ConvGeometry {
  std::size_t out = 0;
  std::size_t pad_before = 0;
};

ConvGeometry conv_geometry(std::size_t in, std::size_t k, std::size_t stride, Padding padding) {
  if (padding == Padding::kValid) {
    if (in < k) fail(ErrorCode::kShapeError, "valid convolution kernel larger than input");
    return {(in - k) / stride + 1, 0};
  }
  const std::size_t out = (in + stride - 1) / stride;
  const std::size_t needed = (out - 1) * stride + k;
  const std::size_t total = needed > in ? needed - in : 0;
  return {out, total / 2};
}

Shape infer_output(const LayerSpec& l, const Shape& in) {
  switch (l.kind) {
    case LayerKind::kConv2d: {
      if (in.size() != 3) fail(ErrorCode::kShapeError, l.name + ": conv2d needs a [C,h,w] input");
      const auto gy = conv_geometry(in[1], l.kernel_h, l.stride, l.padding);
      const auto gx = conv_geometry(in[2], l.kernel_w, l.stride, l.padding);
      return {l.out_channels, gy.out, gx.out};
    }
    case LayerKind::kRelu:
      return in;
    case LayerKind::kMaxPool2:
      if (in.size() != 3 || in[1] < 2 || in[2] < 2) fail(ErrorCode::kShapeError, l.name + ": maxpool2 needs [C,>=2,>=2]");
      return {in[0], in[1] / 2, in[2] / 2};
    case LayerKind::kGlobalAvgPool:
      if (in.size() != 3) fail(ErrorCode::kShapeError, l.name + ": global_avg_pool needs a [C,h,w] input");
      return {in[0]};
    case LayerKind::kDense:
      return {l.out_features};
    case LayerKind::kSoftmax:
      if (in.size() != 1) fail(ErrorCode::kShapeError, l.name + ": softmax needs a rank-1 input");
      return in;
  }
  fail(ErrorCode::kUnknownLayer, l.name);
}

Shape expected_kernel(const LayerSpec& l, const Shape& in) {
  if (l.kind == LayerKind::kConv2d) return {l.out_channels, in[0], l.kernel_h, l.kernel_w};
  return {l.out_features, shape_volume(in)};
}

double population_stddev(const Tensor& t) {
  double mean = 0.0;
  for (double v : t.data()) mean += v;
  mean /= static_cast<double>(t.size());
  double var = 0.0;
  for (double v : t.data()) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(t.size()));
}

Tensor redraw_like(const Tensor& t, Rng& rng) {
  double sigma = population_stddev(t);
  if (!(sigma > 0.0)) sigma = 0.05;
  Tensor out(t.shape());
  for (auto& v : out.data()) v = rng.normal(0.0, sigma);
  return out;
}

json layer_to_json(const LayerSpec& l) {
  json j{{"name", l.name}, {"kind", kind_name(l.kind)}};
  if (l.kind == LayerKind::kConv2d) {
    j["out_channels"] = l.out_channels;
    j["kernel"] = {l.kernel_h, l.kernel_w};
    j["stride"] = l.stride;
    j["padding"] = l.padding == Padding::kSame ? "same" : "valid";
  } else if (l.kind == LayerKind::kDense) {
    j["out_features"] = l.out_features;
  }
  return j;
}

std::size_t positive_attr(const json& j, const char* key, const std::string& layer) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() <= 0)
    fail(ErrorCode::kFormat, layer + ": attribute '" + key + "' must be a positive integer");
  return j[key].get<std::size_t>();
}

LayerSpec layer_from_json(const json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string() || !j.contains("kind") || !j["kind"].is_string())
    fail(ErrorCode::kFormat, "every layer needs string 'name' and 'kind'");
  LayerSpec l;
  l.name = j["name"].get<std::string>();
  l.kind = parse_kind(j["kind"].get<std::string>());
  if (l.kind == LayerKind::kConv2d) {
    l.out_channels = positive_attr(j, "out_channels", l.name);
    const auto& k = j.at("kernel");
    if (k.is_array() && k.size() == 2) {
      l.kernel_h = k[0].get<std::size_t>();
      l.kernel_w = k[1].get<std::size_t>();
    } else if (k.is_number_integer()) {
      l.kernel_h = l.kernel_w = k.get<std::size_t>();
    } else {
      fail(ErrorCode::kFormat, l.name + ": kernel must be [kh,kw] or an integer");
    }
    l.stride = j.contains("stride") ? positive_attr(j, "stride", l.name) : 1;
    const std::string pad = j.value("padding", "same");
    if (pad == "same") l.padding = Padding::kSame;
    else if (pad == "valid") l.padding = Padding::kValid;
    else fail(ErrorCode::kFormat, l.name + ": padding must be 'same' or 'valid'");
  } else if (l.kind == LayerKind::kDense) {
    l.out_features = positive_attr(j, "out_features", l.name);
  }
  return l;
}

}  // namespace

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2: return "maxpool2";
    case LayerKind::kGlobalAvgPool: return "global_avg_pool";
    case LayerKind::kDense: return "dense";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "?";
}

LayerKind parse_kind(std::string_view name) {
  for (auto k : {LayerKind::kConv2d, LayerKind::kRelu, LayerKind::kMaxPool2, LayerKind::kGlobalAvgPool,
                 LayerKind::kDense, LayerKind::kSoftmax})
    if (kind_name(k) == name) return k;
  fail(ErrorCode::kUnknownLayer, "unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::conv2d(std::string name, std::size_t out_channels, std::size_t kh, std::size_t kw,
                            Padding padding, std::size_t stride) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kConv2d;
  l.out_channels = out_channels;
  l.kernel_h = kh;
  l.kernel_w = kw;
  l.padding = padding;
  l.stride = stride;
  return l;
}

LayerSpec LayerSpec::dense(std::string name, std::size_t out_features) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kDense;
  l.out_features = out_features;
  return l;
}

LayerSpec LayerSpec::simple(std::string name, LayerKind kind) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = kind;
  return l;
}

ModelBundle ModelBundle::create(Shape input, std::vector<LayerSpec> layers, std::map<std::string, LayerWeights> weights) {
  ModelBundle m;
  m.input_ = std::move(input);
  m.layers_ = std::move(layers);
  m.weights_ = std::move(weights);
  m.validate();
  return m;
}

void ModelBundle::validate() {
  if (input_.size() != 3) fail(ErrorCode::kShapeError, "model input must be [c,h,w]");
  validate_shape(input_);
  if (layers_.empty()) fail(ErrorCode::kShapeError, "model has no layers");
  if (layers_.back().kind != LayerKind::kSoftmax) fail(ErrorCode::kShapeError, "model must end in a softmax layer");

  std::set<std::string> names;
  shapes_.clear();
  Shape current = input_;
  for (const auto& l : layers_) {
    if (l.name.empty() || !names.insert(l.name).second)
      fail(ErrorCode::kInvalidArgument, "layer names must be unique and non-empty: '" + l.name + "'");
    if (l.kind == LayerKind::kConv2d && (l.out_channels == 0 || l.kernel_h == 0 || l.kernel_w == 0 || l.stride == 0))
      fail(ErrorCode::kShapeError, l.name + ": conv2d attributes must be positive");
    if (l.kind == LayerKind::kDense && l.out_features == 0)
      fail(ErrorCode::kShapeError, l.name + ": dense out_features must be positive");
    if (l.parametric()) {
      const auto it = weights_.find(l.name);
      if (it == weights_.end()) fail(ErrorCode::kMissingWeight, "no weights for layer '" + l.name + "'");
      const Shape want = expected_kernel(l, current);
      if (it->second.kernel.shape() != want)
        fail(ErrorCode::kShapeError, l.name + ": kernel is " + shape_to_string(it->second.kernel.shape()) + ", expected " +
                                         shape_to_string(want));
      if (it->second.bias.shape() != Shape{want[0]})
        fail(ErrorCode::kShapeError, l.name + ": bias is " + shape_to_string(it->second.bias.shape()) + ", expected [" +
                                         std::to_string(want[0]) + "]");
    }
    current = infer_output(l, current);
    validate_shape(current);
    shapes_.push_back(current);
  }
  for (const auto& [name, w] : weights_) {
    const auto idx = find_layer(name);
    if (!idx || !layers_[*idx].parametric())
      fail(ErrorCode::kShapeError, "weights given for non-parametric or unknown layer '" + name + "'");
  }
}

const LayerWeights& ModelBundle::weights_of(const std::string& layer) const {
  const auto it = weights_.find(layer);
  if (it == weights_.end()) fail(ErrorCode::kNotParametric, "layer '" + layer + "' has no weights");
  return it->second;
}

std::optional<std::size_t> ModelBundle::find_layer(std::string_view name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i].name == name) return i;
  return std::nullopt;
}

std::size_t ModelBundle::layer_index(std::string_view name) const {
  const auto idx = find_layer(name);
  if (!idx) fail(ErrorCode::kUnknownLayer, "no layer named '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::size_t> ModelBundle::parametric_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i].parametric()) out.push_back(i);
  return out;
}

ModelBundle ModelBundle::with_weights(const std::string& layer, LayerWeights w) const {
  auto weights = weights_;
  weights.at(layer) = std::move(w);
  return create(input_, layers_, std::move(weights));
}

const Tensor& ForwardTrace::output(std::string_view layer) const {
  for (const auto& [name, t] : outputs)
    if (name == layer) return t;
  fail(ErrorCode::kUnknownLayer, "trace has no layer '" + std::string(layer) + "'");
}

Tensor conv2d(const Tensor& input, const LayerWeights& w, std::size_t stride, Padding padding) {
  const auto& ks = w.kernel.shape();
  if (input.rank() != 3 || ks.size() != 4 || ks[1] != input.dim(0) || w.bias.shape() != Shape{ks[0]})
    fail(ErrorCode::kShapeError, "conv2d input/kernel mismatch");
  const std::size_t out_c = ks[0], in_c = ks[1], kh = ks[2], kw = ks[3];
  const std::size_t h = input.dim(1), wd = input.dim(2);
  const auto gy = conv_geometry(h, kh, stride, padding);
  const auto gx = conv_geometry(wd, kw, stride, padding);

  Tensor out({out_c, gy.out, gx.out});
  const auto kernel = w.kernel.data();
  for (std::size_t o = 0; o < out_c; ++o) {
    for (std::size_t y = 0; y < gy.out; ++y) {
      for (std::size_t x = 0; x < gx.out; ++x) {
        double acc = w.bias[o];
        for (std::size_t c = 0; c < in_c; ++c) {
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const long iy = static_cast<long>(y * stride + ky) - static_cast<long>(gy.pad_before);
            if (iy < 0 || iy >= static_cast<long>(h)) continue;
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const long ix = static_cast<long>(x * stride + kx) - static_cast<long>(gx.pad_before);
              if (ix < 0 || ix >= static_cast<long>(wd)) continue;
              acc += kernel[((o * in_c + c) * kh + ky) * kw + kx] *
                     input.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (auto& v : out.data()) v = std::max(0.0, v);
  return out;
}

Tensor maxpool2(const Tensor& input) {
  if (input.rank() != 3 || input.dim(1) < 2 || input.dim(2) < 2) fail(ErrorCode::kShapeError, "maxpool2 needs [C,>=2,>=2]");
  const std::size_t c = input.dim(0), oh = input.dim(1) / 2, ow = input.dim(2) / 2;
  Tensor out({c, oh, ow});
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        out.at(k, y, x) = std::max({input.at(k, 2 * y, 2 * x), input.at(k, 2 * y, 2 * x + 1), input.at(k, 2 * y + 1, 2 * x),
                                    input.at(k, 2 * y + 1, 2 * x + 1)});
  return out;
}

Tensor global_avg_pool(const Tensor& input) {
  if (input.rank() != 3) fail(ErrorCode::kShapeError, "global_avg_pool needs [C,h,w]");
  const std::size_t c = input.dim(0), plane = input.dim(1) * input.dim(2);
  Tensor out({c});
  for (std::size_t k = 0; k < c; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += input[k * plane + i];
    out[k] = acc / static_cast<double>(plane);
  }
  return out;
}

Tensor dense(const Tensor& input, const LayerWeights& w) {
  const auto& ks = w.kernel.shape();
  if (ks.size() != 2 || ks[1] != input.size() || w.bias.shape() != Shape{ks[0]})
    fail(ErrorCode::kShapeError, "dense input/weight mismatch");
  Tensor out({ks[0]});
  for (std::size_t o = 0; o < ks[0]; ++o) {
    double acc = w.bias[o];
    for (std::size_t i = 0; i < ks[1]; ++i) acc += w.kernel[o * ks[1] + i] * input[i];
    out[o] = acc;
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 1) fail(ErrorCode::kShapeError, "softmax needs a rank-1 input");
  const double peak = logits.max();
  Tensor out(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += (out[i] = std::exp(logits[i] - peak));
  for (auto& v : out.data()) v /= total;
  return out;
}

ForwardTrace forward(const ModelBundle& m, const Tensor& img) {
  Tensor x = img.rank() == 2 ? img.reshaped({1, img.dim(0), img.dim(1)}) : img;
  if (x.shape() != m.input_shape())
    fail(ErrorCode::kShapeError, "input " + shape_to_string(img.shape()) + " does not match model input " +
                                     shape_to_string(m.input_shape()));
  ForwardTrace trace;
  trace.input = x;
  trace.outputs.reserve(m.layers().size());
  for (const auto& l : m.layers()) {
    switch (l.kind) {
      case LayerKind::kConv2d: x = conv2d(x, m.weights_of(l.name), l.stride, l.padding); break;
      case LayerKind::kRelu: x = relu(x); break;
      case LayerKind::kMaxPool2: x = maxpool2(x); break;
      case LayerKind::kGlobalAvgPool: x = global_avg_pool(x); break;
      case LayerKind::kDense: x = dense(x, m.weights_of(l.name)); break;
      case LayerKind::kSoftmax: x = softmax(x); break;
    }
    trace.outputs.emplace_back(l.name, x);
  }
  trace.probabilities = x;
  return trace;
}

ModelBundle randomize_layer(const ModelBundle& m, const std::string& name, Seed seed) {
  const std::size_t idx = m.layer_index(name);
  if (!m.layers()[idx].parametric()) fail(ErrorCode::kNotParametric, "layer '" + name + "' has no weights");
  const auto& original = m.weights_of(name);
  Rng rng(derive_seed(seed, idx));
  LayerWeights redrawn;
  redrawn.kernel = redraw_like(original.kernel, rng);
  redrawn.bias = redraw_like(original.bias, rng);
  return m.with_weights(name, std::move(redrawn));
}

ModelBundle cascading_randomize(const ModelBundle& m, const std::string& upto, Seed seed) {
  const std::size_t stop = m.layer_index(upto);
  if (!m.layers()[stop].parametric()) fail(ErrorCode::kNotParametric, "layer '" + upto + "' has no weights");
  ModelBundle out = m;
  const auto params = m.parametric_indices();
  for (auto it = params.rbegin(); it != params.rend() && *it >= stop; ++it)
    out = randomize_layer(out, m.layers()[*it].name, seed);
  return out;
}

Shape reference_input_shape() { return {1, 32, 32}; }

std::vector<LayerSpec> reference_architecture() {
  return {
      LayerSpec::conv2d("conv1", 8, 3, 3),
      LayerSpec::simple("relu1", LayerKind::kRelu),
      LayerSpec::simple("pool1", LayerKind::kMaxPool2),
      LayerSpec::conv2d("conv2", 16, 3, 3),
      LayerSpec::simple("relu2", LayerKind::kRelu),
      LayerSpec::simple("pool2", LayerKind::kMaxPool2),
      LayerSpec::simple("gap", LayerKind::kGlobalAvgPool),
      LayerSpec::dense("fc", 2),
      LayerSpec::simple("softmax", LayerKind::kSoftmax),
  };
}

ModelBundle init_random(Shape input, std::vector<LayerSpec> layers, Seed seed) {
  std::map<std::string, LayerWeights> weights;
  Shape current = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.parametric()) {
      const Shape ks = expected_kernel(l, current);
      const std::size_t fan_in = shape_volume(ks) / ks[0];
      const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
      Rng rng(derive_seed(seed, i));
      LayerWeights w{Tensor(ks), Tensor(Shape{ks[0]})};
      for (auto& v : w.kernel.data()) v = rng.normal(0.0, sigma);
      for (auto& v : w.bias.data()) v = rng.normal(0.0, 0.01);
      weights.emplace(l.name, std::move(w));
    }
    current = infer_output(l, current);
  }
  return ModelBundle::create(std::move(input), std::move(layers), std::move(weights));
}

ModelBundle init_reference_micronet(Seed seed) {
  return init_random(reference_input_shape(), reference_architecture(), seed);
}

ModelBundle load_model(const std::filesystem::path& dir) {
  const auto descriptor = dir / "model.json";
  std::ifstream in(descriptor);
  if (!in) fail(ErrorCode::kIo, "cannot open " + descriptor.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, descriptor.string() + ": " + e.what());
  }
  if (!j.contains("input") || !j["input"].is_array() || !j.contains("layers") || !j["layers"].is_array())
    fail(ErrorCode::kFormat, "model.json needs 'input' and 'layers' arrays");
  Shape input;
  for (const auto& d : j["input"]) {
    if (!d.is_number_integer() || d.get<long long>() <= 0) fail(ErrorCode::kFormat, "input dims must be positive integers");
    input.push_back(d.get<std::size_t>());
  }
  std::vector<LayerSpec> layers;
  for (const auto& lj : j["layers"]) layers.push_back(layer_from_json(lj));

  std::map<std::string, LayerWeights> weights;
  for (const auto& l : layers) {
    if (!l.parametric()) continue;
    const auto kpath = dir / (l.name + ".kernel.npy");
    const auto bpath = dir / (l.name + ".bias.npy");
    if (!std::filesystem::exists(kpath) || !std::filesystem::exists(bpath))
      fail(ErrorCode::kMissingWeight, "missing " + kpath.filename().string() + " or " + bpath.filename().string());
    weights.emplace(l.name, LayerWeights{read_tensor(kpath), read_tensor(bpath)});
  }
  return ModelBundle::create(std::move(input), std::move(layers), std::move(weights));
}

void save_model(const ModelBundle& m, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  json j;
  j["input"] = m.input_shape();
  j["layers"] = json::array();
  for (const auto& l : m.layers()) j["layers"].push_back(layer_to_json(l));
  std::ofstream out(dir / "model.json", std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + (dir / "model.json").string());
  out << j.dump(2) << '\n';
  for (const auto& [name, w] : m.weights()) {
    write_tensor(w.kernel, dir / (name + ".kernel.npy"));
    write_tensor(w.bias, dir / (name + ".bias.npy"));
  }
}

}  // namespace sigsal::micronet
