#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sigsal/rng.hpp"
#include "sigsal/tensor.hpp"

namespace sigsal::micronet {

enum class LayerKind { kConv2d, kRelu, kMaxPool2, kGlobalAvgPool, kDense, kSoftmax };
enum class Padding { kSame, kValid };

std::string_view kind_name(LayerKind kind);
LayerKind parse_kind(std::string_view name);  // UnknownLayer on failure

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kRelu;
  // conv2d
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  Padding padding = Padding::kSame;
  // dense
  std::size_t out_features = 0;

  bool parametric() const { return kind == LayerKind::kConv2d || kind == LayerKind::kDense; }
  bool operator==(const LayerSpec&) const = default;

  static LayerSpec conv2d(std::string name, std::size_t out_channels, std::size_t kh, std::size_t kw,
                          Padding padding = Padding::kSame, std::size_t stride = 1);
  static LayerSpec dense(std::string name, std::size_t out_features);
  static LayerSpec simple(std::string name, LayerKind kind);
};

struct LayerWeights {
  Tensor kernel;  // conv: [out,in,kh,kw]; dense: [out,in]
  Tensor bias;    // [out]
  bool operator==(const LayerWeights&) const = default;
};

// Architecture plus weights. create() checks that layer shapes compose and
// every parametric layer carries correctly shaped weights.
class ModelBundle {
 public:
  static ModelBundle create(Shape input, std::vector<LayerSpec> layers, std::map<std::string, LayerWeights> weights);

  const Shape& input_shape() const noexcept { return input_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  const std::map<std::string, LayerWeights>& weights() const noexcept { return weights_; }
  const LayerWeights& weights_of(const std::string& layer) const;
  // Output shape of every layer, in layer order.
  const std::vector<Shape>& output_shapes() const noexcept { return shapes_; }

  std::optional<std::size_t> find_layer(std::string_view name) const;
  std::size_t layer_index(std::string_view name) const;  // UnknownLayer if absent
  // Indices of parametric layers, input to output.
  std::vector<std::size_t> parametric_indices() const;

  ModelBundle with_weights(const std::string& layer, LayerWeights w) const;

  bool operator==(const ModelBundle&) const = default;

 private:
  ModelBundle() = default;
  void validate();

  Shape input_;
  std::vector<LayerSpec> layers_;
  std::map<std::string, LayerWeights> weights_;
  std::vector<Shape> shapes_;
};

struct ForwardTrace {
  Tensor input;
  std::vector<std::pair<std::string, Tensor>> outputs;  // layer order
  Tensor probabilities;

  const Tensor& output(std::string_view layer) const;
};

// Directory layout: model.json + <layer>.kernel.npy / <layer>.bias.npy.
ModelBundle load_model(const std::filesystem::path& dir);
void save_model(const ModelBundle& m, const std::filesystem::path& dir);

// Rank-2 inputs are treated as a single channel.
ForwardTrace forward(const ModelBundle& m, const Tensor& img);

// Redraws one parametric layer's kernel and bias i.i.d. N(0, sigma^2), where
// sigma is the tensor's own population standard deviation (0.05 if that is 0).
// The draw uses derive_seed(seed, layer index), so it matches the cascading
// schedule for the same layer.
ModelBundle randomize_layer(const ModelBundle& m, const std::string& name, Seed seed);

// Randomizes every parametric layer from the output end back to `upto`.
ModelBundle cascading_randomize(const ModelBundle& m, const std::string& upto, Seed seed);

// input 1x32x32 -> conv1(8,3x3,same) -> relu1 -> pool1 -> conv2(16,3x3,same)
// -> relu2 -> pool2 -> gap -> fc(2) -> softmax
Shape reference_input_shape();
std::vector<LayerSpec> reference_architecture();
inline constexpr std::string_view kReferenceTap = "conv2";
// He-normal kernels, N(0, 0.01^2) biases.
ModelBundle init_reference_micronet(Seed seed);
ModelBundle init_random(Shape input, std::vector<LayerSpec> layers, Seed seed);

// Layer primitives, exposed for testing.
Tensor conv2d(const Tensor& input, const LayerWeights& w, std::size_t stride, Padding padding);
Tensor relu(const Tensor& input);
Tensor maxpool2(const Tensor& input);
Tensor global_avg_pool(const Tensor& input);
Tensor dense(const Tensor& input, const LayerWeights& w);
Tensor softmax(const Tensor& logits);

}  // namespace sigsal::micronet
