#include "sigsal/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sigsal/errors.hpp"

namespace sigsal {

std::size_t shape_volume(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void validate_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 4)
    fail(ErrorCode::kInvalidShape, "rank must be 1-4, got shape " + shape_to_string(shape));
  for (auto d : shape)
    if (d == 0) fail(ErrorCode::kInvalidShape, "zero extent in shape " + shape_to_string(shape));
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_volume(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_volume(shape_))
    fail(ErrorCode::kInvalidShape, "data length " + std::to_string(data_.size()) +
                                       " does not match shape " + shape_to_string(shape_));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) fail(ErrorCode::kInvalidShape, "axis out of range");
  return shape_[axis];
}

Tensor Tensor::channel(std::size_t c) const {
  if (rank() != 3 || c >= shape_[0]) fail(ErrorCode::kInvalidShape, "channel() needs rank-3 and c < C");
  const std::size_t plane = shape_[1] * shape_[2];
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(c * plane),
                          data_.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane));
  return Tensor({shape_[1], shape_[2]}, std::move(out));
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

double Tensor::min() const {
  if (data_.empty()) fail(ErrorCode::kInvalidShape, "min of empty tensor");
  return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max() const {
  if (data_.empty()) fail(ErrorCode::kInvalidShape, "max of empty tensor");
  return *std::max_element(data_.begin(), data_.end());
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor scaled(const Tensor& t, double alpha) {
  Tensor out = t;
  for (auto& v : out.data()) v *= alpha;
  return out;
}

Tensor hadamard_square(const Tensor& t) {
  Tensor out = t;
  for (auto& v : out.data()) v *= v;
  return out;
}

}  // namespace sigsal
