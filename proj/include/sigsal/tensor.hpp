#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigsal {

using Shape = std::vector<std::size_t>;

// Dense row-major float64 array of rank 1-4.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value) { return Tensor(std::move(shape), value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const;
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Unchecked multi-index accessors; rank must match.
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }

  // Copy of channel c of a rank-3 tensor as a rank-2 tensor.
  Tensor channel(std::size_t c) const;
  Tensor reshaped(Shape shape) const;

  double min() const;
  double max() const;
  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_volume(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Throws InvalidShape unless rank is 1-4 and every extent is positive.
void validate_shape(const Shape& shape);

Tensor scaled(const Tensor& t, double alpha);
Tensor hadamard_square(const Tensor& t);

}  // namespace sigsal
