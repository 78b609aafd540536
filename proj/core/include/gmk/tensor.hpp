#ifndef GMK_TENSOR_HPP
#define GMK_TENSOR_HPP

#include <cstddef>
#include <vector>

#include "gmk/error.hpp"

namespace gmk {

// Dense row-major float32 tensor. Image batches are NCHW, single images CHW.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, float value);

  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int rank() const { return static_cast<int>(shape_.size()); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float& operator[](size_t i) { return data_[i]; }
  float operator[](size_t i) const { return data_[i]; }

  // NCHW accessors.
  float& at(int n, int c, int h, int w);
  float at(int n, int c, int h, int w) const;

  // CHW accessors for single images.
  float& at(int c, int h, int w);
  float at(int c, int h, int w) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  void fill(float value);
  void zero() { fill(0.0f); }

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(float k);

  // Exact elementwise equality (bit-for-bit determinism checks).
  bool equals(const Tensor& other) const;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

size_t shape_numel(const std::vector<int>& shape);

}  // namespace gmk

#endif
