#include "gmk/tensor.hpp"

#include <cstring>

namespace gmk {

size_t shape_numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    require(d >= 0, ErrorKind::InvalidArgument, "negative tensor dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0f) {}

Tensor Tensor::full(std::vector<int> shape, float value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

float& Tensor::at(int n, int c, int h, int w) {
  size_t idx = ((static_cast<size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
  return data_[idx];
}

float Tensor::at(int n, int c, int h, int w) const {
  size_t idx = ((static_cast<size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
  return data_[idx];
}

float& Tensor::at(int c, int h, int w) {
  size_t idx = (static_cast<size_t>(c) * shape_[1] + h) * shape_[2] + w;
  return data_[idx];
}

float Tensor::at(int c, int h, int w) const {
  size_t idx = (static_cast<size_t>(c) * shape_[1] + h) * shape_[2] + w;
  return data_[idx];
}

void Tensor::fill(float value) {
  for (auto& v : data_) v = value;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  require(same_shape(other), ErrorKind::ShapeMismatch, "tensor += shape mismatch");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(float k) {
  for (auto& v : data_) v *= k;
  return *this;
}

bool Tensor::equals(const Tensor& other) const {
  if (shape_ != other.shape_) return false;
  return std::memcmp(data_.data(), other.data_.data(),
                     data_.size() * sizeof(float)) == 0;
}

}  // namespace gmk
