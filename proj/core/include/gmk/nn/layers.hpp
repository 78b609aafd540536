#ifndef GMK_NN_LAYERS_HPP
#define GMK_NN_LAYERS_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gmk/rng.hpp"
#include "gmk/tensor.hpp"

namespace gmk::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() {
    if (grad.size() != value.size()) grad = Tensor(value.shape());
    grad.zero();
  }
};

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// im2col for [C,H,W] -> [C*k*k, OH*OW]; col2im is its adjoint.
void im2col(const float* img, int c, int h, int w, int k, int stride, int pad,
            float* cols);
void col2im(const float* cols, int c, int h, int w, int k, int stride, int pad,
            float* img);

// One power-iteration step on a 2-D weight; divides the matrix by the
// estimated largest singular value in place and returns the estimate.
// A zero matrix is left unchanged (sigma estimate 0).
struct SpectralNormState {
  Eigen::VectorXf u;
};
double spectral_normalize(MatF& weight, SpectralNormState& state);

class Conv2d {
 public:
  Conv2d(std::string name, int in_c, int out_c, int k, int stride, int pad,
         bool spectral_norm, Rng& init_rng);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& grad_out);

  std::vector<Param*> params() { return {&w_, &b_}; }
  std::vector<Param*> buffers();
  int out_h(int h) const { return (h + 2 * pad_ - k_) / stride_ + 1; }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  int in_c_, out_c_, k_, stride_, pad_;
  bool use_sn_;
  Param w_;  // [out_c, in_c, k, k]
  Param b_;  // [out_c]
  Param u_;  // spectral norm power-iteration vector, persisted
  // forward caches
  Tensor input_;
  std::vector<float> cols_;  // per-batch im2col buffer
  MatF wbar_;                // normalized weight actually applied
  Eigen::VectorXf sn_v_;
  float sn_sigma_ = 1.0f;
};

// Transposed convolution (fractionally-strided); weight [in_c, out_c, k, k].
class Deconv2d {
 public:
  Deconv2d(std::string name, int in_c, int out_c, int k, int stride, int pad,
           Rng& init_rng);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& grad_out);

  std::vector<Param*> params() { return {&w_, &b_}; }
  int out_h(int h) const { return (h - 1) * stride_ - 2 * pad_ + k_; }

 private:
  std::string name_;
  int in_c_, out_c_, k_, stride_, pad_;
  Param w_;
  Param b_;
  Tensor input_;
};

class Dense {
 public:
  Dense(std::string name, int in_dim, int out_dim, bool spectral_norm,
        Rng& init_rng);

  Tensor forward(const Tensor& x, bool train);  // x: [N, in_dim]
  Tensor backward(const Tensor& grad_out);

  std::vector<Param*> params() { return {&w_, &b_}; }
  std::vector<Param*> buffers();

 private:
  std::string name_;
  int in_dim_, out_dim_;
  bool use_sn_;
  Param w_;  // [out_dim, in_dim]
  Param b_;
  Param u_;
  Tensor input_;
  MatF wbar_;
  Eigen::VectorXf sn_v_;
  float sn_sigma_ = 1.0f;
};

// Per-channel batch normalization over [N,C,H,W]. Training uses batch
// statistics; evaluation uses frozen running averages so verification
// queries are deterministic.
class BatchNorm2d {
 public:
  BatchNorm2d(std::string name, int channels, Rng& init_rng);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& grad_out);

  std::vector<Param*> params() { return {&gamma_, &beta_}; }
  std::vector<Param*> buffers() { return {&running_mean_, &running_var_}; }

  Param& gamma() { return gamma_; }
  int channels() const { return channels_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  int channels_;
  double momentum_ = 0.9;
  double eps_ = 1e-5;
  Param gamma_, beta_;
  Param running_mean_, running_var_;
  // caches
  Tensor xhat_;
  std::vector<float> invstd_;
  bool last_train_ = true;
};

class Relu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor mask_;
};

class LeakyRelu {
 public:
  explicit LeakyRelu(float slope) : slope_(slope) {}
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

 private:
  float slope_;
  Tensor input_;
};

class Tanh {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor output_;
};

class Sigmoid {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor output_;
};

class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Param*>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

}  // namespace gmk::nn

#endif
