#include "gmk/nn/layers.hpp"

#include <cmath>
#include <cstring>

#include "gmk/error.hpp"

namespace gmk::nn {

namespace {

void init_gaussian(Tensor& t, Rng& rng, double mean, double std) {
  for (size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<float>(mean + std * rng.normal());
}

using VecMap = Eigen::Map<Eigen::VectorXf>;
using CVecMap = Eigen::Map<const Eigen::VectorXf>;
using MatMap = Eigen::Map<MatF>;
using CMatMap = Eigen::Map<const MatF>;

}  // namespace

void im2col(const float* img, int c, int h, int w, int k, int stride, int pad,
            float* cols) {
  int oh = (h + 2 * pad - k) / stride + 1;
  int ow = (w + 2 * pad - k) / stride + 1;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* dst = cols + ((static_cast<size_t>(ch) * k + ky) * k + kx) *
                                (static_cast<size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            std::memset(dst + static_cast<size_t>(oy) * ow, 0,
                        sizeof(float) * static_cast<size_t>(ow));
            continue;
          }
          const float* src = img + (static_cast<size_t>(ch) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            int ix = ox * stride - pad + kx;
            dst[static_cast<size_t>(oy) * ow + ox] =
                (ix < 0 || ix >= w) ? 0.0f : src[ix];
          }
        }
      }
    }
  }
}

void col2im(const float* cols, int c, int h, int w, int k, int stride, int pad,
            float* img) {
  int oh = (h + 2 * pad - k) / stride + 1;
  int ow = (w + 2 * pad - k) / stride + 1;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* src = cols + ((static_cast<size_t>(ch) * k + ky) * k + kx) *
                                      (static_cast<size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          float* dst = img + (static_cast<size_t>(ch) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[static_cast<size_t>(oy) * ow + ox];
          }
        }
      }
    }
  }
}

double spectral_normalize(MatF& weight, SpectralNormState& state) {
  if (weight.size() == 0) return 0.0;
  if (state.u.size() != weight.rows()) {
    state.u = Eigen::VectorXf::Ones(weight.rows()).normalized();
  }
  Eigen::VectorXf v = weight.transpose() * state.u;
  float vn = v.norm();
  if (vn == 0.0f) return 0.0;  // zero matrix: leave unchanged
  v /= vn;
  Eigen::VectorXf u = weight * v;
  float un = u.norm();
  if (un == 0.0f) return 0.0;
  u /= un;
  state.u = u;
  double sigma = u.dot(weight * v);
  if (sigma > 0.0) weight /= static_cast<float>(sigma);
  return sigma;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, int in_c, int out_c, int k, int stride,
               int pad, bool spectral_norm, Rng& init_rng)
    : name_(std::move(name)),
      in_c_(in_c),
      out_c_(out_c),
      k_(k),
      stride_(stride),
      pad_(pad),
      use_sn_(spectral_norm) {
  require(in_c > 0 && out_c > 0 && k > 0 && stride > 0 && pad >= 0,
          ErrorKind::InvalidArgument, "Conv2d: bad configuration");
  w_.name = name_ + ".w";
  w_.value = Tensor({out_c, in_c, k, k});
  init_gaussian(w_.value, init_rng, 0.0, 0.02);
  b_.name = name_ + ".b";
  b_.value = Tensor({out_c});
  u_.name = name_ + ".u";
  u_.value = Tensor({out_c});
  float inv = 1.0f / std::sqrt(static_cast<float>(out_c));
  for (int i = 0; i < out_c; ++i) u_.value[static_cast<size_t>(i)] = inv;
}

std::vector<Param*> Conv2d::buffers() {
  return use_sn_ ? std::vector<Param*>{&u_} : std::vector<Param*>{};
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
  require(x.rank() == 4 && x.dim(1) == in_c_, ErrorKind::ShapeMismatch,
          name_ + ": bad input shape");
  input_ = x;
  int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  int oh = out_h(h), ow = out_h(w);
  int kdim = in_c_ * k_ * k_;

  CMatMap wfull(w_.value.data(), out_c_, kdim);
  wbar_ = wfull;
  if (use_sn_) {
    SpectralNormState st;
    st.u = CVecMap(u_.value.data(), out_c_);
    double sigma = spectral_normalize(wbar_, st);
    sn_sigma_ = sigma > 0.0 ? static_cast<float>(sigma) : 1.0f;
    sn_v_ = wbar_.transpose() * st.u * sn_sigma_;  // v before normalization of wbar
    float vn = sn_v_.norm();
    if (vn > 0) sn_v_ /= vn;
    if (train) VecMap(u_.value.data(), out_c_) = st.u;
  }

  Tensor y({n, out_c_, oh, ow});
  cols_.assign(static_cast<size_t>(kdim) * oh * ow, 0.0f);
  size_t in_stride = static_cast<size_t>(in_c_) * h * w;
  size_t out_stride = static_cast<size_t>(out_c_) * oh * ow;
  for (int s = 0; s < n; ++s) {
    im2col(x.data() + s * in_stride, in_c_, h, w, k_, stride_, pad_,
           cols_.data());
    CMatMap cols(cols_.data(), kdim, static_cast<Eigen::Index>(oh) * ow);
    MatMap ymat(y.data() + s * out_stride, out_c_,
                static_cast<Eigen::Index>(oh) * ow);
    ymat.noalias() = wbar_ * cols;
    for (int oc = 0; oc < out_c_; ++oc)
      ymat.row(oc).array() += b_.value[static_cast<size_t>(oc)];
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  int n = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
  int oh = out_h(h), ow = out_h(w);
  int kdim = in_c_ * k_ * k_;
  require(grad_out.dim(0) == n && grad_out.dim(1) == out_c_ &&
              grad_out.dim(2) == oh && grad_out.dim(3) == ow,
          ErrorKind::ShapeMismatch, name_ + ": bad grad shape");

  if (w_.grad.size() != w_.value.size()) w_.zero_grad();
  if (b_.grad.size() != b_.value.size()) b_.zero_grad();

  MatF gw = MatF::Zero(out_c_, kdim);
  Tensor gx({n, in_c_, h, w});
  size_t in_stride = static_cast<size_t>(in_c_) * h * w;
  size_t out_stride = static_cast<size_t>(out_c_) * oh * ow;
  std::vector<float> gcols(static_cast<size_t>(kdim) * oh * ow);
  for (int s = 0; s < n; ++s) {
    CMatMap gymat(grad_out.data() + s * out_stride, out_c_,
                  static_cast<Eigen::Index>(oh) * ow);
    im2col(input_.data() + s * in_stride, in_c_, h, w, k_, stride_, pad_,
           cols_.data());
    CMatMap cols(cols_.data(), kdim, static_cast<Eigen::Index>(oh) * ow);
    gw.noalias() += gymat * cols.transpose();
    for (int oc = 0; oc < out_c_; ++oc)
      b_.grad[static_cast<size_t>(oc)] += gymat.row(oc).sum();
    MatMap gcmat(gcols.data(), kdim, static_cast<Eigen::Index>(oh) * ow);
    gcmat.noalias() = wbar_.transpose() * gymat;
    col2im(gcols.data(), in_c_, h, w, k_, stride_, pad_,
           gx.data() + s * in_stride);
  }

  MatMap wg(w_.grad.data(), out_c_, kdim);
  if (use_sn_) {
    // d(W/sigma)/dW with u, v treated as constants
    CVecMap u(u_.value.data(), out_c_);
    float inner = (gw.array() * wbar_.array()).sum();
    wg.noalias() += (gw - inner * (u * sn_v_.transpose())) / sn_sigma_;
  } else {
    wg.noalias() += gw;
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Deconv2d

Deconv2d::Deconv2d(std::string name, int in_c, int out_c, int k, int stride,
                   int pad, Rng& init_rng)
    : name_(std::move(name)),
      in_c_(in_c),
      out_c_(out_c),
      k_(k),
      stride_(stride),
      pad_(pad) {
  w_.name = name_ + ".w";
  w_.value = Tensor({in_c, out_c, k, k});
  init_gaussian(w_.value, init_rng, 0.0, 0.02);
  b_.name = name_ + ".b";
  b_.value = Tensor({out_c});
}

Tensor Deconv2d::forward(const Tensor& x, bool /*train*/) {
  require(x.rank() == 4 && x.dim(1) == in_c_, ErrorKind::ShapeMismatch,
          name_ + ": bad input shape");
  input_ = x;
  int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  int oh = out_h(h), ow = out_h(w);
  int kdim = out_c_ * k_ * k_;

  CMatMap wmat(w_.value.data(), in_c_, kdim);
  Tensor y({n, out_c_, oh, ow});
  std::vector<float> cols(static_cast<size_t>(kdim) * h * w);
  size_t in_stride = static_cast<size_t>(in_c_) * h * w;
  size_t out_stride = static_cast<size_t>(out_c_) * oh * ow;
  for (int s = 0; s < n; ++s) {
    CMatMap xmat(x.data() + s * in_stride, in_c_,
                 static_cast<Eigen::Index>(h) * w);
    MatMap cmat(cols.data(), kdim, static_cast<Eigen::Index>(h) * w);
    cmat.noalias() = wmat.transpose() * xmat;
    float* out = y.data() + s * out_stride;
    col2im(cols.data(), out_c_, oh, ow, k_, stride_, pad_, out);
    for (int oc = 0; oc < out_c_; ++oc) {
      float bias = b_.value[static_cast<size_t>(oc)];
      float* plane = out + static_cast<size_t>(oc) * oh * ow;
      for (int i = 0; i < oh * ow; ++i) plane[i] += bias;
    }
  }
  return y;
}

Tensor Deconv2d::backward(const Tensor& grad_out) {
  int n = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
  int oh = out_h(h), ow = out_h(w);
  int kdim = out_c_ * k_ * k_;
  require(grad_out.dim(0) == n && grad_out.dim(1) == out_c_ &&
              grad_out.dim(2) == oh && grad_out.dim(3) == ow,
          ErrorKind::ShapeMismatch, name_ + ": bad grad shape");

  if (w_.grad.size() != w_.value.size()) w_.zero_grad();
  if (b_.grad.size() != b_.value.size()) b_.zero_grad();

  CMatMap wmat(w_.value.data(), in_c_, kdim);
  MatMap wg(w_.grad.data(), in_c_, kdim);
  Tensor gx({n, in_c_, h, w});
  std::vector<float> gcols(static_cast<size_t>(kdim) * h * w);
  size_t in_stride = static_cast<size_t>(in_c_) * h * w;
  size_t out_stride = static_cast<size_t>(out_c_) * oh * ow;
  for (int s = 0; s < n; ++s) {
    const float* go = grad_out.data() + s * out_stride;
    im2col(go, out_c_, oh, ow, k_, stride_, pad_, gcols.data());
    CMatMap gcmat(gcols.data(), kdim, static_cast<Eigen::Index>(h) * w);
    CMatMap xmat(input_.data() + s * in_stride, in_c_,
                 static_cast<Eigen::Index>(h) * w);
    MatMap gxmat(gx.data() + s * in_stride, in_c_,
                 static_cast<Eigen::Index>(h) * w);
    gxmat.noalias() = wmat * gcmat;
    wg.noalias() += xmat * gcmat.transpose();
    for (int oc = 0; oc < out_c_; ++oc) {
      const float* plane = go + static_cast<size_t>(oc) * oh * ow;
      float acc = 0.0f;
      for (int i = 0; i < oh * ow; ++i) acc += plane[i];
      b_.grad[static_cast<size_t>(oc)] += acc;
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string name, int in_dim, int out_dim, bool spectral_norm,
             Rng& init_rng)
    : name_(std::move(name)),
      in_dim_(in_dim),
      out_dim_(out_dim),
      use_sn_(spectral_norm) {
  w_.name = name_ + ".w";
  w_.value = Tensor({out_dim, in_dim});
  init_gaussian(w_.value, init_rng, 0.0, 0.02);
  b_.name = name_ + ".b";
  b_.value = Tensor({out_dim});
  u_.name = name_ + ".u";
  u_.value = Tensor({out_dim});
  float inv = 1.0f / std::sqrt(static_cast<float>(out_dim));
  for (int i = 0; i < out_dim; ++i) u_.value[static_cast<size_t>(i)] = inv;
}

std::vector<Param*> Dense::buffers() {
  return use_sn_ ? std::vector<Param*>{&u_} : std::vector<Param*>{};
}

Tensor Dense::forward(const Tensor& x, bool train) {
  require(x.rank() == 2 && x.dim(1) == in_dim_, ErrorKind::ShapeMismatch,
          name_ + ": bad input shape");
  input_ = x;
  int n = x.dim(0);

  CMatMap wfull(w_.value.data(), out_dim_, in_dim_);
  wbar_ = wfull;
  if (use_sn_) {
    SpectralNormState st;
    st.u = CVecMap(u_.value.data(), out_dim_);
    double sigma = spectral_normalize(wbar_, st);
    sn_sigma_ = sigma > 0.0 ? static_cast<float>(sigma) : 1.0f;
    sn_v_ = wbar_.transpose() * st.u * sn_sigma_;
    float vn = sn_v_.norm();
    if (vn > 0) sn_v_ /= vn;
    if (train) VecMap(u_.value.data(), out_dim_) = st.u;
  }

  Tensor y({n, out_dim_});
  CMatMap xmat(x.data(), n, in_dim_);
  MatMap ymat(y.data(), n, out_dim_);
  ymat.noalias() = xmat * wbar_.transpose();
  for (int i = 0; i < out_dim_; ++i)
    ymat.col(i).array() += b_.value[static_cast<size_t>(i)];
  return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
  int n = input_.dim(0);
  require(grad_out.rank() == 2 && grad_out.dim(0) == n &&
              grad_out.dim(1) == out_dim_,
          ErrorKind::ShapeMismatch, name_ + ": bad grad shape");
  if (w_.grad.size() != w_.value.size()) w_.zero_grad();
  if (b_.grad.size() != b_.value.size()) b_.zero_grad();

  CMatMap gymat(grad_out.data(), n, out_dim_);
  CMatMap xmat(input_.data(), n, in_dim_);
  MatF gw = gymat.transpose() * xmat;
  for (int i = 0; i < out_dim_; ++i)
    b_.grad[static_cast<size_t>(i)] += gymat.col(i).sum();

  MatMap wg(w_.grad.data(), out_dim_, in_dim_);
  if (use_sn_) {
    CVecMap u(u_.value.data(), out_dim_);
    float inner = (gw.array() * wbar_.array()).sum();
    wg.noalias() += (gw - inner * (u * sn_v_.transpose())) / sn_sigma_;
  } else {
    wg.noalias() += gw;
  }

  Tensor gx({n, in_dim_});
  MatMap gxmat(gx.data(), n, in_dim_);
  gxmat.noalias() = gymat * wbar_;
  return gx;
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(std::string name, int channels, Rng& init_rng)
    : name_(std::move(name)), channels_(channels) {
  gamma_.name = name_ + ".gamma";
  gamma_.value = Tensor({channels});
  init_gaussian(gamma_.value, init_rng, 0.5, 0.02);
  beta_.name = name_ + ".beta";
  beta_.value = Tensor({channels});
  running_mean_.name = name_ + ".running_mean";
  running_mean_.value = Tensor({channels});
  running_var_.name = name_ + ".running_var";
  running_var_.value = Tensor::full({channels}, 1.0f);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  require(x.rank() == 4 && x.dim(1) == channels_, ErrorKind::ShapeMismatch,
          name_ + ": bad input shape");
  last_train_ = train;
  int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  size_t plane = static_cast<size_t>(h) * w;
  size_t cstride = static_cast<size_t>(channels_) * plane;
  double count = static_cast<double>(n) * plane;

  xhat_ = Tensor(x.shape());
  invstd_.assign(static_cast<size_t>(channels_), 0.0f);
  Tensor y(x.shape());

  for (int c = 0; c < channels_; ++c) {
    double mean, var;
    if (train) {
      double sum = 0.0, sq = 0.0;
      for (int s = 0; s < n; ++s) {
        const float* p = x.data() + s * cstride + c * plane;
        for (size_t i = 0; i < plane; ++i) {
          sum += p[i];
          sq += static_cast<double>(p[i]) * p[i];
        }
      }
      mean = sum / count;
      var = sq / count - mean * mean;
      if (var < 0) var = 0;
      running_mean_.value[static_cast<size_t>(c)] = static_cast<float>(
          momentum_ * running_mean_.value[static_cast<size_t>(c)] +
          (1.0 - momentum_) * mean);
      running_var_.value[static_cast<size_t>(c)] = static_cast<float>(
          momentum_ * running_var_.value[static_cast<size_t>(c)] +
          (1.0 - momentum_) * var);
    } else {
      mean = running_mean_.value[static_cast<size_t>(c)];
      var = running_var_.value[static_cast<size_t>(c)];
    }
    float istd = static_cast<float>(1.0 / std::sqrt(var + eps_));
    invstd_[static_cast<size_t>(c)] = istd;
    float g = gamma_.value[static_cast<size_t>(c)];
    float b = beta_.value[static_cast<size_t>(c)];
    float mu = static_cast<float>(mean);
    for (int s = 0; s < n; ++s) {
      const float* p = x.data() + s * cstride + c * plane;
      float* ph = xhat_.data() + s * cstride + c * plane;
      float* py = y.data() + s * cstride + c * plane;
      for (size_t i = 0; i < plane; ++i) {
        ph[i] = (p[i] - mu) * istd;
        py[i] = g * ph[i] + b;
      }
    }
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  require(grad_out.same_shape(xhat_), ErrorKind::ShapeMismatch,
          name_ + ": bad grad shape");
  int n = grad_out.dim(0), h = grad_out.dim(2), w = grad_out.dim(3);
  size_t plane = static_cast<size_t>(h) * w;
  size_t cstride = static_cast<size_t>(channels_) * plane;
  double count = static_cast<double>(n) * plane;

  if (gamma_.grad.size() != gamma_.value.size()) gamma_.zero_grad();
  if (beta_.grad.size() != beta_.value.size()) beta_.zero_grad();

  Tensor gx(grad_out.shape());
  for (int c = 0; c < channels_; ++c) {
    double sum_gy = 0.0, sum_gy_xhat = 0.0;
    for (int s = 0; s < n; ++s) {
      const float* gy = grad_out.data() + s * cstride + c * plane;
      const float* ph = xhat_.data() + s * cstride + c * plane;
      for (size_t i = 0; i < plane; ++i) {
        sum_gy += gy[i];
        sum_gy_xhat += static_cast<double>(gy[i]) * ph[i];
      }
    }
    gamma_.grad[static_cast<size_t>(c)] += static_cast<float>(sum_gy_xhat);
    beta_.grad[static_cast<size_t>(c)] += static_cast<float>(sum_gy);

    float g = gamma_.value[static_cast<size_t>(c)];
    float istd = invstd_[static_cast<size_t>(c)];
    if (last_train_) {
      float a = static_cast<float>(sum_gy / count);
      float bterm = static_cast<float>(sum_gy_xhat / count);
      for (int s = 0; s < n; ++s) {
        const float* gy = grad_out.data() + s * cstride + c * plane;
        const float* ph = xhat_.data() + s * cstride + c * plane;
        float* pgx = gx.data() + s * cstride + c * plane;
        for (size_t i = 0; i < plane; ++i)
          pgx[i] = g * istd * (gy[i] - a - ph[i] * bterm);
      }
    } else {
      for (int s = 0; s < n; ++s) {
        const float* gy = grad_out.data() + s * cstride + c * plane;
        float* pgx = gx.data() + s * cstride + c * plane;
        for (size_t i = 0; i < plane; ++i) pgx[i] = g * istd * gy[i];
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Activations

Tensor Relu::forward(const Tensor& x) {
  mask_ = Tensor(x.shape());
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    bool on = x[i] > 0.0f;
    mask_[i] = on ? 1.0f : 0.0f;
    y[i] = on ? x[i] : 0.0f;
  }
  return y;
}

Tensor Relu::backward(const Tensor& grad_out) {
  Tensor gx(grad_out.shape());
  for (size_t i = 0; i < gx.size(); ++i) gx[i] = grad_out[i] * mask_[i];
  return gx;
}

Tensor LeakyRelu::forward(const Tensor& x) {
  input_ = x;
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = x[i] > 0.0f ? x[i] : slope_ * x[i];
  return y;
}

Tensor LeakyRelu::backward(const Tensor& grad_out) {
  Tensor gx(grad_out.shape());
  for (size_t i = 0; i < gx.size(); ++i)
    gx[i] = grad_out[i] * (input_[i] > 0.0f ? 1.0f : slope_);
  return gx;
}

Tensor Tanh::forward(const Tensor& x) {
  output_ = Tensor(x.shape());
  for (size_t i = 0; i < x.size(); ++i) output_[i] = std::tanh(x[i]);
  return output_;
}

Tensor Tanh::backward(const Tensor& grad_out) {
  Tensor gx(grad_out.shape());
  for (size_t i = 0; i < gx.size(); ++i)
    gx[i] = grad_out[i] * (1.0f - output_[i] * output_[i]);
  return gx;
}

Tensor Sigmoid::forward(const Tensor& x) {
  output_ = Tensor(x.shape());
  for (size_t i = 0; i < x.size(); ++i)
    output_[i] = 1.0f / (1.0f + std::exp(-x[i]));
  return output_;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
  Tensor gx(grad_out.shape());
  for (size_t i = 0; i < gx.size(); ++i)
    gx[i] = grad_out[i] * output_[i] * (1.0f - output_[i]);
  return gx;
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(const std::vector<Param*>& params) {
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const Param* p : params) {
      m_.emplace_back(p->value.size(), 0.0f);
      v_.emplace_back(p->value.size(), 0.0f);
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param* p = params[pi];
    require(p->grad.size() == p->value.size(), ErrorKind::InvalidArgument,
            "Adam: missing gradient for " + p->name);
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (size_t i = 0; i < p->value.size(); ++i) {
      double g = p->grad[i];
      m[i] = static_cast<float>(beta1_ * m[i] + (1.0 - beta1_) * g);
      v[i] = static_cast<float>(beta2_ * v[i] + (1.0 - beta2_) * g * g);
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p->value[i] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

}  // namespace gmk::nn
