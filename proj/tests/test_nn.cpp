#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gmk/nn/layers.hpp"
#include "gmk/rng.hpp"
#include "gmk/tensor.hpp"

using namespace gmk;
using namespace gmk::nn;

namespace {

Tensor randn(std::vector<int> shape, Rng& rng, float scale = 1.0f) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i)
    t[i] = scale * static_cast<float>(rng.normal());
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

// loss(x) = <layer(x), R>; its gradient w.r.t. x is layer.backward(R).
template <typename Forward>
void fd_check(Tensor& target, const Tensor& grad, Forward loss_fn, int n_probes,
              uint64_t pick_seed, double tol = 5e-3) {
  Rng pick(pick_seed);
  for (int t = 0; t < n_probes; ++t) {
    size_t i = pick.below(target.size());
    float orig = target[i];
    float h = 1e-2f;
    target[i] = orig + h;
    double up = loss_fn();
    float hi = target[i];
    target[i] = orig - h;
    double dn = loss_fn();
    float lo = target[i];
    target[i] = orig;
    double fd = (up - dn) / (static_cast<double>(hi) - lo);
    double g = grad[i];
    double denom = std::max({std::abs(fd), std::abs(g), 1e-4});
    CHECK(std::abs(fd - g) / denom < tol);
  }
}

}  // namespace

TEST_CASE("im2col and col2im are adjoint") {
  const int c = 2, h = 5, w = 6, k = 3, stride = 2, pad = 1;
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  Rng rng(1);
  std::vector<float> x(static_cast<size_t>(c) * h * w);
  std::vector<float> y(static_cast<size_t>(c) * k * k * oh * ow);
  for (auto& v : x) v = static_cast<float>(rng.normal());
  for (auto& v : y) v = static_cast<float>(rng.normal());

  std::vector<float> cols(y.size(), 0.0f);
  im2col(x.data(), c, h, w, k, stride, pad, cols.data());
  std::vector<float> img(x.size(), 0.0f);
  col2im(y.data(), c, h, w, k, stride, pad, img.data());

  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < y.size(); ++i)
    lhs += static_cast<double>(cols[i]) * y[i];
  for (size_t i = 0; i < x.size(); ++i)
    rhs += static_cast<double>(x[i]) * img[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
}

TEST_CASE("spectral norm power iteration converges to the top singular value") {
  Rng rng(7);
  MatF w(8, 12);
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j)
      w(i, j) = static_cast<float>(rng.normal());

  Eigen::JacobiSVD<Eigen::MatrixXf> svd(w);
  double true_sigma = svd.singularValues()(0);

  SpectralNormState state;
  double sigma = 0.0;
  MatF scratch;
  for (int it = 0; it < 50; ++it) {
    scratch = w;
    sigma = spectral_normalize(scratch, state);
  }
  CHECK(std::abs(sigma - true_sigma) / true_sigma < 1e-3);

  // the returned matrix is W / sigma
  MatF expected = w / static_cast<float>(sigma);
  CHECK((scratch - expected).norm() < 1e-5);

  SUBCASE("identity gives sigma 1") {
    MatF eye = MatF::Identity(4, 4);
    SpectralNormState s2;
    double sg = 0.0;
    for (int it = 0; it < 5; ++it) {
      MatF cp = eye;
      sg = spectral_normalize(cp, s2);
    }
    CHECK(sg == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("scaling the matrix scales sigma, normalized result unchanged") {
    SpectralNormState s3;
    MatF doubled = 2.0f * w;
    double sg = 0.0;
    MatF cp;
    for (int it = 0; it < 50; ++it) {
      cp = doubled;
      sg = spectral_normalize(cp, s3);
    }
    CHECK(sg == doctest::Approx(2.0 * sigma).epsilon(1e-3));
    CHECK((cp - scratch).norm() < 1e-4);
  }

  SUBCASE("zero matrix left unchanged") {
    MatF z = MatF::Zero(3, 3);
    SpectralNormState s4;
    CHECK(spectral_normalize(z, s4) == 0.0);
    CHECK(z.norm() == 0.0f);
  }
}

TEST_CASE("Conv2d forward shape and gradients") {
  Rng rng(11);
  Conv2d conv("c", 2, 3, 3, 2, 1, false, rng);
  Tensor& w = conv.params()[0]->value;
  Tensor& b = conv.params()[1]->value;
  for (size_t i = 0; i < w.size(); ++i)
    w[i] = 0.4f * static_cast<float>(rng.normal());
  for (size_t i = 0; i < b.size(); ++i)
    b[i] = 0.1f * static_cast<float>(rng.normal());

  Tensor x = randn({2, 2, 5, 5}, rng, 0.5f);
  Tensor out = conv.forward(x, false);
  REQUIRE(out.shape() == std::vector<int>({2, 3, 3, 3}));

  Tensor r = randn(out.shape(), rng);
  auto loss = [&] { return dot(conv.forward(x, false), r); };

  for (auto* p : conv.params()) p->zero_grad();
  conv.forward(x, false);
  Tensor gx = conv.backward(r);
  REQUIRE(gx.shape() == x.shape());

  fd_check(x, gx, loss, 20, 21);
  fd_check(w, conv.params()[0]->grad, loss, 20, 22);
  fd_check(b, conv.params()[1]->grad, loss, 3, 23);
}

TEST_CASE("spectrally normalized layers divide by sigma; input grad exact") {
  Rng rng(13);
  Conv2d conv("c", 2, 4, 3, 1, 1, true, rng);
  Tensor x = randn({1, 2, 6, 6}, rng, 0.5f);

  // eval forward keeps u fixed, so repeated calls agree bit for bit
  Tensor a = conv.forward(x, false);
  Tensor b = conv.forward(x, false);
  CHECK(a.equals(b));

  Tensor r = randn(a.shape(), rng);
  for (auto* p : conv.params()) p->zero_grad();
  conv.forward(x, false);
  Tensor gx = conv.backward(r);
  auto loss = [&] { return dot(conv.forward(x, false), r); };
  fd_check(x, gx, loss, 20, 31);  // output is linear in x even under SN
}

TEST_CASE("Deconv2d output size and gradients") {
  Rng rng(17);
  Deconv2d dc("d", 3, 2, 4, 2, 1, rng);
  CHECK(dc.out_h(4) == 8);
  Tensor& w = dc.params()[0]->value;
  Tensor& b = dc.params()[1]->value;
  for (size_t i = 0; i < w.size(); ++i)
    w[i] = 0.4f * static_cast<float>(rng.normal());
  for (size_t i = 0; i < b.size(); ++i)
    b[i] = 0.1f * static_cast<float>(rng.normal());

  Tensor x = randn({2, 3, 3, 3}, rng, 0.5f);
  Tensor out = dc.forward(x, true);
  REQUIRE(out.shape() == std::vector<int>({2, 2, 6, 6}));

  Tensor r = randn(out.shape(), rng);
  auto loss = [&] { return dot(dc.forward(x, true), r); };
  for (auto* p : dc.params()) p->zero_grad();
  dc.forward(x, true);
  Tensor gx = dc.backward(r);

  fd_check(x, gx, loss, 20, 41);
  fd_check(w, dc.params()[0]->grad, loss, 20, 42);
  fd_check(b, dc.params()[1]->grad, loss, 2, 43);
}

TEST_CASE("Dense gradients") {
  Rng rng(19);
  Dense fc("f", 6, 4, false, rng);
  Tensor& w = fc.params()[0]->value;
  for (size_t i = 0; i < w.size(); ++i)
    w[i] = 0.4f * static_cast<float>(rng.normal());

  Tensor x = randn({3, 6}, rng, 0.5f);
  Tensor out = fc.forward(x, true);
  REQUIRE(out.shape() == std::vector<int>({3, 4}));

  Tensor r = randn(out.shape(), rng);
  auto loss = [&] { return dot(fc.forward(x, true), r); };
  for (auto* p : fc.params()) p->zero_grad();
  fc.forward(x, true);
  Tensor gx = fc.backward(r);

  fd_check(x, gx, loss, 15, 51);
  fd_check(w, fc.params()[0]->grad, loss, 15, 52);
  fd_check(fc.params()[1]->value, fc.params()[1]->grad, loss, 4, 53);
}

TEST_CASE("BatchNorm2d normalizes in training and freezes in eval") {
  Rng rng(23);
  BatchNorm2d bn("bn", 3, rng);
  Tensor x = randn({4, 3, 2, 2}, rng);
  for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] * 2.0f + 1.0f;

  Tensor y = bn.forward(x, true);
  // per-channel standardization, then scale/shift by gamma/beta
  const Tensor& gamma = bn.params()[0]->value;
  const Tensor& beta = bn.params()[1]->value;
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    int m = 4 * 2 * 2;
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) mean += y.at(n, c, i, j) / m;
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double d = y.at(n, c, i, j) - mean;
          var += d * d / m;
        }
    CHECK(mean == doctest::Approx(beta[static_cast<size_t>(c)]).epsilon(1e-3));
    CHECK(std::sqrt(var) ==
          doctest::Approx(std::abs(gamma[static_cast<size_t>(c)])).epsilon(1e-2));
  }

  SUBCASE("training gradients match finite differences") {
    Tensor r = randn(y.shape(), rng);
    auto loss = [&] { return dot(bn.forward(x, true), r); };
    for (auto* p : bn.params()) p->zero_grad();
    bn.forward(x, true);
    Tensor gx = bn.backward(r);
    fd_check(x, gx, loss, 20, 61, 1e-2);
    fd_check(bn.params()[0]->value, bn.params()[0]->grad, loss, 3, 62, 1e-2);
    fd_check(bn.params()[1]->value, bn.params()[1]->grad, loss, 3, 63, 1e-2);
  }

  SUBCASE("eval uses running statistics and does not update them") {
    Tensor rm_before = bn.buffers()[0]->value;
    Tensor eval1 = bn.forward(x, false);
    Tensor eval2 = bn.forward(x, false);
    CHECK(eval1.equals(eval2));
    CHECK(bn.buffers()[0]->value.equals(rm_before));
    // training pass moves the running mean
    bn.forward(x, true);
    CHECK_FALSE(bn.buffers()[0]->value.equals(rm_before));
    // eval output differs from training output (stats differ)
    CHECK_FALSE(eval1.equals(y));
  }
}

TEST_CASE("activations") {
  Rng rng(29);
  Tensor x = randn({2, 3, 4}, rng);

  SUBCASE("relu and leaky relu") {
    Relu relu;
    Tensor y = relu.forward(x);
    for (size_t i = 0; i < x.size(); ++i)
      CHECK(y[i] == (x[i] > 0.0f ? x[i] : 0.0f));
    Tensor r = randn(x.shape(), rng);
    Tensor g = relu.backward(r);
    for (size_t i = 0; i < x.size(); ++i)
      CHECK(g[i] == (x[i] > 0.0f ? r[i] : 0.0f));

    LeakyRelu lrelu(0.1f);
    Tensor ly = lrelu.forward(x);
    for (size_t i = 0; i < x.size(); ++i)
      CHECK(ly[i] == (x[i] > 0.0f ? x[i] : 0.1f * x[i]));
    Tensor lg = lrelu.backward(r);
    for (size_t i = 0; i < x.size(); ++i)
      CHECK(lg[i] == doctest::Approx(x[i] > 0.0f ? r[i] : 0.1f * r[i]));
  }

  SUBCASE("tanh and sigmoid gradients") {
    Tanh th;
    Tensor y = th.forward(x);
    Tensor r = randn(x.shape(), rng);
    Tensor g = th.backward(r);
    for (size_t i = 0; i < x.size(); ++i) {
      double t = std::tanh(static_cast<double>(x[i]));
      CHECK(y[i] == doctest::Approx(t).epsilon(1e-6));
      CHECK(g[i] == doctest::Approx(r[i] * (1.0 - t * t)).epsilon(1e-5));
    }
    Sigmoid sg;
    Tensor sy = sg.forward(x);
    Tensor sgd = sg.backward(r);
    for (size_t i = 0; i < x.size(); ++i) {
      double s = 1.0 / (1.0 + std::exp(-static_cast<double>(x[i])));
      CHECK(sy[i] == doctest::Approx(s).epsilon(1e-6));
      CHECK(sgd[i] == doctest::Approx(r[i] * s * (1.0 - s)).epsilon(1e-5));
    }
  }
}

TEST_CASE("Adam first step matches the bias-corrected update") {
  Param p;
  p.name = "p";
  p.value = Tensor({3});
  p.value[0] = 1.0f;
  p.value[1] = -2.0f;
  p.value[2] = 0.5f;
  p.zero_grad();
  p.grad[0] = 0.3f;
  p.grad[1] = -0.7f;
  p.grad[2] = 0.0f;

  Adam opt(0.01, 0.9, 0.999);
  std::vector<float> before = {1.0f, -2.0f, 0.5f};
  opt.step({&p});
  for (int i = 0; i < 3; ++i) {
    double g = i == 0 ? 0.3 : (i == 1 ? -0.7 : 0.0);
    // mhat = g, vhat = g^2 after bias correction on step 1
    double expect = before[static_cast<size_t>(i)] -
                    0.01 * g / (std::abs(g) + 1e-8);
    CHECK(p.value[static_cast<size_t>(i)] ==
          doctest::Approx(expect).epsilon(1e-5));
  }

  SUBCASE("repeated steps shrink a quadratic") {
    Param q;
    q.name = "q";
    q.value = Tensor({1});
    q.value[0] = 3.0f;
    Adam o2(0.1, 0.9, 0.999);
    for (int it = 0; it < 200; ++it) {
      q.zero_grad();
      q.grad[0] = 2.0f * q.value[0];
      o2.step({&q});
    }
    CHECK(std::abs(q.value[0]) < 0.5f);
  }
}
