#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gmk/codec.hpp"
#include "gmk/error.hpp"
#include "gmk/losses.hpp"
#include "gmk/rng.hpp"

using namespace gmk;

TEST_CASE("generator hinge is -mean score with constant gradient") {
  std::vector<float> scores = {1.0f, -2.0f, 0.5f, 0.5f};
  std::vector<float> grad;
  double loss = generator_hinge_loss(scores, &grad);
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(grad.size() == 4);
  for (float g : grad) CHECK(g == doctest::Approx(-0.25));

  std::vector<float> pos = {2.0f, 4.0f};
  CHECK(generator_hinge_loss(pos) == doctest::Approx(-3.0));
}

TEST_CASE("discriminator hinge values and gradients") {
  // real scores: hinge max(0, 1 - s); fake scores: max(0, 1 + s)
  std::vector<float> real = {2.0f, 0.5f};   // terms 0, 0.5
  std::vector<float> fake = {-3.0f, 0.0f};  // terms 0, 1
  std::vector<float> gr, gf;
  double loss = discriminator_hinge_loss(real, fake, &gr, &gf);
  CHECK(loss == doctest::Approx(0.25 + 0.5));
  CHECK(gr[0] == doctest::Approx(0.0));
  CHECK(gr[1] == doctest::Approx(-0.5));  // d/ds mean max(0,1-s) = -1/n
  CHECK(gf[0] == doctest::Approx(0.0));
  CHECK(gf[1] == doctest::Approx(0.5));
}

TEST_CASE("sign loss is zero when every gamma clears the margin") {
  SignLossConfig cfg;
  cfg.gamma0 = 0.1;
  cfg.target = encode_text("EX");
  std::vector<float> gammas(16);
  for (int i = 0; i < 16; ++i)
    gammas[static_cast<size_t>(i)] = 0.5f * cfg.target.bits[static_cast<size_t>(i)];
  SignLossResult r = sign_loss(gammas, cfg, true);
  CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-12));
  for (float g : r.grad) CHECK(g == 0.0f);
}

TEST_CASE("sign loss penalizes violated margins with correct value") {
  SignLossConfig cfg;
  cfg.gamma0 = 0.1;
  cfg.target = encode_text("E");  // bits -1 +1 -1 -1 -1 +1 -1 +1
  std::vector<float> gammas = {0.3f, 0.5f, -0.5f, -0.5f,
                               -0.5f, 0.02f, -0.5f, 0.5f};
  // violations: i=0 (gamma*b = -0.3 -> 0.1 + 0.3 = 0.4), i=5 (0.1 - 0.02 = 0.08)
  SignLossResult r = sign_loss(gammas, cfg, true);
  CHECK(r.loss == doctest::Approx(0.4 + 0.08));
  CHECK(r.grad[0] == doctest::Approx(1.0));   // -b_0 = +1
  CHECK(r.grad[5] == doctest::Approx(-1.0));  // -b_5 = -1
  CHECK(r.grad[1] == doctest::Approx(0.0));
}

TEST_CASE("sign loss gradient matches central finite differences") {
  SignLossConfig cfg;
  cfg.gamma0 = 0.1;
  cfg.target = encode_text("EXAMPLE");
  Rng rng(404);
  std::vector<float> gammas(56);
  for (auto& g : gammas) {
    g = static_cast<float>(rng.normal() * 0.3);
    // keep clear of the hinge kink so FD is valid
    double margin = cfg.gamma0 - std::abs(g);
    if (std::abs(margin) < 0.02) g += g >= 0 ? 0.05f : -0.05f;
  }
  SignLossResult r = sign_loss(gammas, cfg, true);
  for (size_t i = 0; i < gammas.size(); ++i) {
    float orig = gammas[i];
    float h = 1e-3f;
    gammas[i] = orig + h;
    double up = sign_loss(gammas, cfg).loss;
    float hi = gammas[i];
    gammas[i] = orig - h;
    double dn = sign_loss(gammas, cfg).loss;
    float lo = gammas[i];
    gammas[i] = orig;
    double fd = (up - dn) / (static_cast<double>(hi) - lo);
    double denom = std::max({std::abs(fd), std::abs(double(r.grad[i])), 1e-6});
    CHECK(std::abs(fd - r.grad[i]) / denom < 1e-4);
  }
}

TEST_CASE("sign loss rejects a gamma vector shorter than the signature") {
  SignLossConfig cfg;
  cfg.target = encode_text("EXAMPLE");
  std::vector<float> too_short(10, 0.5f);
  CHECK_THROWS_AS(sign_loss(too_short, cfg), Error);
}

TEST_CASE("compose_objective") {
  ObjectiveSpec spec;
  spec.lambda = 0.0;
  spec.use_sign_loss = false;
  double base = 0.123456789123456789;
  // lambda = 0, sign off: bit-identical passthrough
  CHECK(compose_objective(base, 99.0, 99.0, spec) == base);

  spec.lambda = 2.0;
  spec.use_sign_loss = true;
  CHECK(compose_objective(1.0, 0.5, 0.25, spec) == doctest::Approx(2.25));
}

TEST_CASE("negative ELBO values and gradients") {
  Rng rng(17);
  Tensor x({2, 3, 4, 4});
  Tensor recon({2, 3, 4, 4});
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<float>(rng.uniform());
    recon[i] = static_cast<float>(rng.uniform());
  }
  Tensor mu({2, 6});
  Tensor sigma = Tensor::full({2, 6}, 1.0f);

  SUBCASE("perfect reconstruction with standard-normal posterior is zero") {
    VaeElboResult r = vae_elbo_loss(x, x, mu, sigma);
    CHECK(r.recon == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.kl == doctest::Approx(0.0).epsilon(1e-9));
  }

  SUBCASE("KL matches the closed form for a single latent") {
    Tensor m1({1, 1});
    Tensor s1({1, 1});
    m1[0] = 0.3f;
    s1[0] = 0.8f;
    Tensor x1 = Tensor::full({1, 1, 2, 2}, 0.5f);
    VaeElboResult r = vae_elbo_loss(x1, x1, m1, s1);
    double expect = 0.5 * (0.3 * 0.3 + 0.8 * 0.8 - 1.0) - std::log(0.8);
    CHECK(r.kl == doctest::Approx(expect).epsilon(1e-6));
  }

  SUBCASE("gradients match central finite differences") {
    for (size_t i = 0; i < mu.size(); ++i) {
      mu[i] = static_cast<float>(rng.normal() * 0.5);
      sigma[i] = static_cast<float>(std::exp(rng.normal() * 0.3));
    }
    VaeElboResult r = vae_elbo_loss(x, recon, mu, sigma, true);
    REQUIRE(r.grad_recon.size() == recon.size());
    REQUIRE(r.grad_mu.size() == mu.size());
    REQUIRE(r.grad_sigma.size() == sigma.size());

    auto fd_check = [&](Tensor& target, const Tensor& grad, size_t i) {
      float orig = target[i];
      float h = 1e-3f;
      target[i] = orig + h;
      double up = vae_elbo_loss(x, recon, mu, sigma).loss;
      float hi = target[i];
      target[i] = orig - h;
      double dn = vae_elbo_loss(x, recon, mu, sigma).loss;
      float lo = target[i];
      target[i] = orig;
      double fd = (up - dn) / (static_cast<double>(hi) - lo);
      double g = grad[i];
      double denom = std::max({std::abs(fd), std::abs(g), 1e-5});
      CHECK(std::abs(fd - g) / denom < 2e-3);
    };
    Rng pick(2);
    for (int t = 0; t < 12; ++t)
      fd_check(recon, r.grad_recon, pick.below(recon.size()));
    for (size_t i = 0; i < mu.size(); ++i) fd_check(mu, r.grad_mu, i);
    for (size_t i = 0; i < sigma.size(); ++i) fd_check(sigma, r.grad_sigma, i);
  }

  SUBCASE("non-positive sigma is rejected") {
    sigma[0] = 0.0f;
    CHECK_THROWS_AS(vae_elbo_loss(x, recon, mu, sigma), Error);
  }
}

TEST_CASE("Uchida projection, embedding and extraction") {
  UchidaSpec spec;
  spec.seed = 9;
  spec.bits = {1, 0, 1, 1, 0, 0, 1, 0};
  const int dim = 24;
  Eigen::MatrixXd X = uchida_projection(spec, dim);
  REQUIRE(X.rows() == 8);
  REQUIRE(X.cols() == dim);
  Eigen::MatrixXd again = uchida_projection(spec, dim);
  CHECK((X - again).norm() == 0.0);

  // Build a carrier whose projections strongly match the bits.
  Eigen::VectorXd signs(8);
  for (int i = 0; i < 8; ++i) signs(i) = spec.bits[static_cast<size_t>(i)] ? 1.0 : -1.0;
  Eigen::VectorXd w = X.transpose() * signs * 2.0;
  std::vector<float> wbar(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) wbar[static_cast<size_t>(i)] = static_cast<float>(w(i));

  std::vector<uint8_t> out = uchida_extract(wbar, X);
  CHECK(out == spec.bits);

  std::vector<float> grad;
  double loss = uchida_embed_loss(wbar, spec, X, &grad);
  CHECK(loss >= 0.0);
  REQUIRE(grad.size() == wbar.size());

  Rng pick(6);
  for (int t = 0; t < 12; ++t) {
    size_t i = pick.below(wbar.size());
    float orig = wbar[i];
    float h = 1e-3f;
    wbar[i] = orig + h;
    double up = uchida_embed_loss(wbar, spec, X);
    float hi = wbar[i];
    wbar[i] = orig - h;
    double dn = uchida_embed_loss(wbar, spec, X);
    float lo = wbar[i];
    wbar[i] = orig;
    double fd = (up - dn) / (static_cast<double>(hi) - lo);
    double denom = std::max({std::abs(fd), std::abs(double(grad[i])), 1e-6});
    CHECK(std::abs(fd - grad[i]) / denom < 1e-3);
  }

  // flipping the carrier flips every extracted bit
  for (auto& v : wbar) v = -v;
  std::vector<uint8_t> flipped = uchida_extract(wbar, X);
  for (int i = 0; i < 8; ++i)
    CHECK(flipped[static_cast<size_t>(i)] == 1 - spec.bits[static_cast<size_t>(i)]);
}
