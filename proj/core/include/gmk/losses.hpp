#ifndef GMK_LOSSES_HPP
#define GMK_LOSSES_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gmk/codec.hpp"
#include "gmk/tensor.hpp"

namespace gmk {

// Hinge on the polarity of each signature-carrying scale factor:
// L_s = sum_i max(gamma0 - gamma_i * b_i, 0) over the signature prefix.
struct SignLossConfig {
  double gamma0 = 0.1;
  BitSignature target;
  SignPlacement placement;
};

struct SignLossResult {
  double loss = 0.0;
  std::vector<float> grad;  // same length as the input gammas
};

SignLossResult sign_loss(const std::vector<float>& gammas,
                         const SignLossConfig& cfg, bool want_grad = false);

enum class BaseLossKind { DcganHingeG, VaeElbo };

struct ObjectiveSpec {
  BaseLossKind base_loss_kind = BaseLossKind::DcganHingeG;
  double lambda = 1.0;
  bool use_sign_loss = false;
  double trigger_batch_ratio = 1.0;  // trigger batch size / normal batch size
};

// base + lambda * lw + (ls when enabled). With lambda == 0 and sign loss
// off this returns base bit-identically.
double compose_objective(double base, double lw, double ls,
                         const ObjectiveSpec& spec);

// SN-GAN generator hinge term: -mean(D(G(z))). grad, when given, receives
// d/d(score_i) = -1/n.
double generator_hinge_loss(const std::vector<float>& d_scores_on_fake,
                            std::vector<float>* grad = nullptr);

// mean(max(0, 1 - D(x))) + mean(max(0, 1 + D(G(z)))).
double discriminator_hinge_loss(const std::vector<float>& d_real,
                                const std::vector<float>& d_fake,
                                std::vector<float>* grad_real = nullptr,
                                std::vector<float>* grad_fake = nullptr);

// Negative ELBO: per-element MSE reconstruction term plus the closed-form
// KL of N(mu, sigma^2) against N(0, I), summed over latent dims and
// averaged over the batch.
struct VaeElboResult {
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  Tensor grad_recon;  // filled when want_grad
  Tensor grad_mu;
  Tensor grad_sigma;
};

VaeElboResult vae_elbo_loss(const Tensor& x, const Tensor& recon,
                            const Tensor& mu, const Tensor& sigma,
                            bool want_grad = false);

// Uchida-style baseline: watermark bits b live in sigmoid(X * wbar) where
// wbar is the flattened mean convolution kernel.
struct UchidaSpec {
  uint64_t seed = 0;
  std::vector<uint8_t> bits;  // 0/1
  double strength = 1.0;
};

Eigen::MatrixXd uchida_projection(const UchidaSpec& spec, int weight_dim);

double uchida_embed_loss(const std::vector<float>& wbar, const UchidaSpec& spec,
                         const Eigen::MatrixXd& projection,
                         std::vector<float>* grad = nullptr);

// bit_i = 1 iff sigmoid((X wbar)_i) >= threshold; ties resolve to 1.
std::vector<uint8_t> uchida_extract(const std::vector<float>& wbar,
                                    const Eigen::MatrixXd& projection,
                                    double threshold = 0.5);

}  // namespace gmk

#endif
