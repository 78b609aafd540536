#ifndef GMK_NN_MODELS_HPP
#define GMK_NN_MODELS_HPP

#include <memory>
#include <string>
#include <vector>

#include "gmk/checkpoint.hpp"
#include "gmk/codec.hpp"
#include "gmk/nn/layers.hpp"
#include "gmk/rng.hpp"
#include "gmk/tensor.hpp"

namespace gmk::nn {

// DCGAN-style generator: dense -> [base_map x base_map x 2*widths[0]]
// feature map, BN+ReLU, then one 4x4 stride-2 deconv + BN + ReLU per entry
// of `widths` (each doubling the map), finally a 3x3 conv to out_channels
// with a tanh (or sigmoid, for the VAE decoder) head.
struct GeneratorConfig {
  int latent_dim = 128;
  int base_map = 4;
  std::vector<int> widths = {256, 128, 64};
  int out_channels = 3;
  bool sigmoid_head = false;

  int out_size() const {
    int s = base_map;
    for (size_t i = 0; i < widths.size(); ++i) s *= 2;
    return s;
  }
};

class Generator {
 public:
  Generator(std::string prefix, const GeneratorConfig& cfg, Rng& init_rng);

  Tensor forward(const Tensor& z, bool train);  // z: [N, latent_dim]
  Tensor backward(const Tensor& grad_out);      // returns grad wrt z

  std::vector<Param*> params();
  std::vector<Param*> buffers();

  // Normalization layers that carry the signature, in definition order.
  SignPlacement placement() const;
  // Scale factors flattened in placement order.
  std::vector<float> gammas() const;
  // Accumulate a gradient (same flattened order) into the gamma grads.
  void add_gamma_grad(const std::vector<float>& g);
  // Directly overwrite the flattened scale factors (attacks, seeding).
  void set_gammas(const std::vector<float>& g);
  // Point each signature-carrying scale factor's sign at its target bit,
  // keeping its magnitude.
  void seed_signature(const BitSignature& sig);

  void write_state(ModelCheckpoint& ckpt);
  void read_state(const ModelCheckpoint& ckpt);

  const GeneratorConfig& config() const { return cfg_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string prefix_;
  GeneratorConfig cfg_;
  std::unique_ptr<Dense> fc_;
  std::unique_ptr<BatchNorm2d> bn0_;
  Relu relu0_;
  std::vector<std::unique_ptr<Deconv2d>> deconvs_;
  std::vector<std::unique_ptr<BatchNorm2d>> bns_;  // signature carriers
  std::vector<Relu> relus_;
  std::unique_ptr<Conv2d> head_;
  Tanh tanh_;
  Sigmoid sigmoid_;
  int fc_channels_ = 0;
};

struct ConvSpec {
  int k = 3;
  int stride = 1;
  int width = 64;
};

struct DiscriminatorConfig {
  int in_channels = 3;
  int image_size = 32;
  std::vector<ConvSpec> convs = {{3, 1, 64},  {4, 2, 64},  {3, 1, 128},
                                 {4, 2, 128}, {3, 1, 256}, {4, 2, 256},
                                 {3, 1, 512}};
  float leaky_slope = 0.1f;
  bool spectral_norm = true;
};

class Discriminator {
 public:
  Discriminator(std::string prefix, const DiscriminatorConfig& cfg,
                Rng& init_rng);

  // x: [N, in_channels, image_size, image_size] -> scores [N].
  std::vector<float> forward(const Tensor& x, bool train);
  // grad_scores: d loss / d score per sample; returns grad wrt input.
  Tensor backward(const std::vector<float>& grad_scores);

  std::vector<Param*> params();
  std::vector<Param*> buffers();

  void write_state(ModelCheckpoint& ckpt);
  void read_state(const ModelCheckpoint& ckpt);

  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  std::string prefix_;
  DiscriminatorConfig cfg_;
  std::vector<std::unique_ptr<Conv2d>> convs_;
  std::vector<LeakyRelu> acts_;
  std::unique_ptr<Dense> fc_;
  int feat_dim_ = 0;
  int last_n_ = 0;
};

// Convolutional encoder + Generator decoder (sigmoid head). The decoder's
// normalization layers carry the signature exactly as in the GAN.
struct VaeConfig {
  int in_channels = 3;
  int image_size = 32;
  std::vector<ConvSpec> enc_convs = {{4, 2, 64}, {4, 2, 128}, {4, 2, 256}};
  float leaky_slope = 0.1f;
  GeneratorConfig decoder;  // sigmoid_head forced on
};

struct VaeForward {
  Tensor recon;
  Tensor mu;
  Tensor sigma;
};

class Vae {
 public:
  Vae(std::string prefix, const VaeConfig& cfg, Rng& init_rng);

  // eps: [N, latent_dim] standard-normal draws for the reparameterized
  // sample z = mu + sigma * eps.
  VaeForward forward(const Tensor& x, const Tensor& eps, bool train);
  // Decoder-only pass for watermark verification queries.
  Tensor decode(const Tensor& z, bool train);

  // grad_* are d loss / d(recon, mu, sigma) from the objective; reconstruction
  // gradient is routed through the decoder and the reparameterization.
  void backward(const Tensor& grad_recon, const Tensor& grad_mu,
                const Tensor& grad_sigma);

  std::vector<Param*> params();
  std::vector<Param*> buffers();

  Generator& decoder() { return *dec_; }
  const VaeConfig& config() const { return cfg_; }

  void write_state(ModelCheckpoint& ckpt);
  void read_state(const ModelCheckpoint& ckpt);

 private:
  std::string prefix_;
  VaeConfig cfg_;
  std::vector<std::unique_ptr<Conv2d>> enc_convs_;
  std::vector<LeakyRelu> enc_acts_;
  std::unique_ptr<Dense> fc_mu_;
  std::unique_ptr<Dense> fc_logvar_;
  std::unique_ptr<Generator> dec_;
  int feat_dim_ = 0;
  // caches for backward
  Tensor eps_;
  Tensor sigma_;
  Tensor enc_feat_;  // flattened encoder features
  int last_n_ = 0;
};

// Shared checkpoint helpers.
void write_params(ModelCheckpoint& ckpt, const std::vector<Param*>& params);
void read_params(const ModelCheckpoint& ckpt, const std::vector<Param*>& params);

}  // namespace gmk::nn

#endif
