#ifndef GMK_TRAIN_HPP
#define GMK_TRAIN_HPP

#include <cstdint>
#include <string>

#include "gmk/checkpoint.hpp"
#include "gmk/losses.hpp"
#include "gmk/nn/models.hpp"
#include "gmk/tensor.hpp"
#include "gmk/triggers.hpp"

namespace gmk {

struct TrainConfig {
  int steps = 3000;        // generator updates
  int batch_size = 64;
  double lr = 2e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  int d_steps = 1;         // discriminator updates per generator update
  uint64_t seed = 0;
  int log_every = 50;
  std::string config_hash;

  ObjectiveSpec objective;
  TriggerSpec trigger;       // consulted when objective.lambda > 0
  WatermarkAsset watermark;  // idem
  SignLossConfig signature;  // consulted when objective.use_sign_loss
  bool seed_signature_signs = true;  // sign-seed gammas at step 0
};

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::string log_csv;  // step,base,lw,ls,total
  bool diverged = false;
  int64_t completed_steps = 0;
};

// Adversarial training with hinge losses; dataset is NCHW in [0,1] (mapped
// to the generator's tanh range internally). Fully deterministic given the
// seed. When `init` is given, generator and discriminator state is loaded
// from it before training (fine-tune / overwrite continuation).
TrainResult train_dcgan(const nn::GeneratorConfig& gen_cfg,
                        const nn::DiscriminatorConfig& disc_cfg,
                        const Tensor& dataset, const TrainConfig& cfg,
                        const ModelCheckpoint* init = nullptr);

// Negative-ELBO training; trigger inputs are images with the noise patch
// and the regularizer acts on the decoder reconstruction.
TrainResult train_vae(const nn::VaeConfig& vae_cfg, const Tensor& dataset,
                      const TrainConfig& cfg,
                      const ModelCheckpoint* init = nullptr);

// Rebuild a generator / VAE and load checkpoint state.
nn::Generator load_generator(const nn::GeneratorConfig& cfg,
                             const ModelCheckpoint& ckpt);
nn::Vae load_vae(const nn::VaeConfig& cfg, const ModelCheckpoint& ckpt);

}  // namespace gmk

#endif
