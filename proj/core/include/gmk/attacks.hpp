#ifndef GMK_ATTACKS_HPP
#define GMK_ATTACKS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmk/checkpoint.hpp"
#include "gmk/losses.hpp"
#include "gmk/nn/models.hpp"
#include "gmk/tensor.hpp"
#include "gmk/train.hpp"
#include "gmk/verify.hpp"

namespace gmk {

struct AttackMetrics {
  double fidelity = 0.0;  // Frechet proxy vs reference data
  double qwm_mean = 0.0;  // owner watermark quality
  double ber = 0.0;       // owner signature BER
};

struct AttackReport {
  std::string kind;
  std::map<std::string, double> params;
  AttackMetrics pre;   // untouched input checkpoint
  AttackMetrics post;  // attacked checkpoint
  uint64_t seed = 0;
  int64_t steps = 0;
  bool diverged = false;
  std::string variant;  // overwrite: with/without attacker sign loss
  std::optional<double> attacker_qwm_post;

  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

// Everything needed to score a checkpoint against the owner's evidence.
struct EvalContext {
  nn::GeneratorConfig gen_cfg;
  Tensor data;  // reference images in [0,1]
  OwnerBundle owner;
  int n_queries = 128;
  uint64_t seed = 99;
};

AttackMetrics evaluate_dcgan(const ModelCheckpoint& checkpoint,
                             const EvalContext& eval);

struct AttackOutcome {
  ModelCheckpoint checkpoint;
  AttackReport report;
  std::string log_csv;
};

// Continue adversarial training with lambda = 0 and sign loss disabled.
AttackOutcome finetune_attack(const ModelCheckpoint& checkpoint,
                              const nn::DiscriminatorConfig& disc_cfg,
                              const Tensor& dataset, int steps, uint64_t seed,
                              const TrainConfig& base_train,
                              const EvalContext& eval);

// Re-run the embedding procedure with the attacker's assets from the
// stolen checkpoint. Rejects attacker triggers identical to the owner's.
AttackOutcome overwrite_attack(const ModelCheckpoint& checkpoint,
                               const nn::DiscriminatorConfig& disc_cfg,
                               const Tensor& dataset,
                               const OwnerBundle& attacker,
                               bool attacker_sign_loss, int steps,
                               uint64_t seed, const TrainConfig& base_train,
                               const EvalContext& eval);

// Negate floor(p * n_signature_bits) uniformly sampled signature-channel
// scale factors; no retraining. Magnitudes are preserved elementwise.
AttackOutcome flip_signs_attack(const ModelCheckpoint& checkpoint, double p,
                                uint64_t seed, const EvalContext& eval);

// fractions x seeds grid of flip attacks; returns CSV
// "p,seed,fidelity_proxy,qwm_mean,ber" rows.
std::string flip_sweep(const ModelCheckpoint& checkpoint,
                       const std::vector<double>& fractions,
                       const std::vector<uint64_t>& seeds,
                       const EvalContext& eval);

// Uchida baseline: flattened mean kernel of a conv weight tensor.
std::vector<float> uchida_mean_kernel(const ModelCheckpoint& checkpoint,
                                      const std::string& tensor_name);

struct UchidaForgeResult {
  Eigen::MatrixXd projection;  // forged X'
  BerResult ber;               // extraction of b' with X' on frozen weights
  double final_loss = 0.0;
  bool success = false;  // BER <= 0.01 within budget
};

// With the model weights frozen, optimize a counterfeit projection X' so
// that sigmoid(X' wbar) matches arbitrary bits b'.
UchidaForgeResult uchida_forge(const std::vector<float>& wbar,
                               const std::vector<uint8_t>& forged_bits,
                               uint64_t seed, int budget_steps = 2000,
                               double lr = 0.5);

}  // namespace gmk

#endif
