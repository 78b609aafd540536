#ifndef GMK_RUNNER_HPP
#define GMK_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmk/attacks.hpp"
#include "gmk/data.hpp"
#include "gmk/train.hpp"
#include "gmk/verify.hpp"

namespace gmk {

struct DatasetSpec {
  std::string kind = "shapes";  // "shapes" | "cifar"
  SyntheticShapesSpec shapes{32, 512, 11, 6};
  std::string cifar_path;
};

// One experiment fully described by a JSON file; see README for the schema.
struct ExperimentConfig {
  std::string model_kind = "dcgan";  // "dcgan" | "vae"
  std::string out_dir = "runs/run";
  DatasetSpec dataset;
  nn::GeneratorConfig generator;
  nn::DiscriminatorConfig discriminator;
  std::vector<nn::ConvSpec> vae_enc_convs = {{4, 2, 32}, {4, 2, 64}, {4, 2, 128}};
  TrainConfig train;  // objective included; trigger/watermark/signature filled at load

  // trigger
  std::string trigger_kind = "latent";  // "latent" | "image"
  int trigger_n = 5;
  double trigger_c = -10.0;
  Region trigger_region{0, 0, 12, 12};
  uint64_t trigger_seed = 21;

  // watermark
  std::string watermark_kind = "procedural";  // "procedural" | "png"
  int watermark_variant = 0;
  std::string watermark_path;
  Region watermark_region{0, 0, 16, 16};

  // signature
  std::string signature_text = "EXAMPLE";
  double gamma0 = 0.1;

  // verification
  int verify_queries = 256;
  double verify_threshold = 0.75;
  int histogram_bins = 10;

  // attacks
  double attack_steps_fraction = 0.2;
  double attack_flip_p = 0.1;
  std::string attacker_signature_text = "FORGERY";

  std::string config_hash;  // sha256 of the config JSON, out_dir excluded
  std::string raw_json;
};

// Parse + validate; schema violations raise BadFormat errors naming the
// offending field path (e.g. "objective.lambda").
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Materialized pieces.
Tensor load_dataset(const ExperimentConfig& cfg);
TriggerSpec build_trigger(const ExperimentConfig& cfg);
WatermarkAsset build_watermark(const ExperimentConfig& cfg);
SignPlacement placement_for(const ExperimentConfig& cfg);
OwnerBundle owner_bundle(const ExperimentConfig& cfg);
TrainConfig build_train_config(const ExperimentConfig& cfg);
EvalContext eval_context(const ExperimentConfig& cfg, const Tensor& dataset);

// Query interface over a checkpoint (latent in -> [0,1] image out for the
// GAN; image in -> reconstruction out for the VAE, with eps = 0).
QueryFn make_query(const ExperimentConfig& cfg, const ModelCheckpoint& ckpt);

struct RunArtifacts {
  std::string run_dir;
  std::string checkpoint_path;
  VerificationReport report;
  AttackMetrics metrics;
  bool diverged = false;
};

// Train, verify, and lay down a run directory with a hashed MANIFEST.
RunArtifacts run_embed(const ExperimentConfig& cfg);

// Verify an existing checkpoint; writes report artifacts under out_dir.
VerificationReport run_verify(const ExperimentConfig& cfg,
                              const std::string& checkpoint_path);

// kind: "finetune" | "overwrite" | "flip". Overwrite produces both
// attacker-sign-loss variants.
std::vector<AttackOutcome> run_attack(const std::string& kind,
                                      const ExperimentConfig& cfg,
                                      const std::string& checkpoint_path);

std::string run_flip_sweep(const ExperimentConfig& cfg,
                           const std::string& checkpoint_path,
                           const std::vector<double>& fractions,
                           const std::vector<uint64_t>& seeds);

// Q_wm / fidelity across lambda values (full embedding recipe each time).
std::string ablate_lambda(const ExperimentConfig& cfg,
                          const std::vector<double>& lambdas);

// Trigger-constant ablation: Q_wm and trigger/control separation per c.
std::string ablate_c(const ExperimentConfig& cfg,
                     const std::vector<double>& c_values);

// One summary row per completed run directory (reads metrics.csv).
std::string emit_tables(const std::vector<std::string>& run_dirs);

// Write MANIFEST (sha256 per artifact) for a directory's files.
void write_manifest(const std::string& dir);

}  // namespace gmk

#endif
