#ifndef GMK_VERIFY_HPP
#define GMK_VERIFY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gmk/checkpoint.hpp"
#include "gmk/codec.hpp"
#include "gmk/losses.hpp"
#include "gmk/tensor.hpp"
#include "gmk/triggers.hpp"

namespace gmk {

// Black-box query interface: inputs in, images out ([N,C,H,W], values in
// [0,1]). For latent triggers the inputs are latent batches [N,D]; for
// image triggers they are image batches. Verification sees nothing else.
using QueryFn = std::function<Tensor(const Tensor&)>;

// The owner's secret material needed to verify a model.
struct OwnerBundle {
  TriggerSpec trigger;
  WatermarkAsset watermark;
  SignLossConfig signature;
};

struct BlackboxSection {
  int n_queries = 0;
  double qwm_mean = 0.0;
  double qwm_std = 0.0;
  std::vector<int> histogram;  // Q_wm counts over equal bins in [0,1]
  double threshold = 0.75;
  bool verdict = false;
  // Control set: same-size batch of untriggered inputs.
  double control_qwm_mean = 0.0;
  double separation = 0.0;  // qwm_mean - control_qwm_mean
  std::vector<double> per_sample;
  std::vector<double> control_per_sample;
  std::string error;
};

struct WhiteboxSection {
  std::string extracted_text;
  BerResult ber;
  bool verdict = false;
  std::string error;
};

struct VerifyOptions {
  int n_queries = 256;
  double threshold = 0.75;
  int histogram_bins = 10;
  uint64_t seed = 0;
  // Base inputs for image-space triggers (ignored for latent triggers).
  const Tensor* base_inputs = nullptr;
  std::string checkpoint_hash;
};

// Samples n_queries trigger inputs plus an equal-size control set, scores
// Q_wm per sample, and aggregates the distribution. Touches the model only
// through `query`.
BlackboxSection verify_blackbox(const QueryFn& query, const TriggerSpec& trigger,
                                const WatermarkAsset& watermark,
                                int n_queries, double threshold, uint64_t seed,
                                int histogram_bins = 10,
                                const Tensor* base_inputs = nullptr);

// extract_signs -> BER against the owner signature -> decode. Placement
// problems yield a negative verdict with a diagnostic, not an exception.
WhiteboxSection verify_whitebox(const ModelCheckpoint& checkpoint,
                                const SignLossConfig& signature);

struct VerificationReport {
  std::string schema = "gmk-report/1";
  BlackboxSection blackbox;
  WhiteboxSection whitebox;
  std::string checkpoint_hash;
  std::string trigger_hash;
  std::string watermark_hash;
  std::string timestamp;

  std::string to_json() const;
  std::string summary() const;   // human-readable
  std::string qwm_csv() const;   // per-sample Q_wm rows
  // 0 both positive, 2 black-box only, 3 white-box only, 4 neither.
  int exit_code() const;
};

VerificationReport full_report(const QueryFn& query,
                               const ModelCheckpoint& checkpoint,
                               const OwnerBundle& owner,
                               const VerifyOptions& opts);

}  // namespace gmk

#endif
