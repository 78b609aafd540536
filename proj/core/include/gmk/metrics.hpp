#ifndef GMK_METRICS_HPP
#define GMK_METRICS_HPP

#include <cstdint>
#include <optional>

#include "gmk/tensor.hpp"
#include "gmk/triggers.hpp"

namespace gmk {

struct SsimConfig {
  int window_size = 11;     // odd, >= 3
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;  // images mapped to [0,1]
};

// Mean SSIM over valid Gaussian-windowed positions, per channel.
// Inputs are CHW images of the same shape. Math is done in double.
double ssim(const Tensor& a, const Tensor& b, const SsimConfig& cfg = {});

// Same value, plus d(ssim)/d(a) when grad_a is non-null.
double ssim_with_grad(const Tensor& a, const Tensor& b, Tensor* grad_a,
                      const SsimConfig& cfg = {});

// L_w = 1 - mean batch SSIM(gen, target); grad is with respect to gen.
struct ReconstructiveLoss {
  double loss = 0.0;
  Tensor grad_gen;  // populated when requested
};
ReconstructiveLoss reconstructive_loss(const Tensor& gen, const Tensor& target,
                                       const SsimConfig& cfg = {},
                                       bool want_grad = false);

// 10*log10(peak^2 / MSE); +inf for identical images.
double psnr(const Tensor& a, const Tensor& b, double peak);

struct QwmResult {
  double full_image = 0.0;
  std::optional<double> region_only;
  double threshold = 0.75;
  bool verdict = false;  // full_image >= threshold
};

// Watermark quality: SSIM between the model's trigger output and the
// expected watermarked image. region_only additionally scores just the
// paste region against the asset when one is provided.
QwmResult qwm(const Tensor& model_output_on_trigger, const Tensor& expected,
              const WatermarkAsset* asset = nullptr,
              const SsimConfig& cfg = {}, double threshold = 0.75);

struct FrechetProxyConfig {
  uint64_t projection_seed = 7;
  int feature_dim = 64;
  double eps = 1e-6;
};

// Desk-scale fidelity score: Frechet distance between Gaussians fitted
// to seeded random-projection features (half-rectified) of each batch.
double frechet_proxy(const Tensor& real_batch, const Tensor& gen_batch,
                     const FrechetProxyConfig& cfg = {});

// Map a tensor from [lo,hi] to [0,1] (generator tanh outputs use lo=-1).
Tensor to_unit_range(const Tensor& t, double lo, double hi);

// CHW crop helper.
Tensor crop(const Tensor& image, const Region& region);

}  // namespace gmk

#endif
