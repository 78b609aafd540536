#ifndef GMK_TRIGGERS_HPP
#define GMK_TRIGGERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gmk/tensor.hpp"

namespace gmk {

struct Region {
  int row = 0;
  int col = 0;
  int h = 0;
  int w = 0;
};

// Latent-space trigger: n coordinates of z, chosen once from `seed`,
// are overwritten with the constant c.
struct LatentTriggerSpec {
  int latent_dim = 0;
  int n = 0;
  double c = 0.0;
  uint64_t seed = 0;
  std::vector<uint8_t> mask;  // 1 = keep, 0 = overwrite with c

  static LatentTriggerSpec generate(int latent_dim, int n, double c,
                                    uint64_t seed);
  std::vector<int> masked_indices() const;
};

// Image-space trigger: a fixed noise patch pasted at a fixed region.
struct ImageTriggerSpec {
  Tensor noise_patch;  // CHW
  Region paste_region;
  uint64_t seed = 0;
  double range_lo = 0.0;
  double range_hi = 1.0;

  static ImageTriggerSpec generate(int channels, Region region, uint64_t seed,
                                   double range_lo = 0.0, double range_hi = 1.0);
};

// The logo pasted on generator outputs, in model output range [0,1].
struct WatermarkAsset {
  Tensor image;  // CHW, dims match paste_region
  Region paste_region;
  std::string name;

  static WatermarkAsset load_png(const std::string& path, Region region,
                                 const std::string& name);
};

struct TriggerSpec {
  enum class Kind { Latent, Image };
  Kind kind = Kind::Latent;
  LatentTriggerSpec latent;
  ImageTriggerSpec image;

  std::string to_json() const;
  static TriggerSpec from_json(const std::string& text);
  void save(const std::string& path) const;
  static TriggerSpec load(const std::string& path);
};

// f(z) = z .* b + c (1 - b)
Tensor make_latent_trigger(const Tensor& z, const LatentTriggerSpec& spec);

// h(x): paste the fixed noise patch onto the input image (CHW).
Tensor make_image_trigger(const Tensor& x, const ImageTriggerSpec& spec);

// g(y): paste the watermark onto a generated image (CHW).
Tensor paste_watermark(const Tensor& y, const WatermarkAsset& asset);

// Batched variants: latents [N,D], images [N,C,H,W].
Tensor build_trigger_batch(const Tensor& inputs, const TriggerSpec& spec);
Tensor paste_watermark_batch(const Tensor& batch, const WatermarkAsset& asset);

}  // namespace gmk

#endif
