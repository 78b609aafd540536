#ifndef GMK_DATA_HPP
#define GMK_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gmk/tensor.hpp"

namespace gmk {

// Deterministic procedural dataset: 1-3 solid anti-aliased shapes
// (rectangle, circle, triangle) on a solid background. Shape placement is
// integer arithmetic on a 4x supersampled grid, so regeneration from the
// seed is bit-exact across platforms.
struct SyntheticShapesSpec {
  int resolution = 32;
  int n_samples = 0;
  uint64_t seed = 0;
  int palette_size = 8;
};

// Returns [n_samples, 3, resolution, resolution] in [0,1].
Tensor generate_shapes(const SyntheticShapesSpec& spec);

// Standard CIFAR binary layout: 3073-byte records (1 label byte followed
// by 3072 channel-planar pixel bytes). Images come back NCHW in [0,1].
Tensor read_cifar_binary(const std::string& path,
                         std::vector<uint8_t>* labels = nullptr);

// Procedural logo used as the pasted watermark. `variant` selects a
// distinct color scheme/pattern so owner and attacker logos differ.
Tensor make_logo(int h, int w, int variant = 0);

}  // namespace gmk

#endif
