#ifndef GMK_IMAGE_IO_HPP
#define GMK_IMAGE_IO_HPP

#include <string>

#include "gmk/tensor.hpp"

namespace gmk {

// Reads an RGB(A) PNG into a CHW float tensor with 3 channels in [0,1].
// Alpha, if present, is composited over black.
Tensor read_png(const std::string& path);

// Writes a CHW tensor in [0,1] as an 8-bit RGB PNG. Values are clamped.
void write_png(const std::string& path, const Tensor& image);

// Nearest-neighbour resample of a CHW image (keeps hard logo edges).
Tensor resample_nearest(const Tensor& image, int out_h, int out_w);

}  // namespace gmk

#endif
