#include "gmk/data.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>

#include "gmk/error.hpp"
#include "gmk/rng.hpp"

namespace gmk {

namespace {

constexpr int kSuper = 4;  // supersampling factor per axis

struct Color {
  float r, g, b;
};

struct IPoint {
  int64_t x, y;
};

int64_t cross(IPoint a, IPoint b, IPoint p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

// Coverage of one pixel by a shape, in 1/16ths, pure integer tests on the
// supersampled lattice.
template <typename InsideFn>
int pixel_coverage(int px, int py, InsideFn inside) {
  int count = 0;
  for (int sy = 0; sy < kSuper; ++sy)
    for (int sx = 0; sx < kSuper; ++sx)
      if (inside(static_cast<int64_t>(px) * kSuper + sx,
                 static_cast<int64_t>(py) * kSuper + sy))
        ++count;
  return count;
}

void blend_shape(float* img, int res, const Color& c,
                 const std::function<bool(int64_t, int64_t)>& inside) {
  size_t plane = static_cast<size_t>(res) * res;
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      int cov = pixel_coverage(x, y, inside);
      if (cov == 0) continue;
      float a = static_cast<float>(cov) / 16.0f;
      size_t i = static_cast<size_t>(y) * res + x;
      img[i] = img[i] * (1.0f - a) + c.r * a;
      img[i + plane] = img[i + plane] * (1.0f - a) + c.g * a;
      img[i + 2 * plane] = img[i + 2 * plane] * (1.0f - a) + c.b * a;
    }
  }
}

}  // namespace

Tensor generate_shapes(const SyntheticShapesSpec& spec) {
  require(spec.resolution >= 8, ErrorKind::InvalidArgument,
          "generate_shapes: resolution must be >= 8");
  require(spec.n_samples >= 0, ErrorKind::InvalidArgument,
          "generate_shapes: negative sample count");
  require(spec.palette_size >= 2, ErrorKind::InvalidArgument,
          "generate_shapes: palette needs at least 2 colors");

  Rng root(spec.seed);
  Rng palette_rng = root.fork(0);
  Rng stream = root.fork(1);

  std::vector<Color> palette(static_cast<size_t>(spec.palette_size));
  for (auto& c : palette) {
    c.r = static_cast<float>(palette_rng.below(256)) / 255.0f;
    c.g = static_cast<float>(palette_rng.below(256)) / 255.0f;
    c.b = static_cast<float>(palette_rng.below(256)) / 255.0f;
  }

  int res = spec.resolution;
  int64_t rs = static_cast<int64_t>(res) * kSuper;  // supersampled extent
  Tensor out({spec.n_samples, 3, res, res});
  size_t img_stride = 3 * static_cast<size_t>(res) * res;
  size_t plane = static_cast<size_t>(res) * res;

  for (int n = 0; n < spec.n_samples; ++n) {
    float* img = out.data() + static_cast<size_t>(n) * img_stride;
    size_t bg_idx = stream.below(static_cast<uint64_t>(spec.palette_size));
    const Color& bg = palette[bg_idx];
    for (size_t i = 0; i < plane; ++i) {
      img[i] = bg.r;
      img[i + plane] = bg.g;
      img[i + 2 * plane] = bg.b;
    }

    int n_shapes = 1 + static_cast<int>(stream.below(3));
    for (int s = 0; s < n_shapes; ++s) {
      size_t ci =
          (bg_idx + 1 + stream.below(static_cast<uint64_t>(spec.palette_size - 1))) %
          static_cast<uint64_t>(spec.palette_size);
      const Color& col = palette[ci];
      int kind = static_cast<int>(stream.below(3));
      if (kind == 0) {  // rectangle
        int64_t x0 = static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs * 3 / 4)));
        int64_t y0 = static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs * 3 / 4)));
        int64_t w = 2 * kSuper + static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs / 2)));
        int64_t h = 2 * kSuper + static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs / 2)));
        int64_t x1 = std::min(x0 + w, rs);
        int64_t y1 = std::min(y0 + h, rs);
        blend_shape(img, res, col, [=](int64_t x, int64_t y) {
          return x >= x0 && x < x1 && y >= y0 && y < y1;
        });
      } else if (kind == 1) {  // circle
        int64_t cx = static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs)));
        int64_t cy = static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs)));
        int64_t r = 2 * kSuper + static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs / 3)));
        int64_t r2 = r * r;
        blend_shape(img, res, col, [=](int64_t x, int64_t y) {
          return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r2;
        });
      } else {  // triangle
        IPoint v[3];
        for (auto& p : v) {
          p.x = static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs)));
          p.y = static_cast<int64_t>(stream.below(static_cast<uint64_t>(rs)));
        }
        blend_shape(img, res, col, [=](int64_t x, int64_t y) {
          IPoint p{x, y};
          int64_t c0 = cross(v[0], v[1], p);
          int64_t c1 = cross(v[1], v[2], p);
          int64_t c2 = cross(v[2], v[0], p);
          bool all_nonneg = c0 >= 0 && c1 >= 0 && c2 >= 0;
          bool all_nonpos = c0 <= 0 && c1 <= 0 && c2 <= 0;
          return all_nonneg || all_nonpos;
        });
      }
    }
  }
  return out;
}

Tensor read_cifar_binary(const std::string& path,
                         std::vector<uint8_t>* labels) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  require(f.good(), ErrorKind::Io, "cannot open CIFAR file: " + path);
  std::streamsize size = f.tellg();
  f.seekg(0);
  constexpr std::streamsize kRecord = 3073;
  require(size % kRecord == 0, ErrorKind::BadFormat,
          "CIFAR file size " + std::to_string(size) +
              " is not a multiple of 3073: " + path);
  int n = static_cast<int>(size / kRecord);
  Tensor out({n, 3, 32, 32});
  if (labels) labels->resize(static_cast<size_t>(n));
  std::vector<unsigned char> rec(static_cast<size_t>(kRecord));
  for (int i = 0; i < n; ++i) {
    f.read(reinterpret_cast<char*>(rec.data()), kRecord);
    require(f.gcount() == kRecord, ErrorKind::BadFormat,
            "truncated CIFAR record in " + path);
    if (labels) (*labels)[static_cast<size_t>(i)] = rec[0];
    float* dst = out.data() + static_cast<size_t>(i) * 3072;
    for (size_t j = 0; j < 3072; ++j)
      dst[j] = static_cast<float>(rec[j + 1]) / 255.0f;
  }
  return out;
}

Tensor make_logo(int h, int w, int variant) {
  require(h > 0 && w > 0, ErrorKind::InvalidArgument, "make_logo: bad size");
  Tensor logo({3, h, w});
  size_t plane = static_cast<size_t>(h) * w;
  Color bg, ring, mark;
  if (variant % 2 == 0) {
    bg = {0.85f, 0.10f, 0.55f};    // magenta field
    ring = {1.00f, 1.00f, 1.00f};  // white disc
    mark = {0.05f, 0.10f, 0.60f};  // navy square
  } else {
    bg = {0.05f, 0.75f, 0.75f};    // teal field
    ring = {0.05f, 0.05f, 0.05f};  // dark disc
    mark = {1.00f, 0.90f, 0.10f};  // yellow square
  }
  int64_t cx = w, cy = h;  // center in half-pixel units (2x grid)
  int64_t r = static_cast<int64_t>(std::min(h, w)) - 1;  // disc radius (2x)
  int64_t sq = std::min(h, w) / 2;                       // square half-side (2x)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int64_t px = 2 * x + 1, py = 2 * y + 1;
      int64_t d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy);
      Color c = bg;
      if (d2 <= r * r) c = ring;
      if (std::llabs(px - cx) <= sq && std::llabs(py - cy) <= sq) c = mark;
      size_t i = static_cast<size_t>(y) * w + x;
      logo[i] = c.r;
      logo[i + plane] = c.g;
      logo[i + 2 * plane] = c.b;
    }
  }
  return logo;
}

}  // namespace gmk
