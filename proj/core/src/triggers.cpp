#include "gmk/triggers.hpp"

#include <fstream>

#include "gmk/error.hpp"
#include "gmk/image_io.hpp"
#include "gmk/rng.hpp"
#include "json.hpp"

namespace gmk {

using nlohmann::json;

LatentTriggerSpec LatentTriggerSpec::generate(int latent_dim, int n, double c,
                                              uint64_t seed) {
  require(latent_dim > 0, ErrorKind::InvalidArgument, "latent_dim must be > 0");
  require(n >= 1 && n < latent_dim, ErrorKind::InvalidArgument,
          "trigger mask size n must satisfy 1 <= n < latent_dim");
  LatentTriggerSpec spec;
  spec.latent_dim = latent_dim;
  spec.n = n;
  spec.c = c;
  spec.seed = seed;
  spec.mask.assign(static_cast<size_t>(latent_dim), 1);
  // Fisher-Yates prefix over index array: first n entries become the mask.
  std::vector<int> idx(static_cast<size_t>(latent_dim));
  for (int i = 0; i < latent_dim; ++i) idx[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(latent_dim - i)));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    spec.mask[static_cast<size_t>(idx[static_cast<size_t>(i)])] = 0;
  }
  return spec;
}

std::vector<int> LatentTriggerSpec::masked_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i] == 0) out.push_back(static_cast<int>(i));
  return out;
}

ImageTriggerSpec ImageTriggerSpec::generate(int channels, Region region,
                                            uint64_t seed, double range_lo,
                                            double range_hi) {
  require(channels > 0 && region.h > 0 && region.w > 0,
          ErrorKind::InvalidArgument, "image trigger: bad patch shape");
  ImageTriggerSpec spec;
  spec.paste_region = region;
  spec.seed = seed;
  spec.range_lo = range_lo;
  spec.range_hi = range_hi;
  spec.noise_patch = Tensor({channels, region.h, region.w});
  Rng rng(seed);
  for (size_t i = 0; i < spec.noise_patch.size(); ++i)
    spec.noise_patch[i] = static_cast<float>(rng.uniform(range_lo, range_hi));
  return spec;
}

WatermarkAsset WatermarkAsset::load_png(const std::string& path, Region region,
                                        const std::string& name) {
  require(region.h > 0 && region.w > 0, ErrorKind::InvalidArgument,
          "watermark asset: empty region");
  WatermarkAsset asset;
  asset.image = resample_nearest(read_png(path), region.h, region.w);
  asset.paste_region = region;
  asset.name = name;
  return asset;
}

namespace {

void check_region_inside(const Region& r, int h, int w, const char* what) {
  require(r.row >= 0 && r.col >= 0 && r.h >= 0 && r.w >= 0 &&
              r.row + r.h <= h && r.col + r.w <= w,
          ErrorKind::InvalidArgument,
          std::string(what) + ": paste region out of bounds");
}

json region_to_json(const Region& r) {
  return {{"row", r.row}, {"col", r.col}, {"h", r.h}, {"w", r.w}};
}

Region region_from_json(const json& j) {
  return Region{j.at("row").get<int>(), j.at("col").get<int>(),
                j.at("h").get<int>(), j.at("w").get<int>()};
}

}  // namespace

Tensor make_latent_trigger(const Tensor& z, const LatentTriggerSpec& spec) {
  require(z.rank() == 1 && z.dim(0) == spec.latent_dim,
          ErrorKind::ShapeMismatch, "make_latent_trigger: dimension mismatch");
  Tensor out = z;
  for (int i = 0; i < spec.latent_dim; ++i)
    if (spec.mask[static_cast<size_t>(i)] == 0)
      out[static_cast<size_t>(i)] = static_cast<float>(spec.c);
  return out;
}

Tensor make_image_trigger(const Tensor& x, const ImageTriggerSpec& spec) {
  require(x.rank() == 3, ErrorKind::ShapeMismatch,
          "make_image_trigger: expected CHW image");
  const Region& r = spec.paste_region;
  check_region_inside(r, x.dim(1), x.dim(2), "make_image_trigger");
  if (r.h == 0 || r.w == 0) return x;
  require(spec.noise_patch.dim(0) == x.dim(0) && spec.noise_patch.dim(1) == r.h &&
              spec.noise_patch.dim(2) == r.w,
          ErrorKind::ShapeMismatch, "make_image_trigger: patch/region mismatch");
  Tensor out = x;
  int H = x.dim(1), W = x.dim(2);
  for (int c = 0; c < x.dim(0); ++c)
    for (int y = 0; y < r.h; ++y)
      for (int xx = 0; xx < r.w; ++xx)
        out[(static_cast<size_t>(c) * H + r.row + y) * W + r.col + xx] =
            spec.noise_patch[(static_cast<size_t>(c) * r.h + y) * r.w + xx];
  return out;
}

Tensor paste_watermark(const Tensor& y, const WatermarkAsset& asset) {
  require(y.rank() == 3, ErrorKind::ShapeMismatch,
          "paste_watermark: expected CHW image");
  const Region& r = asset.paste_region;
  check_region_inside(r, y.dim(1), y.dim(2), "paste_watermark");
  require(asset.image.dim(0) == y.dim(0) && asset.image.dim(1) == r.h &&
              asset.image.dim(2) == r.w,
          ErrorKind::ShapeMismatch, "paste_watermark: asset/region mismatch");
  Tensor out = y;
  int H = y.dim(1), W = y.dim(2);
  for (int c = 0; c < y.dim(0); ++c)
    for (int yy = 0; yy < r.h; ++yy)
      for (int xx = 0; xx < r.w; ++xx)
        out[(static_cast<size_t>(c) * H + r.row + yy) * W + r.col + xx] =
            asset.image[(static_cast<size_t>(c) * r.h + yy) * r.w + xx];
  return out;
}

Tensor build_trigger_batch(const Tensor& inputs, const TriggerSpec& spec) {
  if (spec.kind == TriggerSpec::Kind::Latent) {
    require(inputs.rank() == 2, ErrorKind::ShapeMismatch,
            "build_trigger_batch: latent batch must be [N,D]");
    int n = inputs.dim(0), d = inputs.dim(1);
    require(d == spec.latent.latent_dim, ErrorKind::ShapeMismatch,
            "build_trigger_batch: latent dimension mismatch");
    Tensor out = inputs;
    for (int s = 0; s < n; ++s)
      for (int i = 0; i < d; ++i)
        if (spec.latent.mask[static_cast<size_t>(i)] == 0)
          out[static_cast<size_t>(s) * d + i] =
              static_cast<float>(spec.latent.c);
    return out;
  }
  require(inputs.rank() == 4, ErrorKind::ShapeMismatch,
          "build_trigger_batch: image batch must be [N,C,H,W]");
  int n = inputs.dim(0), c = inputs.dim(1), h = inputs.dim(2), w = inputs.dim(3);
  Tensor out = inputs;
  Tensor single({c, h, w});
  size_t stride = static_cast<size_t>(c) * h * w;
  for (int s = 0; s < n; ++s) {
    std::copy(inputs.data() + s * stride, inputs.data() + (s + 1) * stride,
              single.data());
    Tensor t = make_image_trigger(single, spec.image);
    std::copy(t.data(), t.data() + stride, out.data() + s * stride);
  }
  return out;
}

Tensor paste_watermark_batch(const Tensor& batch, const WatermarkAsset& asset) {
  require(batch.rank() == 4, ErrorKind::ShapeMismatch,
          "paste_watermark_batch: expected [N,C,H,W]");
  int n = batch.dim(0), c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  Tensor out = batch;
  Tensor single({c, h, w});
  size_t stride = static_cast<size_t>(c) * h * w;
  for (int s = 0; s < n; ++s) {
    std::copy(batch.data() + s * stride, batch.data() + (s + 1) * stride,
              single.data());
    Tensor t = paste_watermark(single, asset);
    std::copy(t.data(), t.data() + stride, out.data() + s * stride);
  }
  return out;
}

std::string TriggerSpec::to_json() const {
  json j;
  if (kind == Kind::Latent) {
    j["kind"] = "latent";
    j["latent"] = {{"latent_dim", latent.latent_dim},
                   {"n", latent.n},
                   {"c", latent.c},
                   {"seed", latent.seed},
                   {"mask_indices", latent.masked_indices()}};
  } else {
    j["kind"] = "image";
    j["image"] = {{"seed", image.seed},
                  {"channels", image.noise_patch.dim(0)},
                  {"range_lo", image.range_lo},
                  {"range_hi", image.range_hi},
                  {"paste_region", region_to_json(image.paste_region)}};
  }
  return j.dump(2);
}

TriggerSpec TriggerSpec::from_json(const std::string& text) {
  json j = json::parse(text);
  TriggerSpec spec;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "latent") {
    spec.kind = Kind::Latent;
    const json& l = j.at("latent");
    spec.latent = LatentTriggerSpec::generate(
        l.at("latent_dim").get<int>(), l.at("n").get<int>(),
        l.at("c").get<double>(), l.at("seed").get<uint64_t>());
    // audit: the explicit indices in the file must match the seed
    if (l.contains("mask_indices")) {
      auto stored = l.at("mask_indices").get<std::vector<int>>();
      require(stored == spec.latent.masked_indices(), ErrorKind::BadFormat,
              "trigger spec: mask_indices do not match seed regeneration");
    }
  } else if (kind == "image") {
    spec.kind = Kind::Image;
    const json& im = j.at("image");
    spec.image = ImageTriggerSpec::generate(
        im.at("channels").get<int>(), region_from_json(im.at("paste_region")),
        im.at("seed").get<uint64_t>(), im.at("range_lo").get<double>(),
        im.at("range_hi").get<double>());
  } else {
    throw Error(ErrorKind::BadFormat, "trigger spec: unknown kind " + kind);
  }
  return spec;
}

void TriggerSpec::save(const std::string& path) const {
  std::ofstream os(path);
  require(os.good(), ErrorKind::Io, "trigger spec: cannot write " + path);
  os << to_json() << "\n";
}

TriggerSpec TriggerSpec::load(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrorKind::Io, "trigger spec: cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace gmk
