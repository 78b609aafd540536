#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "gmk/data.hpp"
#include "gmk/error.hpp"

using namespace gmk;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const std::string& name) {
  fs::path dir =
      fs::temp_directory_path() / ("gmk_data_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("synthetic shapes are deterministic and in range") {
  SyntheticShapesSpec spec;
  spec.resolution = 32;
  spec.n_samples = 16;
  spec.seed = 11;
  Tensor a = generate_shapes(spec);
  Tensor b = generate_shapes(spec);
  REQUIRE(a.shape() == std::vector<int>({16, 3, 32, 32}));
  CHECK(a.equals(b));  // bit-exact regeneration
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] >= 0.0f);
    CHECK(a[i] <= 1.0f);
  }

  spec.seed = 12;
  Tensor c = generate_shapes(spec);
  CHECK_FALSE(a.equals(c));
}

TEST_CASE("shapes dataset is not monochrome") {
  SyntheticShapesSpec spec;
  spec.resolution = 16;
  spec.n_samples = 64;
  spec.seed = 3;
  Tensor batch = generate_shapes(spec);
  int varied = 0;
  size_t img_stride = 3 * 16 * 16;
  for (int n = 0; n < 64; ++n) {
    const float* img = batch.data() + static_cast<size_t>(n) * img_stride;
    std::set<float> reds(img, img + 16 * 16);
    if (reds.size() > 1) ++varied;
  }
  CHECK(varied > 48);  // almost every sample has at least one visible shape
}

TEST_CASE("shapes rejects bad specs, accepts zero samples") {
  SyntheticShapesSpec spec;
  spec.resolution = 4;
  spec.n_samples = 1;
  CHECK_THROWS_AS(generate_shapes(spec), Error);
  spec.resolution = 16;
  spec.palette_size = 1;
  CHECK_THROWS_AS(generate_shapes(spec), Error);
  spec.palette_size = 8;
  spec.n_samples = 0;
  Tensor empty = generate_shapes(spec);
  CHECK(empty.size() == 0);
  CHECK(empty.dim(0) == 0);
}

TEST_CASE("CIFAR binary reader decodes the standard record layout") {
  // Two 3073-byte records with a simple arithmetic byte pattern as oracle.
  std::string path = temp_file("cifar2.bin");
  std::vector<unsigned char> bytes(2 * 3073);
  for (size_t r = 0; r < 2; ++r)
    for (size_t i = 0; i < 3073; ++i)
      bytes[r * 3073 + i] = static_cast<unsigned char>((r * 7 + i * 13) % 256);
  {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  }

  std::vector<uint8_t> labels;
  Tensor imgs = read_cifar_binary(path, &labels);
  REQUIRE(imgs.shape() == std::vector<int>({2, 3, 32, 32}));
  REQUIRE(labels.size() == 2);
  CHECK(labels[0] == 0);       // (0*7 + 0*13) % 256
  CHECK(labels[1] == 7);       // (1*7 + 0*13) % 256

  // pixel (record, channel, y, x) comes from byte 1 + c*1024 + y*32 + x
  auto expect = [&](int r, int c, int y, int x) {
    size_t idx = static_cast<size_t>(r) * 3073 + 1 +
                 static_cast<size_t>(c) * 1024 + static_cast<size_t>(y) * 32 + x;
    return static_cast<float>(bytes[idx]) / 255.0f;
  };
  CHECK(imgs.at(0, 0, 0, 0) == expect(0, 0, 0, 0));
  CHECK(imgs.at(0, 1, 5, 7) == expect(0, 1, 5, 7));
  CHECK(imgs.at(1, 2, 31, 31) == expect(1, 2, 31, 31));
  CHECK(imgs.at(1, 0, 12, 3) == expect(1, 0, 12, 3));
  for (size_t i = 0; i < imgs.size(); ++i) {
    CHECK(imgs[i] >= 0.0f);
    CHECK(imgs[i] <= 1.0f);
  }
}

TEST_CASE("CIFAR reader rejects truncated files") {
  std::string path = temp_file("cifar_bad.bin");
  std::vector<char> bytes(3073 + 100, 'x');
  {
    std::ofstream f(path, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(read_cifar_binary(path), Error);
  CHECK_THROWS_AS(read_cifar_binary(temp_file("missing.bin")), Error);
}

TEST_CASE("logo variants are deterministic and distinct") {
  Tensor a = make_logo(16, 16, 0);
  Tensor b = make_logo(16, 16, 0);
  REQUIRE(a.shape() == std::vector<int>({3, 16, 16}));
  CHECK(a.equals(b));
  Tensor other = make_logo(16, 16, 1);
  CHECK_FALSE(a.equals(other));
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] >= 0.0f);
    CHECK(a[i] <= 1.0f);
  }
  // center pixel carries the mark color, a corner carries the field color
  CHECK(a.at(0, 8, 8) == 0.05f);
  CHECK(a.at(0, 0, 0) == 0.85f);
  CHECK_THROWS_AS(make_logo(0, 4), Error);
}
