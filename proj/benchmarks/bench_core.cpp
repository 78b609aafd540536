#include <benchmark/benchmark.h>

#include <vector>

#include "gmk/data.hpp"
#include "gmk/losses.hpp"
#include "gmk/metrics.hpp"
#include "gmk/nn/layers.hpp"
#include "gmk/nn/models.hpp"
#include "gmk/rng.hpp"
#include "gmk/tensor.hpp"

using namespace gmk;

namespace {

Tensor random_image(std::vector<int> shape, uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<float>(rng.uniform());
  return t;
}

void BM_Ssim32(benchmark::State& state) {
  Tensor a = random_image({3, 32, 32}, 1);
  Tensor b = random_image({3, 32, 32}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim32);

void BM_SsimGrad32(benchmark::State& state) {
  Tensor a = random_image({3, 32, 32}, 1);
  Tensor b = random_image({3, 32, 32}, 2);
  Tensor grad;
  for (auto _ : state) benchmark::DoNotOptimize(ssim_with_grad(a, b, &grad));
}
BENCHMARK(BM_SsimGrad32);

void BM_ConvForward(benchmark::State& state) {
  Rng rng(3);
  nn::Conv2d conv("c", 16, 32, 4, 2, 1, false, rng);
  Tensor x = random_image({16, 16, 16, 16}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x, true));
}
BENCHMARK(BM_ConvForward);

void BM_GeneratorStep(benchmark::State& state) {
  Rng rng(5);
  nn::GeneratorConfig cfg;
  cfg.widths = {32, 16, 8};
  nn::Generator gen("gen", cfg, rng);
  Rng zr(6);
  Tensor z({16, cfg.latent_dim});
  for (size_t i = 0; i < z.size(); ++i)
    z[i] = static_cast<float>(zr.normal());
  for (auto _ : state) {
    for (auto* p : gen.params()) p->zero_grad();
    Tensor out = gen.forward(z, true);
    Tensor grad(out.shape());
    grad.fill(1.0f / static_cast<float>(out.size()));
    benchmark::DoNotOptimize(gen.backward(grad));
  }
}
BENCHMARK(BM_GeneratorStep);

void BM_FrechetProxy(benchmark::State& state) {
  Tensor a = random_image({128, 3, 32, 32}, 7);
  Tensor b = random_image({128, 3, 32, 32}, 8);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_proxy(a, b));
}
BENCHMARK(BM_FrechetProxy);

void BM_GenerateShapes(benchmark::State& state) {
  SyntheticShapesSpec spec;
  spec.resolution = 32;
  spec.n_samples = 64;
  spec.seed = 9;
  for (auto _ : state) benchmark::DoNotOptimize(generate_shapes(spec));
}
BENCHMARK(BM_GenerateShapes);

}  // namespace

BENCHMARK_MAIN();
