#ifndef GMK_RNG_HPP
#define GMK_RNG_HPP

#include <cmath>
#include <cstdint>

namespace gmk {

// Deterministic, platform-independent PRNG (splitmix64 core).
// std:: distributions are implementation-defined, so sampling is done
// explicitly here to keep checkpoints reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  // Uniform integer in [0, n). Rejection-free modulo is fine here: n is
  // tiny compared to 2^64 so the bias is unmeasurable.
  uint64_t below(uint64_t n) { return next_u64() % n; }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (explicit, portable).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Derive an independent stream; used to give each component of a run
  // (data order, trigger sampling, init, ...) its own seed.
  Rng fork(uint64_t stream_id) {
    Rng r(state_ ^ (0xd1342543de82ef95ULL * (stream_id + 1)));
    r.next_u64();
    return r;
  }

 private:
  uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace gmk

#endif
