#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace ergolab {

// splitmix64 step; used to derive per-worker streams from (seed, worker index)
// so serial and fanned-out runs agree.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t worker) {
  std::uint64_t z = seed + (worker + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic generator: all distributions are hand-rolled on top of the
// raw 64-bit stream because the std:: distribution algorithms are
// implementation-defined and would break byte-identical reruns.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0,1) with 53 random bits
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::next_below: zero bound");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % bound;
  }

  std::uint64_t poisson(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("Rng::poisson: lambda must be positive");
    return lambda <= 30.0 ? poisson_inversion(lambda) : poisson_ptrs(lambda);
  }

 private:
  // Knuth product-of-uniforms inversion; fine up to lambda ~ 30.
  std::uint64_t poisson_inversion(double lambda) {
    const double floor_p = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    for (;;) {
      p *= next_unit();
      if (p <= floor_p) return k;
      ++k;
    }
  }

  // Hormann's PTRS transformed rejection; needs no normal approximation.
  std::uint64_t poisson_ptrs(double lambda) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = next_unit() - 0.5;
      const double v = next_unit();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      const double rhs = kf * loglam - lambda - std::lgamma(kf + 1.0);
      if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
  }

  std::mt19937_64 gen_;
};

}  // namespace ergolab
