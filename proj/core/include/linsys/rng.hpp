#pragma once

#include <cmath>
#include <cstdint>

namespace linsys {

// splitmix64 finalizer. Bijective on uint64, used both as the PRNG step and
// as the stable stream-derivation hash, so seeded output is reproducible
// across platforms and across runs regardless of thread scheduling.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable 64-bit hash of a seed plus stream coordinates, e.g.
// (base_seed, grid_index, rep). Order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0x5851f42d4c957f2dULL) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return h;
}

// Counter-based splittable generator: state advances by the splitmix64
// increment, output is the finalizer of the counter. split() derives an
// independent stream without sharing state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() { return mix64(state_ += 0x9e3779b97f4a7c15ULL); }

  Rng split(std::uint64_t stream) const {
    return Rng(derive_seed(state_, stream));
  }

  // Uniform on (0, 1]; never returns 0 so log(u) is safe.
  double uniform() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  // Box-Muller with an explicit formula; avoids the implementation-defined
  // std::normal_distribution so seeded draws are stable.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n), n >= 1. Rejection-free modulo with 64-bit
  // multiply-shift; bias is negligible for n << 2^64 and the result is
  // platform-stable, which matters more here.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace linsys
