#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scenegen {

// splitmix64; used to derive independent child seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream seed for (master seed, stream index) pairs.
inline std::uint64_t splitmix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  return splitmix64(s);
}

// Deterministic RNG wrapper. Sampling routines are implemented in-repo so a
// seed produces the same stream regardless of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  // Standard normal via Marsaglia polar method with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Derive an independent child generator; (seed, tag) pairs map to
  // disjoint streams.
  Rng fork(std::uint64_t tag) {
    std::uint64_t s = gen_() ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
    return Rng(splitmix64(s));
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scenegen
