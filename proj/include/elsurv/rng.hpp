#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace elsurv {

// splitmix64-based generator. Substreams are derived by hashing
// (seed, stream, substream), so every parallel task draws from a stream that
// depends only on its index, never on scheduling order. All distribution
// transforms are hand-rolled so that sequences are identical across
// platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(mix(seed + kGamma) ^ mix(stream + 0x6A09E667F3BCC909ULL))) {}

  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream)
      : Rng(mix(seed + kGamma) ^ mix(stream + 0x6A09E667F3BCC909ULL),
            substream) {}

  std::uint64_t u64() {
    state_ += kGamma;
    return mix_out(state_);
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform_pos() {
    return (static_cast<double>(u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller, one variate per pair of uniforms
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  double chisq(int df) {
    double s = 0.0;
    for (int j = 0; j < df; ++j) {
      double z = normal();
      s += z * z;
    }
    return s;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // integer in [0, n); n <= 2^53 so the modulo-free multiply is exact enough
  std::int64_t uniform_int(std::int64_t n) {
    return static_cast<std::int64_t>(uniform() * static_cast<double>(n));
  }

  // Fisher-Yates permutation of 0..n-1
  std::vector<int> permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(uniform_int(i + 1));
      std::swap(idx[i], idx[j]);
    }
    return idx;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix_out(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t z) { return mix_out(z + kGamma); }

  std::uint64_t state_;
};

}  // namespace elsurv
