#pragma once

#include <cstdint>
#include <vector>

namespace rulkit {

// splitmix64 finalizer; the one fixed-point-free mixer used everywhere we
// need platform-stable pseudo-randomness.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sequential generator with reproducible, implementation-independent output.
// std::mt19937 + distributions would tie results to the standard library
// build, which breaks bit-identical reruns across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (spare value cached).
  double normal();

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);

  // In-place Fisher-Yates shuffle of an index vector.
  void shuffle(std::vector<std::size_t>& v);

  // Derive an independent child stream; `tag` separates uses of one seed.
  Rng child(std::uint64_t tag) const { return Rng(mix64(state_ ^ mix64(tag))); }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stateless counter-based stream: the value at (key, counter) is independent
// of evaluation order, so dropout masks are reproducible no matter how the
// forward pass is scheduled.
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) {
  std::uint64_t z = mix64(mix64(key) ^ (counter * 0xda942042e4dd58b5ULL));
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// Key for a dropout draw: (global seed, layer id, step).
inline std::uint64_t dropout_key(std::uint64_t seed, std::uint64_t layer_id,
                                 std::uint64_t step) {
  return mix64(seed) ^ mix64(layer_id * 0x9e3779b97f4a7c15ULL + 1) ^
         mix64(step * 0xc2b2ae3d27d4eb4fULL + 2);
}

}  // namespace rulkit
