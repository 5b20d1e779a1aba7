#include "rulkit/rng.hpp"

#include <cmath>

namespace rulkit {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u clamped away from 0 so log stays finite.
  double u = uniform();
  if (u < 1e-300) u = 1e-300;
  double v = uniform();
  double r = std::sqrt(-2.0 * std::log(u));
  double a = 6.283185307179586476925286766559 * v;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) return 0;
  // Rejection sampling keeps the distribution exactly uniform.
  std::uint64_t limit = ~0ULL - (~0ULL % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

void Rng::shuffle(std::vector<std::size_t>& v) {
  if (v.empty()) return;
  for (std::size_t i = v.size() - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_int(i + 1));
    std::swap(v[i], v[j]);
  }
}

}  // namespace rulkit
