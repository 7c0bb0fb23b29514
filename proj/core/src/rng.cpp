#include "ioclqr/rng.hpp"

#include <cmath>

namespace ioclqr::rng {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t lane0, std::uint64_t lane1,
               std::uint64_t lane2) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ (lane0 + 0xd1b54a32d192ed03ULL));
  k = mix64(k ^ (lane1 + 0x8cb92ba72f3d8dd7ULL));
  k = mix64(k ^ (lane2 + 0xa24baed4963ee407ULL));
  key_ = k;
}

std::uint64_t Stream::next_u64() {
  return mix64(key_ ^ (++counter_ * 0xda942042e4dd58b5ULL));
}

double Stream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t Stream::next_below(std::uint64_t bound) {
  // Lemire multiply-shift; bias below 2^-64 is irrelevant here.
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

double Stream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1]: never feed log() a zero.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace ioclqr::rng
