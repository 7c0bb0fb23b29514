#pragma once

#include <cstdint>
#include <utility>

namespace ioclqr::rng {

/// splitmix64 finalizer; the basis of all randomness in this project.
std::uint64_t mix64(std::uint64_t z);

/// Deterministic counter-based random stream.
///
/// The stream key is derived from a seed plus up to three lane indices
/// (e.g. agent id, time step), so draws are a pure function of
/// (seed, lanes, counter) and independent of evaluation order across
/// streams. All floating-point conversion is done from raw 64-bit words,
/// not std::uniform_real_distribution, so sequences are stable across
/// standard libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t lane0 = 0,
                  std::uint64_t lane1 = 0, std::uint64_t lane2 = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Unbiased-enough (2^-64 bias) integer in [0, bound); bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);

  /// Standard normal via Box-Muller on the raw uniform words.
  double gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ioclqr::rng
