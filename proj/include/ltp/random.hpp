#pragma once

#include <cstdint>
#include <random>

namespace ltp {

/// Deterministic uniform sampling. mt19937_64 has a standardized sequence;
/// we convert to doubles ourselves because std::uniform_real_distribution is
/// implementation-defined and would break byte-identical reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ltp
