#pragma once

#include <cstdint>
#include <string>

#include "nanozk/bytes.hpp"
#include "nanozk/sha256.hpp"

namespace nanozk {

// Deterministic byte stream: SHA-256 in counter mode over (seed material, label).
// All randomness in the system flows through this so seeded runs are
// reproducible bit-for-bit across platforms (std:: distributions are not).
class SeededRng {
 public:
  SeededRng(uint64_t seed, const std::string& label);
  SeededRng(const Bytes& seed_material, const std::string& label);

  uint8_t next_byte();
  void fill(uint8_t* p, size_t n);
  Bytes bytes(size_t n);
  uint64_t next_u64();
  // Unbiased integer in [0, bound) via rejection sampling.
  uint64_t below(uint64_t bound);
  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform();
  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller on the deterministic uniform stream.
  double normal();

  // Independent child stream; children with distinct labels never collide.
  SeededRng fork(const std::string& label) const;

 private:
  Digest key_{};
  uint64_t counter_ = 0;
  Digest block_{};
  size_t block_pos_ = 32;  // forces refill on first use
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
  void refill();
};

}  // namespace nanozk
