#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanozk/bignum.hpp"

namespace nanozk::chain {

// Exact dyadic rational n / 2^log2_den. Soundness terms at 2^-128 scale
// underflow doubles, so the accounting stays in integer arithmetic.
struct Dyadic {
  Bn num;
  uint32_t log2_den = 0;

  static Dyadic zero() { return {Bn(0), 0}; }
  static Dyadic pow2(int32_t neg_exp) { return {Bn(1), static_cast<uint32_t>(neg_exp)}; }

  Dyadic normalized() const;
  Dyadic operator+(const Dyadic& o) const;
  Dyadic times(uint64_t k) const;
  bool operator==(const Dyadic& o) const;

  double approx() const;        // lossy, for display only
  std::string to_string() const;  // "M * 2^-D"
  std::string scientific() const;  // e.g. "2.0e-37"
};

struct SoundnessBudget {
  uint32_t lambda = 128;
  std::vector<Dyadic> eps_layer;  // one term per proof (L+2 of them)
  Dyadic eps_hash;                // negl(lambda) = 2^-lambda per collision point
  uint32_t hash_terms = 0;        // L+2 potential collision points
  Dyadic eps_total;               // sum eps_layer + hash_terms * eps_hash
};

// Theorem-style accounting: eps_total = sum_l eps_l + (L+2) * 2^-lambda with
// eps_l = 2^-lambda for each of the L+2 layer proofs by default.
SoundnessBudget soundness_budget(uint32_t num_blocks, uint32_t lambda);
SoundnessBudget soundness_budget(uint32_t num_blocks, uint32_t lambda,
                                 const std::vector<Dyadic>& eps_layer);

}  // namespace nanozk::chain
