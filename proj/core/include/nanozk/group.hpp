#pragma once

#include <cstdint>
#include <vector>

#include "nanozk/bignum.hpp"
#include "nanozk/bytes.hpp"
#include "nanozk/sha256.hpp"

namespace nanozk::zk {

// Schnorr group: order-q subgroup (the quadratic residues) of Z_p^* for a
// safe prime p = 2q + 1. Elements serialize as fixed-width big-endian; the
// subgroup check is a Jacobi symbol, so verifiers can reject malformed
// elements cheaply.
struct GroupParams {
  uint32_t bits = 2048;
  Bn p;                     // safe prime modulus
  Bn q;                     // (p-1)/2, prime group order
  std::vector<Bn> gens;     // vector-commitment bases g[0..n)
  Bn h;                     // blinding base
  Bn u;                     // inner-product base
  Bytes seed;               // derivation seed (nothing-up-my-sleeve)

  size_t element_width() const { return (bits + 7) / 8; }
  size_t scalar_width() const;  // max(32, ceil(qbits/8))

  bool in_group(const Bn& x) const;  // x in [1, p) and Jacobi(x|p) == 1
  Bn mul(const Bn& a, const Bn& b) const { return a * b % p; }
  Bn pow(const Bn& base, const Bn& e) const;  // handles negative-free reduced exps
  Bn inv(const Bn& a) const { return bn_invmod(a, p); }

  Bytes serialize() const;
  static GroupParams deserialize(const Bytes& b);
  Digest digest() const;
};

// Deterministic transparent setup. bits selects a preset modulus:
//   16   -> the fixed test group p=23, q=11 (generators still seed-derived)
//   512/1024/2048 -> hardcoded safe primes (1024/2048 from the standard
//                    MODP groups; 512 generated once for fast bench runs)
// Generators are H(seed || label || i)^2 mod p, rejecting 1.
GroupParams group_setup(const Bytes& seed, uint32_t bits, size_t num_gens);

// Straus/Shamir multi-exponentiation with 4-bit windows, shared squaring
// chain across terms. Exponents must already be reduced into [0, q).
Bn multi_exp(const GroupParams& g, const std::vector<const Bn*>& bases,
             const std::vector<Bn>& exps);
Bn multi_exp(const GroupParams& g, const std::vector<Bn>& bases, const std::vector<Bn>& exps);

// Field helpers modulo q.
Bn mod_q(const GroupParams& g, const Bn& x);
Bn lift_i64(const GroupParams& g, int64_t v);  // sign-lifted fixed-point code

}  // namespace nanozk::zk
