#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "nanozk/bytes.hpp"

namespace nanozk {

using Bn = mpz_class;

inline Bn bn_from_i64(int64_t v) {
  Bn b;
  if (v >= 0) {
    b = Bn(static_cast<unsigned long>(v));
  } else {
    b = Bn(static_cast<unsigned long>(-(v + 1)));
    b += 1;
    b = -b;
  }
  return b;
}

Bn bn_powm(const Bn& base, const Bn& exp, const Bn& mod);
Bn bn_invmod(const Bn& a, const Bn& mod);  // throws std::domain_error if not invertible
// Legendre/Jacobi symbol of a mod odd prime p: 1, -1 or 0.
int bn_jacobi(const Bn& a, const Bn& p);
bool bn_probab_prime(const Bn& n);

// Fixed-width big-endian encoding; throws std::range_error if the value
// does not fit.
Bytes bn_to_be(const Bn& v, size_t width);
Bn bn_from_be(const uint8_t* p, size_t n);
inline Bn bn_from_be(const Bytes& b) { return bn_from_be(b.data(), b.size()); }

size_t bn_bit_length(const Bn& v);
std::string bn_to_dec(const Bn& v);
Bn bn_from_dec(const std::string& s);
std::string bn_to_hex_str(const Bn& v);
Bn bn_from_hex_str(const std::string& s);

}  // namespace nanozk
