#include "nanozk/bignum.hpp"

#include <stdexcept>

namespace nanozk {

Bn bn_powm(const Bn& base, const Bn& exp, const Bn& mod) {
  Bn r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

Bn bn_invmod(const Bn& a, const Bn& mod) {
  Bn r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0)
    throw std::domain_error("value not invertible modulo given modulus");
  return r;
}

int bn_jacobi(const Bn& a, const Bn& p) { return mpz_jacobi(a.get_mpz_t(), p.get_mpz_t()); }

bool bn_probab_prime(const Bn& n) { return mpz_probab_prime_p(n.get_mpz_t(), 32) > 0; }

Bytes bn_to_be(const Bn& v, size_t width) {
  if (sgn(v) < 0) throw std::range_error("cannot encode negative value");
  size_t bits = mpz_sizeinbase(v.get_mpz_t(), 2);
  size_t need = (sgn(v) == 0) ? 0 : (bits + 7) / 8;
  if (need > width) throw std::range_error("value too wide for fixed-width encoding");
  Bytes out(width, 0);
  if (need > 0) {
    size_t count = 0;
    mpz_export(out.data() + (width - need), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

Bn bn_from_be(const uint8_t* p, size_t n) {
  Bn v;
  if (n > 0) mpz_import(v.get_mpz_t(), n, 1, 1, 1, 0, p);
  return v;
}

size_t bn_bit_length(const Bn& v) {
  if (sgn(v) == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

std::string bn_to_dec(const Bn& v) { return v.get_str(10); }
Bn bn_from_dec(const std::string& s) { return Bn(s, 10); }
std::string bn_to_hex_str(const Bn& v) { return v.get_str(16); }
Bn bn_from_hex_str(const std::string& s) { return Bn(s, 16); }

}  // namespace nanozk
