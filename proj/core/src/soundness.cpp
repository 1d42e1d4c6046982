#include "nanozk/soundness.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nanozk::chain {

Dyadic Dyadic::normalized() const {
  Dyadic d = *this;
  if (sgn(d.num) == 0) {
    d.log2_den = 0;
    return d;
  }
  while (d.log2_den > 0 && mpz_even_p(d.num.get_mpz_t())) {
    d.num >>= 1;
    d.log2_den--;
  }
  return d;
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
  Dyadic a = *this, b = o;
  uint32_t den = std::max(a.log2_den, b.log2_den);
  Bn an = a.num << (den - a.log2_den);
  Bn bn = b.num << (den - b.log2_den);
  return Dyadic{an + bn, den}.normalized();
}

Dyadic Dyadic::times(uint64_t k) const {
  return Dyadic{num * Bn(static_cast<unsigned long>(k)), log2_den}.normalized();
}

bool Dyadic::operator==(const Dyadic& o) const {
  Dyadic a = normalized(), b = o.normalized();
  return a.log2_den == b.log2_den && a.num == b.num;
}

double Dyadic::approx() const {
  if (sgn(num) == 0) return 0.0;
  // num * 2^-den via log2 so denominators far beyond 2^1024 survive
  size_t bits = mpz_sizeinbase(num.get_mpz_t(), 2);
  size_t shift = bits > 52 ? bits - 52 : 0;
  Bn top = num >> shift;
  double lg2 = std::log2(top.get_d()) + static_cast<double>(shift);
  return std::exp2(lg2 - static_cast<double>(log2_den));
}

std::string Dyadic::to_string() const {
  Dyadic d = normalized();
  return bn_to_dec(d.num) + " * 2^-" + std::to_string(d.log2_den);
}

std::string Dyadic::scientific() const {
  Dyadic d = normalized();
  if (sgn(d.num) == 0) return "0";
  // log10(num * 2^-den) computed in doubles; only the rendering is lossy.
  size_t bits = mpz_sizeinbase(d.num.get_mpz_t(), 2);
  size_t shift = bits > 52 ? bits - 52 : 0;
  Bn top = d.num >> shift;
  double log10v = (std::log2(top.get_d()) + static_cast<double>(shift) -
                   static_cast<double>(d.log2_den)) *
                  std::log10(2.0);
  double e = std::floor(log10v);
  double mant = std::pow(10.0, log10v - e);
  // keep one decimal
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1fe%+d", mant, static_cast<int>(e));
  return std::string(buf);
}

SoundnessBudget soundness_budget(uint32_t num_blocks, uint32_t lambda) {
  std::vector<Dyadic> eps(num_blocks + 2, Dyadic::pow2(static_cast<int32_t>(lambda)));
  return soundness_budget(num_blocks, lambda, eps);
}

SoundnessBudget soundness_budget(uint32_t num_blocks, uint32_t lambda,
                                 const std::vector<Dyadic>& eps_layer) {
  if (num_blocks < 1) throw std::invalid_argument("need at least one block");
  if (lambda != 80 && lambda != 128 && lambda != 256)
    throw std::invalid_argument("lambda must be one of 80, 128, 256");
  if (eps_layer.size() != num_blocks + 2)
    throw std::invalid_argument("need one eps term per proof (L+2)");
  SoundnessBudget b;
  b.lambda = lambda;
  b.eps_layer = eps_layer;
  b.eps_hash = Dyadic::pow2(static_cast<int32_t>(lambda));
  b.hash_terms = num_blocks + 2;
  Dyadic total = Dyadic::zero();
  for (const auto& e : eps_layer) total = total + e;
  total = total + b.eps_hash.times(b.hash_terms);
  b.eps_total = total.normalized();
  return b;
}

}  // namespace nanozk::chain
