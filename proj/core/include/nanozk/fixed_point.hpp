#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nanozk::fx {

// Fixed-point codec parameters. Values are stored as 64-bit signed codes,
// code = round(x * 2^frac_bits), ties away from zero.
struct FixedParams {
  int frac_bits = 16;

  void validate() const {
    if (frac_bits < 1 || frac_bits > 30)
      throw std::invalid_argument("frac_bits must be in [1, 30]");
  }
  double resolution() const { return std::ldexp(1.0, -frac_bits); }
  int64_t one() const { return int64_t{1} << frac_bits; }
  bool operator==(const FixedParams&) const = default;
};

// Round-half-away-from-zero division of acc by 2^frac_bits.
inline int64_t rescale_round(__int128 acc, int frac_bits) {
  __int128 half = __int128{1} << (frac_bits - 1);
  __int128 q = acc >= 0 ? (acc + half) >> frac_bits : -((-acc + half) >> frac_bits);
  if (q > INT64_MAX || q < INT64_MIN) throw std::range_error("fixed-point overflow in rescale");
  return static_cast<int64_t>(q);
}

// Round-half-away-from-zero division of acc by an integer divisor > 0.
inline int64_t div_round(__int128 acc, int64_t divisor) {
  __int128 d = divisor;
  __int128 half = d / 2;
  __int128 q = acc >= 0 ? (acc + half) / d : -((-acc + half) / d);
  if (q > INT64_MAX || q < INT64_MIN) throw std::range_error("fixed-point overflow in div");
  return static_cast<int64_t>(q);
}

inline int64_t to_fixed(double x, const FixedParams& params = {}) {
  if (!std::isfinite(x)) throw std::range_error("cannot encode non-finite value");
  double limit = std::ldexp(1.0, 62 - params.frac_bits);
  if (!(std::fabs(x) < limit)) throw std::range_error("value out of fixed-point range");
  double scaled = std::ldexp(x, params.frac_bits);
  // llround rounds halfway cases away from zero, matching the global tie rule.
  return std::llround(scaled);
}

inline double from_fixed(int64_t code, const FixedParams& params = {}) {
  return std::ldexp(static_cast<double>(code), -params.frac_bits);
}

// Fixed * fixed with rescale, both operands sharing frac_bits.
inline int64_t fixed_mul(int64_t a, int64_t b, const FixedParams& params = {}) {
  return rescale_round(static_cast<__int128>(a) * b, params.frac_bits);
}

// Uniform grid over [lo, hi] with n points; index 0 maps to lo and index
// n-1 maps to hi bit-exactly.
struct QuantGrid {
  double lo;
  double hi;
  uint32_t n = 1u << 16;

  QuantGrid(double lo_, double hi_, uint32_t n_ = 1u << 16) : lo(lo_), hi(hi_), n(n_) {
    if (!(lo < hi)) throw std::invalid_argument("grid requires lo < hi");
    if (n < 2) throw std::invalid_argument("grid requires n >= 2");
  }

  double point(uint32_t i) const {
    if (i == 0) return lo;
    if (i == n - 1) return hi;
    return lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
  }
  double step() const { return (hi - lo) / static_cast<double>(n - 1); }
  bool operator==(const QuantGrid&) const = default;
};

// Total by clamping: out-of-range x snaps to the nearest endpoint.
inline uint32_t quantize_index(double x, const QuantGrid& grid) {
  if (std::isnan(x)) x = grid.lo;
  double c = x < grid.lo ? grid.lo : (x > grid.hi ? grid.hi : x);
  double t = (c - grid.lo) * static_cast<double>(grid.n - 1) / (grid.hi - grid.lo);
  long long idx = std::llround(t);
  if (idx < 0) idx = 0;
  if (idx > grid.n - 1) idx = grid.n - 1;
  return static_cast<uint32_t>(idx);
}

}  // namespace nanozk::fx
