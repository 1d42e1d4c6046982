#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "nanozk/bytes.hpp"
#include "nanozk/fixed_point.hpp"

namespace nanozk::fx {

// Dense row-major tensor of fixed-point codes. Immutable by convention once
// built; shared freely across threads.
struct FixedTensor {
  std::vector<uint32_t> shape;
  std::vector<int64_t> data;
  FixedParams params;

  FixedTensor() = default;
  FixedTensor(std::vector<uint32_t> shape_, FixedParams params_ = {});

  size_t size() const { return data.size(); }
  uint32_t rows() const { return shape.empty() ? 1 : shape[0]; }
  uint32_t cols() const;

  int64_t& at(uint32_t r, uint32_t c);
  int64_t at(uint32_t r, uint32_t c) const;

  static FixedTensor from_real(const std::vector<uint32_t>& shape,
                               const std::vector<double>& values, FixedParams params = {});
  std::vector<double> to_real() const;

  // Canonical byte layout ("NZKT"): the commitment preimage. Bit-exact.
  Bytes serialize() const;
  static FixedTensor deserialize(const Bytes& b);
  static FixedTensor deserialize(ByteReader& r);

  bool operator==(const FixedTensor&) const = default;
};

// Exact integer matmul in a 128-bit accumulator, rescaled once per output
// entry with ties away from zero. Both inputs must share frac_bits.
FixedTensor fixed_matmul(const FixedTensor& a, const FixedTensor& b);

// Same product but also returning the per-entry rounding remainders
// r = acc - 2^frac_bits * y, needed as carry witnesses by the proof layer.
struct MatmulWithRemainder {
  FixedTensor product;
  FixedTensor remainder;  // same shape; |r| <= 2^(frac_bits-1)
};
MatmulWithRemainder fixed_matmul_with_remainder(const FixedTensor& a, const FixedTensor& b);

FixedTensor transpose(const FixedTensor& m);

}  // namespace nanozk::fx
