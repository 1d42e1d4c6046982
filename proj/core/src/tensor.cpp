#include "nanozk/tensor.hpp"

#include <stdexcept>

namespace nanozk::fx {

FixedTensor::FixedTensor(std::vector<uint32_t> shape_, FixedParams params_)
    : shape(std::move(shape_)), params(params_) {
  params.validate();
  size_t n = 1;
  for (uint32_t d : shape) n *= d;
  data.assign(n, 0);
}

uint32_t FixedTensor::cols() const {
  if (shape.size() < 2) return shape.empty() ? 1 : shape[0];
  uint32_t c = 1;
  for (size_t i = 1; i < shape.size(); i++) c *= shape[i];
  return c;
}

int64_t& FixedTensor::at(uint32_t r, uint32_t c) { return data[size_t{r} * cols() + c]; }
int64_t FixedTensor::at(uint32_t r, uint32_t c) const { return data[size_t{r} * cols() + c]; }

FixedTensor FixedTensor::from_real(const std::vector<uint32_t>& shape,
                                   const std::vector<double>& values, FixedParams params) {
  FixedTensor t(shape, params);
  if (values.size() != t.data.size())
    throw std::invalid_argument("value count does not match shape");
  for (size_t i = 0; i < values.size(); i++) t.data[i] = to_fixed(values[i], params);
  return t;
}

std::vector<double> FixedTensor::to_real() const {
  std::vector<double> v(data.size());
  for (size_t i = 0; i < data.size(); i++) v[i] = from_fixed(data[i], params);
  return v;
}

Bytes FixedTensor::serialize() const {
  Bytes out;
  put_str(out, "NZKT");
  put_u8(out, 1);  // version
  put_u8(out, static_cast<uint8_t>(params.frac_bits));
  put_u8(out, static_cast<uint8_t>(shape.size()));
  for (uint32_t d : shape) put_u32le(out, d);
  for (int64_t c : data) put_i64le(out, c);
  return out;
}

FixedTensor FixedTensor::deserialize(ByteReader& r) {
  r.expect_magic("NZKT", 4);
  uint8_t version = r.u8();
  if (version != 1) throw std::invalid_argument("unsupported tensor version");
  FixedParams params;
  params.frac_bits = r.u8();
  params.validate();
  uint8_t rank = r.u8();
  std::vector<uint32_t> shape(rank);
  size_t n = 1;
  for (auto& d : shape) {
    d = r.u32le();
    n *= d;
  }
  FixedTensor t(shape, params);
  for (size_t i = 0; i < n; i++) t.data[i] = r.i64le();
  return t;
}

FixedTensor FixedTensor::deserialize(const Bytes& b) {
  ByteReader r(b);
  FixedTensor t = deserialize(r);
  if (!r.done()) throw std::invalid_argument("trailing bytes after tensor");
  return t;
}

static void check_matmul_shapes(const FixedTensor& a, const FixedTensor& b) {
  if (a.shape.size() != 2 || b.shape.size() != 2)
    throw std::invalid_argument("fixed_matmul expects rank-2 tensors");
  if (a.shape[1] != b.shape[0]) throw std::invalid_argument("inner dimensions disagree");
  if (a.params.frac_bits != b.params.frac_bits)
    throw std::invalid_argument("operands must share frac_bits");
}

MatmulWithRemainder fixed_matmul_with_remainder(const FixedTensor& a, const FixedTensor& b) {
  check_matmul_shapes(a, b);
  uint32_t m = a.shape[0], n = a.shape[1], p = b.shape[1];
  MatmulWithRemainder out{FixedTensor({m, p}, a.params), FixedTensor({m, p}, a.params)};
  int fb = a.params.frac_bits;
  for (uint32_t i = 0; i < m; i++) {
    for (uint32_t j = 0; j < p; j++) {
      __int128 acc = 0;
      for (uint32_t k = 0; k < n; k++)
        acc += static_cast<__int128>(a.at(i, k)) * b.at(k, j);
      int64_t y = rescale_round(acc, fb);
      __int128 rem = acc - (static_cast<__int128>(y) << fb);
      out.product.at(i, j) = y;
      out.remainder.at(i, j) = static_cast<int64_t>(rem);
    }
  }
  return out;
}

FixedTensor fixed_matmul(const FixedTensor& a, const FixedTensor& b) {
  return fixed_matmul_with_remainder(a, b).product;
}

FixedTensor transpose(const FixedTensor& m) {
  if (m.shape.size() != 2) throw std::invalid_argument("transpose expects rank-2");
  FixedTensor t({m.shape[1], m.shape[0]}, m.params);
  for (uint32_t i = 0; i < m.shape[0]; i++)
    for (uint32_t j = 0; j < m.shape[1]; j++) t.at(j, i) = m.at(i, j);
  return t;
}

}  // namespace nanozk::fx
