#include <doctest.h>

#include <cmath>

#include "nanozk/rng.hpp"
#include "nanozk/tensor.hpp"

using namespace nanozk;
using namespace nanozk::fx;

TEST_CASE("codec identities") {
  FixedParams p{16};
  CHECK(to_fixed(1.0, p) == 65536);
  CHECK(to_fixed(0.0, p) == 0);
  CHECK(to_fixed(-0.5, p) == -32768);
  CHECK(from_fixed(65536, p) == 1.0);
  CHECK(from_fixed(-32768, p) == -0.5);
  CHECK(std::fabs(from_fixed(to_fixed(0.3, p), p) - 0.3) <= std::ldexp(1.0, -17));
}

TEST_CASE("ties round away from zero") {
  FixedParams p{16};
  // exactly half a code unit
  CHECK(to_fixed(std::ldexp(1.0, -17), p) == 1);
  CHECK(to_fixed(-std::ldexp(1.0, -17), p) == -1);
  CHECK(to_fixed(std::ldexp(3.0, -17), p) == 2);
  CHECK(to_fixed(-std::ldexp(3.0, -17), p) == -2);
}

TEST_CASE("round-trip bound over random values") {
  FixedParams p{16};
  SeededRng rng(7, "fixed-roundtrip");
  double bound = std::ldexp(1.0, -17);
  for (int i = 0; i < 10000; i++) {
    double x = rng.uniform(-1000.0, 1000.0);
    CHECK(std::fabs(from_fixed(to_fixed(x, p), p) - x) <= bound);
  }
}

TEST_CASE("range errors") {
  FixedParams p{16};
  CHECK_THROWS_AS(to_fixed(std::ldexp(1.0, 47), p), std::range_error);
  CHECK_THROWS_AS(to_fixed(std::nan(""), p), std::range_error);
  CHECK_THROWS_AS(FixedParams{0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(FixedParams{31}.validate(), std::invalid_argument);
}

TEST_CASE("quantize endpoints and center") {
  QuantGrid grid(-4.0, 4.0, 1u << 16);
  CHECK(quantize_index(-4.0, grid) == 0);
  CHECK(quantize_index(4.0, grid) == 65535);
  CHECK(quantize_index(-10.0, grid) == 0);     // clamp below
  CHECK(quantize_index(10.0, grid) == 65535);  // clamp above
  // round(0.5 * 65535) = 32767.5, ties away from zero
  CHECK(quantize_index(0.0, grid) == 32768);
}

TEST_CASE("grid endpoint exactness") {
  QuantGrid g1(0.01, 10.0, 1u << 16);
  CHECK(g1.point(0) == 0.01);
  CHECK(g1.point(g1.n - 1) == 10.0);
  QuantGrid g2(-8.0, 8.0, 1u << 16);
  CHECK(g2.point(0) == -8.0);
  CHECK(g2.point(g2.n - 1) == 8.0);
}

TEST_CASE("quantize monotonicity") {
  QuantGrid grid(-4.0, 4.0, 4096);
  SeededRng rng(3, "quantize-monotone");
  for (int i = 0; i < 5000; i++) {
    double x = rng.uniform(-5.0, 5.0);
    double y = x + rng.uniform(0.0, 2.0);
    CHECK(quantize_index(x, grid) <= quantize_index(y, grid));
  }
}

TEST_CASE("matmul identity and zero") {
  FixedParams p{16};
  FixedTensor id({3, 3}, p);
  for (uint32_t i = 0; i < 3; i++) id.at(i, i) = p.one();
  FixedTensor x = FixedTensor::from_real({3, 3}, {0.5, -1.25, 2.0, 3.5, 0.0, -0.75, 1.0, 2.25, -3.0}, p);
  CHECK(fixed_matmul(id, x) == x);
  CHECK(fixed_matmul(x, id) == x);
  FixedTensor zero({3, 3}, p);
  CHECK(fixed_matmul(zero, x) == zero);
}

TEST_CASE("matmul scalar example") {
  FixedParams p{16};
  FixedTensor a = FixedTensor::from_real({1, 1}, {1.5}, p);
  FixedTensor b = FixedTensor::from_real({1, 1}, {2.0}, p);
  FixedTensor c = fixed_matmul(a, b);
  CHECK(c.data[0] == 196608);  // exactly 3.0
  CHECK(from_fixed(c.data[0], p) == 3.0);
}

TEST_CASE("matmul against double oracle on random 8x8") {
  FixedParams p{16};
  SeededRng rng(11, "matmul-oracle");
  for (int rep = 0; rep < 20; rep++) {
    std::vector<double> av(64), bv(64);
    for (auto& v : av) v = rng.uniform(-4.0, 4.0);
    for (auto& v : bv) v = rng.uniform(-4.0, 4.0);
    FixedTensor a = FixedTensor::from_real({8, 8}, av, p);
    FixedTensor b = FixedTensor::from_real({8, 8}, bv, p);
    auto mm = fixed_matmul_with_remainder(a, b);
    // oracle on the dequantized inputs: only the final rescale rounds
    auto ar = a.to_real(), br = b.to_real();
    double max_b = 0.0;
    for (double v : br) max_b = std::max(max_b, std::fabs(v));
    for (uint32_t i = 0; i < 8; i++)
      for (uint32_t j = 0; j < 8; j++) {
        double exact = 0.0;
        for (uint32_t k = 0; k < 8; k++) exact += ar[i * 8 + k] * br[k * 8 + j];
        double got = from_fixed(mm.product.at(i, j), p);
        CHECK(std::fabs(got - exact) <= std::ldexp(1.0, -17) * 1.0001);
        CHECK(std::fabs(got - exact) <= 8 * std::ldexp(1.0, -17) * max_b);  // stated bound
        // carry witness is the exact remainder
        CHECK(std::llabs(mm.remainder.at(i, j)) <= (int64_t{1} << 15));
      }
  }
}

TEST_CASE("matmul shape and overflow errors") {
  FixedParams p{16};
  FixedTensor a({2, 3}, p), b({4, 2}, p);
  CHECK_THROWS_AS(fixed_matmul(a, b), std::invalid_argument);
}

TEST_CASE("tensor serialization is bit-exact and round-trips") {
  FixedParams p{12};
  FixedTensor t = FixedTensor::from_real({2, 2}, {1.0, -2.0, 0.25, 3.5}, p);
  Bytes b = t.serialize();
  CHECK(b[0] == 'N');
  CHECK(b[1] == 'Z');
  CHECK(b[2] == 'K');
  CHECK(b[3] == 'T');
  CHECK(b[4] == 1);    // version
  CHECK(b[5] == 12);   // frac_bits
  CHECK(b[6] == 2);    // rank
  FixedTensor u = FixedTensor::deserialize(b);
  CHECK(u == t);
  // serialization is deterministic
  CHECK(u.serialize() == b);
  Bytes corrupt = b;
  corrupt.push_back(0);
  CHECK_THROWS_AS(FixedTensor::deserialize(corrupt), std::invalid_argument);
}
