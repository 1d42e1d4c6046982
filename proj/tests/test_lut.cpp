#include <doctest.h>

#include <cmath>

#include "nanozk/lut.hpp"
#include "nanozk/rng.hpp"

using namespace nanozk;
using namespace nanozk::lut;

static fx::FixedParams kP{16};

TEST_CASE("canonical ranges and policies") {
  CHECK(canonical_grid(LutFn::EXP).lo == -4.0);
  CHECK(canonical_grid(LutFn::EXP).hi == 4.0);
  CHECK(canonical_grid(LutFn::GELU).lo == -8.0);
  CHECK(canonical_grid(LutFn::SILU).hi == 8.0);
  CHECK(canonical_grid(LutFn::RSQRT).lo == 0.01);
  CHECK(canonical_grid(LutFn::RSQRT).hi == 10.0);
  CHECK(canonical_policy(LutFn::EXP) == OobPolicy::CLAMP);
  CHECK(canonical_policy(LutFn::RSQRT) == OobPolicy::CLAMP);
  CHECK(canonical_policy(LutFn::GELU) == OobPolicy::ASYMPTOTIC);
  CHECK(canonical_policy(LutFn::SILU) == OobPolicy::ASYMPTOTIC);
}

TEST_CASE("table construction basics") {
  // 0 is not a grid point of [-4,4] with 2^16 entries (the midpoint falls
  // between indices), so the value at x=0 carries half a grid step of input
  // error times the local slope, about 6e-5 here.
  LookupTable t = build_table(LutFn::EXP, kP);
  double at0 = lookup_eval(t, 0.0);
  CHECK(std::fabs(at0 - 1.0) <= 1.3e-4);  // grid-step * exp(0)
  LookupTable gelu = build_table(LutFn::GELU, kP);
  CHECK(std::fabs(lookup_eval(gelu, 0.0)) <= 1e-4);
  LookupTable rs = build_table(LutFn::RSQRT, kP);
  CHECK(std::fabs(lookup_eval(rs, 1.0) - 1.0) <= 2e-4);
}

TEST_CASE("invalid ranges rejected") {
  CHECK_THROWS_AS(build_table(LutFn::RSQRT, fx::QuantGrid(-1.0, 10.0), kP, true),
                  std::domain_error);
  // non-canonical grid without the override flag
  CHECK_THROWS_AS(build_table(LutFn::EXP, fx::QuantGrid(-2.0, 2.0), kP), std::domain_error);
  // with the flag it is allowed
  CHECK_NOTHROW(build_table(LutFn::EXP, fx::QuantGrid(-2.0, 2.0), kP, true));
}

TEST_CASE("determinism: identical inputs produce byte-identical tables") {
  LookupTable a = build_table(LutFn::SILU, kP);
  LookupTable b = build_table(LutFn::SILU, kP);
  CHECK(a.serialize() == b.serialize());
  CHECK(a.digest() == b.digest());
}

TEST_CASE("clamp and asymptotic evaluation") {
  LookupTable expt = build_table(LutFn::EXP, kP);
  // clamped to the upper endpoint: exp(4)
  CHECK(lookup_eval(expt, 10.0) == doctest::Approx(std::exp(4.0)).epsilon(1e-3));
  CHECK(lookup_eval(expt, 1e9) == lookup_eval(expt, 4.0));
  LookupTable gelu = build_table(LutFn::GELU, kP);
  CHECK(lookup_eval(gelu, 9.0) == 9.0);  // identity branch, exact
  LookupTable silu = build_table(LutFn::SILU, kP);
  CHECK(lookup_eval(silu, -9.0) == 0.0);  // zero branch, exact
  // totality on extreme finite inputs
  CHECK_NOTHROW(lookup_eval(expt, 1e300));
  CHECK_NOTHROW(lookup_eval(gelu, -1e300));
  CHECK_NOTHROW(lookup_eval(silu, 1e300));
}

TEST_CASE("monotonicity of table codes") {
  LookupTable expt = build_table(LutFn::EXP, kP);
  for (size_t i = 1; i < expt.codes.size(); i++) CHECK(expt.codes[i] >= expt.codes[i - 1]);
  LookupTable rs = build_table(LutFn::RSQRT, kP);
  for (size_t i = 1; i < rs.codes.size(); i++) CHECK(rs.codes[i] <= rs.codes[i - 1]);
  // silu is not globally monotone (minimum near -1.278); nondecreasing above it
  LookupTable silu = build_table(LutFn::SILU, kP);
  uint32_t from = fx::quantize_index(-1.27, silu.grid);
  for (size_t i = from + 1; i < silu.codes.size(); i++)
    CHECK(silu.codes[i] >= silu.codes[i - 1]);
}

TEST_CASE("exp table entries strictly positive") {
  LookupTable expt = build_table(LutFn::EXP, kP);
  for (int64_t c : expt.codes) CHECK(c > 0);
}

TEST_CASE("newton refinement") {
  CHECK(newton_refine(0.5, 4.0) == doctest::Approx(0.5));
  CHECK(newton_refine(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(newton_refine(0.49, 4.0) == doctest::Approx(0.499702).epsilon(1e-6));
}

TEST_CASE("newton contraction is quadratic") {
  LookupTable rs = build_table(LutFn::RSQRT, kP);
  SeededRng rng(5, "newton-contraction");
  for (int i = 0; i < 10000; i++) {
    double x = rng.uniform(0.02, 9.9);
    double y0 = lookup_eval(rs, x);
    double exact = 1.0 / std::sqrt(x);
    double e0 = std::fabs(y0 - exact);
    double e1 = std::fabs(newton_refine(y0, x) - exact);
    // the exact contraction is (3/2) eps^2 (1 + eps/3); allow the cubic term
    CHECK(e1 <= e0 * e0 * 1.51 * std::sqrt(x) + 1e-14);
  }
}

TEST_CASE("softmax symmetry and oracle") {
  LookupTable expt = build_table(LutFn::EXP, kP);
  auto p2 = softmax_lut({0.0, 0.0}, expt);
  CHECK(p2[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(p2[1] == doctest::Approx(0.5).epsilon(1e-4));
  auto p4 = softmax_lut({1.0, 1.0, 1.0, 1.0}, expt);
  for (double v : p4) CHECK(v == doctest::Approx(0.25).epsilon(1e-4));
  auto p = softmax_lut({2.0, 0.0}, expt);
  CHECK(std::fabs(p[0] - 0.8808) <= 1e-3);
  CHECK(std::fabs(p[1] - 0.1192) <= 1e-3);
}

TEST_CASE("softmax normalization within bound for adversarial rows") {
  LookupTable expt = build_table(LutFn::EXP, kP);
  SeededRng rng(9, "softmax-norm");
  double bound = std::ldexp(1.0, -16 + 2);
  for (int rep = 0; rep < 200; rep++) {
    size_t n = 1 + rng.below(24);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-6.0, 6.0);
    auto pr = softmax_lut(v, expt);
    double sum = 0.0;
    for (double x : pr) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::fabs(sum - 1.0) <= bound);
  }
  // all-high rows exercise the clamp path
  auto pr = softmax_lut(std::vector<double>(23, 4.0), expt);
  double sum = 0.0;
  for (double x : pr) sum += x;
  CHECK(std::fabs(sum - 1.0) <= bound);
}

TEST_CASE("error report bounds from the derived oracle") {
  LookupTable gelu = build_table(LutFn::GELU, kP);
  ErrorReport r = error_report(gelu, 100000, 1);
  CHECK(r.sample_count == 100000);
  CHECK(r.max_abs <= 2e-4);

  LookupTable expt = build_table(LutFn::EXP, kP);
  ErrorReport re = error_report(expt, 100000, 1);
  // near x=0 the local error is half a grid step times exp(0) plus rounding
  CHECK(re.max_abs >= 1e-5);  // sanity: it is a real approximation

  LookupTable rs = build_table(LutFn::RSQRT, kP);
  ErrorReport rr = error_report(rs, 100000, 1);
  CHECK(rr.mean_rel_percent <= 0.1);
}

TEST_CASE("error report is deterministic and rejects small samples") {
  LookupTable silu = build_table(LutFn::SILU, kP);
  ErrorReport a = error_report(silu, 100000, 42);
  ErrorReport b = error_report(silu, 100000, 42);
  CHECK(a.max_abs == b.max_abs);
  CHECK(a.mean_rel_percent == b.mean_rel_percent);
  CHECK_THROWS_AS(error_report(silu, 1000, 1), std::invalid_argument);
}

TEST_CASE("table file round-trip") {
  LookupTable t = build_table(LutFn::RSQRT, kP);
  Bytes b = t.serialize();
  CHECK(b[0] == 'N');
  CHECK(b[1] == 'Z');
  CHECK(b[2] == 'K');
  CHECK(b[3] == 'L');
  LookupTable u = LookupTable::deserialize(b);
  CHECK(u.fn == t.fn);
  CHECK(u.grid == t.grid);
  CHECK(u.codes == t.codes);
  CHECK(u.digest() == t.digest());
}
