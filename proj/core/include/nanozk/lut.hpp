#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanozk/bytes.hpp"
#include "nanozk/fixed_point.hpp"
#include "nanozk/sha256.hpp"

namespace nanozk::lut {

enum class LutFn : uint8_t { EXP = 0, GELU = 1, SILU = 2, RSQRT = 3 };

enum class OobPolicy : uint8_t { CLAMP = 0, ASYMPTOTIC = 1 };

const char* fn_name(LutFn fn);
LutFn fn_from_name(const std::string& s);

// Reference (high-precision) evaluation of the approximated function.
double oracle_eval(LutFn fn, double x);

// Canonical operating ranges: exp [-4,4], gelu/silu [-8,8], rsqrt [0.01,10].
fx::QuantGrid canonical_grid(LutFn fn, uint32_t n = 1u << 16);
OobPolicy canonical_policy(LutFn fn);

struct LookupTable {
  LutFn fn;
  fx::QuantGrid grid;
  fx::FixedParams params;
  OobPolicy policy;
  std::vector<int64_t> codes;  // codes[i] = to_fixed(f(grid.point(i)))

  double entry_real(uint32_t i) const { return fx::from_fixed(codes[i], params); }

  Bytes serialize() const;  // "NZKL" table file format
  static LookupTable deserialize(const Bytes& b);
  Digest digest() const;  // SHA-256 of the serialized file, bound into transcripts
};

// Deterministic table construction. The grid must match the canonical range
// for fn unless allow_custom_range is set. Throws std::domain_error for
// invalid ranges (e.g. rsqrt with lo <= 0).
LookupTable build_table(LutFn fn, const fx::QuantGrid& grid, fx::FixedParams params = {},
                        bool allow_custom_range = false);
inline LookupTable build_table(LutFn fn, fx::FixedParams params = {}) {
  return build_table(fn, canonical_grid(fn), params);
}

// Nearest-entry evaluation; never faults on finite input. ASYMPTOTIC tables
// return x above the range and 0 below it, CLAMP tables snap to endpoints.
double lookup_eval(const LookupTable& table, double x);

// Code-level evaluation used by the quantized pipeline: returns the table
// index and the exact table code (the pair the lookup argument proves).
struct LookupHit {
  bool in_table;     // false when the asymptotic branch was taken
  uint32_t index;    // valid when in_table
  int64_t out_code;  // table code, or the asymptotic branch result
};
LookupHit lookup_code(const LookupTable& table, double x);

// One Newton-Raphson refinement step for y ~ 1/sqrt(x): y <- y(3 - x y^2)/2.
double newton_refine(double y, double x);
// Fixed-point variant used by the quantized pipeline (deterministic).
int64_t newton_refine_code(int64_t y_code, int64_t x_code, const fx::FixedParams& params);

// LUT softmax over real inputs: exp lookups, high-precision reciprocal
// witness, largest-remainder normalization so the outputs sum to exactly 1.
struct SoftmaxOptions {
  bool subtract_max = false;  // off by default; the table range covers logits
};
std::vector<double> softmax_lut(const std::vector<double>& v, const LookupTable& exp_table,
                                const SoftmaxOptions& opts = {});

// Code-level softmax for the quantized pipeline. Records the (index, code)
// lookup pairs for the proof witness.
struct SoftmaxCodes {
  std::vector<int64_t> probs;                         // fixed codes, sum == 2^frac_bits exactly
  std::vector<std::pair<uint32_t, int64_t>> lookups;  // exp table pairs
  int64_t sum_code = 0;                               // sum of exp codes
  int64_t recip_code32 = 0;                           // reciprocal witness at frac_bits+32
};
SoftmaxCodes softmax_codes(const std::vector<int64_t>& score_codes,
                           const LookupTable& exp_table, const SoftmaxOptions& opts = {});

struct ErrorReport {
  LutFn fn;
  double max_abs = 0.0;
  double mean_rel_percent = 0.0;
  uint64_t sample_count = 0;
};

// Measured approximation error over >= 10^5 uniform samples of the grid
// range; deterministic for a fixed seed.
ErrorReport error_report(const LookupTable& table, uint64_t samples = 100000,
                         uint64_t seed = 1);

// Published reference errors for the 16-bit tables, reported side by side
// with measured values (nearest-entry lookup can exceed them; see README).
struct PublishedError {
  double max_abs;
  double mean_rel_percent;
};
PublishedError published_error(LutFn fn);

}  // namespace nanozk::lut
