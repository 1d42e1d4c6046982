#include "nanozk/lut.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nanozk/rng.hpp"

namespace nanozk::lut {

const char* fn_name(LutFn fn) {
  switch (fn) {
    case LutFn::EXP: return "exp";
    case LutFn::GELU: return "gelu";
    case LutFn::SILU: return "silu";
    case LutFn::RSQRT: return "rsqrt";
  }
  return "?";
}

LutFn fn_from_name(const std::string& s) {
  if (s == "exp") return LutFn::EXP;
  if (s == "gelu") return LutFn::GELU;
  if (s == "silu") return LutFn::SILU;
  if (s == "rsqrt") return LutFn::RSQRT;
  throw std::invalid_argument("unknown table function: " + s);
}

double oracle_eval(LutFn fn, double x) {
  switch (fn) {
    case LutFn::EXP:
      return std::exp(x);
    case LutFn::GELU:
      return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    case LutFn::SILU:
      return x / (1.0 + std::exp(-x));
    case LutFn::RSQRT:
      return 1.0 / std::sqrt(x);
  }
  throw std::invalid_argument("bad fn");
}

fx::QuantGrid canonical_grid(LutFn fn, uint32_t n) {
  switch (fn) {
    case LutFn::EXP: return fx::QuantGrid(-4.0, 4.0, n);
    case LutFn::GELU: return fx::QuantGrid(-8.0, 8.0, n);
    case LutFn::SILU: return fx::QuantGrid(-8.0, 8.0, n);
    case LutFn::RSQRT: return fx::QuantGrid(0.01, 10.0, n);
  }
  throw std::invalid_argument("bad fn");
}

OobPolicy canonical_policy(LutFn fn) {
  switch (fn) {
    case LutFn::GELU:
    case LutFn::SILU: return OobPolicy::ASYMPTOTIC;
    default: return OobPolicy::CLAMP;
  }
}

LookupTable build_table(LutFn fn, const fx::QuantGrid& grid, fx::FixedParams params,
                        bool allow_custom_range) {
  params.validate();
  if (fn == LutFn::RSQRT && grid.lo <= 0.0)
    throw std::domain_error("rsqrt table requires lo > 0");
  if (!allow_custom_range) {
    fx::QuantGrid canon = canonical_grid(fn, grid.n);
    if (grid.lo != canon.lo || grid.hi != canon.hi)
      throw std::domain_error("grid does not match canonical range for this table");
  }
  LookupTable t{fn, grid, params, canonical_policy(fn), {}};
  t.codes.resize(grid.n);
  for (uint32_t i = 0; i < grid.n; i++)
    t.codes[i] = fx::to_fixed(oracle_eval(fn, grid.point(i)), params);
  return t;
}

double lookup_eval(const LookupTable& table, double x) {
  if (table.policy == OobPolicy::ASYMPTOTIC) {
    if (x > table.grid.hi) return x;  // identity branch, exact
    if (x < table.grid.lo) return 0.0;
  }
  return table.entry_real(fx::quantize_index(x, table.grid));
}

// Code-level variant: x must be representable (true for every value the
// quantized pipeline produces).
LookupHit lookup_code(const LookupTable& table, double x) {
  if (table.policy == OobPolicy::ASYMPTOTIC) {
    if (x > table.grid.hi) return {false, 0, fx::to_fixed(x, table.params)};
    if (x < table.grid.lo) return {false, 0, 0};
  }
  uint32_t idx = fx::quantize_index(x, table.grid);
  return {true, idx, table.codes[idx]};
}

double newton_refine(double y, double x) { return y * (3.0 - x * y * y) / 2.0; }

int64_t newton_refine_code(int64_t y_code, int64_t x_code, const fx::FixedParams& params) {
  int64_t y2 = fx::fixed_mul(y_code, y_code, params);
  int64_t xy2 = fx::fixed_mul(x_code, y2, params);
  int64_t three = 3 * params.one();
  int64_t inner = three - xy2;
  int64_t prod = fx::fixed_mul(y_code, inner, params);
  return fx::div_round(prod, 2);
}

SoftmaxCodes softmax_codes(const std::vector<int64_t>& score_codes,
                           const LookupTable& exp_table, const SoftmaxOptions& opts) {
  if (score_codes.empty()) throw std::invalid_argument("softmax over empty vector");
  if (exp_table.fn != LutFn::EXP) throw std::invalid_argument("softmax needs the exp table");
  const fx::FixedParams& fp = exp_table.params;

  int64_t shift = 0;
  if (opts.subtract_max) shift = *std::max_element(score_codes.begin(), score_codes.end());

  SoftmaxCodes out;
  out.lookups.reserve(score_codes.size());
  std::vector<int64_t> exps(score_codes.size());
  for (size_t i = 0; i < score_codes.size(); i++) {
    double x = fx::from_fixed(score_codes[i] - shift, fp);
    LookupHit hit = lookup_code(exp_table, x);  // exp table clamps, always in range
    exps[i] = hit.out_code;
    out.lookups.emplace_back(hit.index, hit.out_code);
    out.sum_code += hit.out_code;
  }
  // Reciprocal witness kept at frac_bits + 32 so the sum constraint
  // sum * recip ~= 1 holds to one ulp at the product scale.
  __int128 num = __int128{1} << (fp.frac_bits + 32);
  out.recip_code32 = fx::div_round(num, out.sum_code);

  out.probs.resize(exps.size());
  std::vector<std::pair<double, size_t>> frac(exps.size());
  int64_t total = 0;
  for (size_t i = 0; i < exps.size(); i++) {
    __int128 prod = static_cast<__int128>(exps[i]) * out.recip_code32;
    int64_t p = fx::rescale_round(prod, 32);  // back to frac_bits scale
    double exact = static_cast<double>(exps[i]) / static_cast<double>(out.sum_code) *
                   static_cast<double>(fp.one());
    frac[i] = {exact - static_cast<double>(p), i};
    out.probs[i] = p;
    total += p;
  }
  // Largest-remainder correction: distribute the residual so the row sums
  // to exactly 2^frac_bits.
  int64_t deficit = fp.one() - total;
  if (deficit != 0) {
    std::sort(frac.begin(), frac.end(), [&](const auto& a, const auto& b) {
      return deficit > 0 ? a.first > b.first : a.first < b.first;
    });
    int64_t step = deficit > 0 ? 1 : -1;
    size_t i = 0;
    while (deficit != 0) {
      size_t j = frac[i % frac.size()].second;
      i++;
      if (step < 0 && out.probs[j] <= 0) continue;  // never drive a probability negative
      out.probs[j] += step;
      deficit -= step;
    }
  }
  return out;
}

std::vector<double> softmax_lut(const std::vector<double>& v, const LookupTable& exp_table,
                                const SoftmaxOptions& opts) {
  std::vector<int64_t> codes(v.size());
  for (size_t i = 0; i < v.size(); i++) codes[i] = fx::to_fixed(v[i], exp_table.params);
  SoftmaxCodes sc = softmax_codes(codes, exp_table, opts);
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); i++) out[i] = fx::from_fixed(sc.probs[i], exp_table.params);
  return out;
}

ErrorReport error_report(const LookupTable& table, uint64_t samples, uint64_t seed) {
  if (samples < 100000) throw std::invalid_argument("error report requires >= 1e5 samples");
  SeededRng rng(seed, std::string("lut-error-report/") + fn_name(table.fn));
  ErrorReport rep{table.fn, 0.0, 0.0, samples};
  double rel_sum = 0.0;
  for (uint64_t i = 0; i < samples; i++) {
    double x = rng.uniform(table.grid.lo, table.grid.hi);
    double approx = lookup_eval(table, x);
    double exact = oracle_eval(table.fn, x);
    double err = std::fabs(approx - exact);
    rep.max_abs = std::max(rep.max_abs, err);
    rel_sum += err / std::max(std::fabs(exact), 1e-9);
  }
  rep.mean_rel_percent = 100.0 * rel_sum / static_cast<double>(samples);
  return rep;
}

PublishedError published_error(LutFn fn) {
  switch (fn) {
    case LutFn::EXP: return {9e-6, 0.25};
    case LutFn::GELU: return {5e-5, 0.03};
    case LutFn::SILU: return {1e-4, 0.02};
    case LutFn::RSQRT: return {6e-5, 0.01};
  }
  throw std::invalid_argument("bad fn");
}

Bytes LookupTable::serialize() const {
  Bytes out;
  put_str(out, "NZKL");
  put_u8(out, static_cast<uint8_t>(fn));
  put_u8(out, static_cast<uint8_t>(params.frac_bits));
  put_f64le(out, grid.lo);
  put_f64le(out, grid.hi);
  put_u32le(out, grid.n);
  for (int64_t c : codes) put_i64le(out, c);
  return out;
}

LookupTable LookupTable::deserialize(const Bytes& b) {
  ByteReader r(b);
  r.expect_magic("NZKL", 4);
  LutFn fn = static_cast<LutFn>(r.u8());
  if (static_cast<uint8_t>(fn) > 3) throw std::invalid_argument("bad table fn id");
  fx::FixedParams params;
  params.frac_bits = r.u8();
  params.validate();
  double lo = r.f64le();
  double hi = r.f64le();
  uint32_t n = r.u32le();
  LookupTable t{fn, fx::QuantGrid(lo, hi, n), params, canonical_policy(fn), {}};
  t.codes.resize(n);
  for (uint32_t i = 0; i < n; i++) t.codes[i] = r.i64le();
  if (!r.done()) throw std::invalid_argument("trailing bytes after table");
  return t;
}

Digest LookupTable::digest() const { return Sha256::of(serialize()); }

}  // namespace nanozk::lut
