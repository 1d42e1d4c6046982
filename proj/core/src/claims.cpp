#include "nanozk/claims.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nanozk::zk {

std::vector<Bn> powers_of(const GroupParams& g, const Bn& x, size_t len) {
  std::vector<Bn> out(len);
  Bn acc(1);
  for (size_t i = 0; i < len; i++) {
    out[i] = acc;
    acc = acc * x % g.q;
  }
  return out;
}

CommittedRows commit_rows(const GroupParams& g, const fx::FixedTensor& m, uint32_t row_cap,
                          SeededRng& blind_rng, size_t gen_offset) {
  if (m.shape.size() != 2) throw std::invalid_argument("commit_rows expects rank-2");
  if (m.shape[0] > row_cap) throw std::length_error("matrix exceeds the row cap");
  CommittedRows out;
  out.rows = m.shape[0];
  out.cols = m.shape[1];
  out.values = &m;
  out.commits.reserve(row_cap);
  out.blinds.reserve(row_cap);
  for (uint32_t i = 0; i < row_cap; i++) {
    Bn blind = mod_q(g, bn_from_be(blind_rng.bytes(g.scalar_width())));
    out.blinds.push_back(blind);
    if (i < out.rows) {
      out.commits.push_back(
          pedersen_commit_codes(g, &m.data[size_t{i} * out.cols], out.cols, blind, gen_offset));
    } else {
      out.commits.push_back(g.pow(g.h, blind));  // zero-data padding row
    }
  }
  return out;
}

namespace {

// s-combination of row commitments and blinds: commit(s^T M).
Bn combine_commits(const GroupParams& g, const std::vector<Bn>& commits,
                   const std::vector<Bn>& coeff, size_t live) {
  std::vector<const Bn*> bases;
  std::vector<Bn> exps;
  bases.reserve(live);
  exps.reserve(live);
  for (size_t i = 0; i < live; i++) {
    bases.push_back(&commits[i]);
    exps.push_back(coeff[i]);
  }
  return multi_exp(g, bases, exps);
}

Bn combine_blinds(const GroupParams& g, const std::vector<Bn>& blinds,
                  const std::vector<Bn>& coeff, size_t live) {
  Bn acc(0);
  for (size_t i = 0; i < live; i++) acc += blinds[i] * coeff[i] % g.q;
  return mod_q(g, acc);
}

// s^T M over the field, padded to vec_len.
std::vector<Bn> row_combination(const GroupParams& g, const fx::FixedTensor& m,
                                const std::vector<Bn>& s, uint32_t vec_len) {
  std::vector<Bn> out(vec_len, Bn(0));
  for (uint32_t i = 0; i < m.shape[0]; i++) {
    for (uint32_t j = 0; j < m.shape[1]; j++) {
      int64_t v = m.at(i, j);
      if (v == 0) continue;
      out[j] += s[i] * lift_i64(g, v) % g.q;
    }
  }
  for (auto& x : out) x = mod_q(g, x);
  return out;
}

// M * r over the field (length = rows of M), padded to vec_len.
std::vector<Bn> col_combination(const GroupParams& g, const fx::FixedTensor& m,
                                const std::vector<Bn>& r, uint32_t vec_len) {
  std::vector<Bn> out(vec_len, Bn(0));
  for (uint32_t i = 0; i < m.shape[0]; i++) {
    Bn acc(0);
    for (uint32_t j = 0; j < m.shape[1]; j++) {
      int64_t v = m.at(i, j);
      if (v == 0) continue;
      acc += lift_i64(g, v) * r[j] % g.q;
    }
    out[i] = mod_q(g, acc);
  }
  return out;
}

std::vector<Bn> pad_to(const GroupParams& g, std::vector<Bn> v, uint32_t vec_len) {
  for (auto& x : v) x = mod_q(g, x);
  v.resize(vec_len, Bn(0));
  return v;
}

}  // namespace

MatmulClaimProof matmul_claim_prove(const GroupParams& g, uint32_t vec_len,
                                    const MatmulClaimInputs& in, Transcript& t,
                                    SeededRng& blind_rng, bool force) {
  const fx::FixedTensor& X = *in.x->values;
  const fx::FixedTensor& W = *in.w->values;
  const fx::FixedTensor& Y = *in.y->values;
  const fx::FixedTensor& R = *in.r->values;
  uint32_t m = X.shape[0], n = X.shape[1], p = W.shape[1];
  if (W.shape[0] != n || Y.shape[0] != m || Y.shape[1] != p || R.shape[0] != m ||
      R.shape[1] != p)
    throw std::invalid_argument("matmul claim shape mismatch");
  if (n > vec_len || p > vec_len || m > vec_len)
    throw std::length_error("claim dimensions exceed the padded degree");

  if (!force) {
    // witness consistency: X W == 2^fb Y + R over the integers
    for (uint32_t i = 0; i < m; i++)
      for (uint32_t j = 0; j < p; j++) {
        __int128 acc = 0;
        for (uint32_t l = 0; l < n; l++)
          acc += static_cast<__int128>(X.at(i, l)) * W.at(l, j);
        __int128 rhs = (static_cast<__int128>(Y.at(i, j)) << in.frac_bits) + R.at(i, j);
        if (acc != rhs)
          throw std::logic_error("prover witness inconsistent with matmul claim");
      }
  }

  t.absorb_u64("claim/m", m);
  t.absorb_u64("claim/n", n);
  t.absorb_u64("claim/p", p);
  Bn sigma = t.challenge_nonzero("claim/s", g.q);
  Bn rho = t.challenge_nonzero("claim/r", g.q);
  std::vector<Bn> s = powers_of(g, sigma, m);
  std::vector<Bn> r = powers_of(g, rho, p);

  MatmulClaimProof proof;
  // w = W * r, committed over the slice-1 generators
  std::vector<Bn> w = col_combination(g, W, r, vec_len);
  Bn w_blind = mod_q(g, bn_from_be(blind_rng.bytes(g.scalar_width())));
  proof.c_w = pedersen_commit(g, w, w_blind, vec_len);
  t.absorb_element("claim/Cw", proof.c_w, g.element_width());

  Bn tau = t.challenge_nonzero("claim/t", g.q);
  std::vector<Bn> tv = powers_of(g, tau, n);
  std::vector<Bn> tv_pad = pad_to(g, tv, vec_len);
  std::vector<Bn> r_pad = pad_to(g, r, vec_len);

  std::vector<Bn> tW = row_combination(g, W, tv, vec_len);
  std::vector<Bn> u = row_combination(g, X, s, vec_len);
  // s^T (2^fb Y + R)
  std::vector<Bn> syr(vec_len, Bn(0));
  Bn two_fb = Bn(1) << in.frac_bits;
  for (uint32_t i = 0; i < m; i++)
    for (uint32_t j = 0; j < p; j++) {
      Bn v = mod_q(g, two_fb * lift_i64(g, Y.at(i, j)) + lift_i64(g, R.at(i, j)));
      if (sgn(v) == 0) continue;
      syr[j] += s[i] * v % g.q;
    }
  for (auto& x : syr) x = mod_q(g, x);

  proof.e1 = dot_mod_q(g, tW, r_pad);
  proof.c_l = dot_mod_q(g, u, w);
  proof.c_r = dot_mod_q(g, syr, r_pad);
  t.absorb_scalar("claim/e1", proof.e1);
  t.absorb_scalar("claim/cl", proof.c_l);
  t.absorb_scalar("claim/cr", proof.c_r);

  // derived commitments and blinds
  Bn c_tw = combine_commits(g, in.w->commits, tv, n);
  Bn b_tw = combine_blinds(g, in.w->blinds, tv, n);
  Bn c_u = combine_commits(g, in.x->commits, s, m);
  Bn b_u = combine_blinds(g, in.x->blinds, s, m);
  // C_D = prod (C_Y_i^{2^fb} * C_R_i)^{s_i}
  Bn c_d(1);
  {
    std::vector<const Bn*> bases;
    std::vector<Bn> exps;
    for (uint32_t i = 0; i < m; i++) {
      bases.push_back(&in.y->commits[i]);
      exps.push_back(mod_q(g, two_fb * s[i]));
      bases.push_back(&in.r->commits[i]);
      exps.push_back(s[i]);
    }
    c_d = multi_exp(g, bases, exps);
  }
  Bn b_d(0);
  for (uint32_t i = 0; i < m; i++) {
    b_d += s[i] * mod_q(g, two_fb * in.y->blinds[i] + in.r->blinds[i]) % g.q;
  }
  b_d = mod_q(g, b_d);

  proof.ipa_w_rows = ipa_prove(g, 0, tW, b_tw, r_pad, proof.e1, c_tw, t, blind_rng);
  proof.ipa_w_vec = ipa_prove(g, vec_len, w, w_blind, tv_pad, proof.e1, proof.c_w, t, blind_rng);
  Bn p0 = c_u * proof.c_w % g.p;
  proof.ipa_quad =
      ipa2_prove(g, 0, vec_len, u, w, mod_q(g, b_u + w_blind), proof.c_l, p0, t, blind_rng);
  proof.ipa_yr = ipa_prove(g, 0, syr, b_d, r_pad, proof.c_r, c_d, t, blind_rng);
  return proof;
}

ClaimVerdict matmul_claim_verify(const GroupParams& g, uint32_t vec_len,
                                 const CommittedRowsView& x, const CommittedRowsView& w,
                                 const CommittedRowsView& y, const CommittedRowsView& r,
                                 int frac_bits, const MatmulClaimProof& proof, Transcript& t,
                                 BatchAcc* batch) {
  uint32_t m = x.rows, n = x.cols, p = w.cols;
  if (!g.in_group(proof.c_w)) return ClaimVerdict::MALFORMED;
  for (const Bn* s : {&proof.e1, &proof.c_l, &proof.c_r})
    if (*s < 0 || *s >= g.q) return ClaimVerdict::MALFORMED;

  t.absorb_u64("claim/m", m);
  t.absorb_u64("claim/n", n);
  t.absorb_u64("claim/p", p);
  Bn sigma = t.challenge_nonzero("claim/s", g.q);
  Bn rho = t.challenge_nonzero("claim/r", g.q);
  std::vector<Bn> sv = powers_of(g, sigma, m);
  std::vector<Bn> rv = powers_of(g, rho, p);
  t.absorb_element("claim/Cw", proof.c_w, g.element_width());
  Bn tau = t.challenge_nonzero("claim/t", g.q);
  std::vector<Bn> tv = powers_of(g, tau, n);
  std::vector<Bn> tv_pad = pad_to(g, tv, vec_len);
  std::vector<Bn> rv_pad = pad_to(g, rv, vec_len);
  t.absorb_scalar("claim/e1", proof.e1);
  t.absorb_scalar("claim/cl", proof.c_l);
  t.absorb_scalar("claim/cr", proof.c_r);

  // the Freivalds cross-check itself
  bool scalars_ok = proof.c_l == proof.c_r;

  Bn c_tw = combine_commits(g, *w.commits, tv, n);
  Bn c_u = combine_commits(g, *x.commits, sv, m);
  Bn two_fb = Bn(1) << frac_bits;
  Bn c_d(1);
  {
    std::vector<const Bn*> bases;
    std::vector<Bn> exps;
    for (uint32_t i = 0; i < m; i++) {
      bases.push_back(&(*y.commits)[i]);
      exps.push_back(mod_q(g, two_fb * sv[i]));
      bases.push_back(&(*r.commits)[i]);
      exps.push_back(sv[i]);
    }
    c_d = multi_exp(g, bases, exps);
  }

  if (!ipa_verify(g, 0, c_tw, rv_pad, proof.e1, proof.ipa_w_rows, t, batch))
    return ClaimVerdict::IPA_FAIL;
  if (!ipa_verify(g, vec_len, proof.c_w, tv_pad, proof.e1, proof.ipa_w_vec, t, batch))
    return ClaimVerdict::IPA_FAIL;
  Bn p0 = c_u * proof.c_w % g.p;
  if (!ipa2_verify(g, 0, vec_len, p0, proof.c_l, vec_len, proof.ipa_quad, t, batch))
    return ClaimVerdict::IPA_FAIL;
  if (!ipa_verify(g, 0, c_d, rv_pad, proof.c_r, proof.ipa_yr, t, batch))
    return ClaimVerdict::IPA_FAIL;
  if (!scalars_ok) return ClaimVerdict::IPA_FAIL;
  return ClaimVerdict::ACCEPT;
}

Bytes matmul_claim_serialize(const GroupParams& g, const MatmulClaimProof& p) {
  Bytes out;
  size_t ew = g.element_width(), sw = g.scalar_width();
  put_bytes(out, bn_to_be(p.c_w, ew));
  put_bytes(out, bn_to_be(p.e1, sw));
  put_bytes(out, bn_to_be(p.c_l, sw));
  put_bytes(out, bn_to_be(p.c_r, sw));
  put_bytes(out, ipa_serialize(g, p.ipa_w_rows));
  put_bytes(out, ipa_serialize(g, p.ipa_w_vec));
  put_bytes(out, ipa2_serialize(g, p.ipa_quad));
  put_bytes(out, ipa_serialize(g, p.ipa_yr));
  return out;
}

MatmulClaimProof matmul_claim_deserialize(const GroupParams& g, ByteReader& r) {
  MatmulClaimProof p;
  size_t ew = g.element_width(), sw = g.scalar_width();
  p.c_w = bn_from_be(r.take(ew));
  p.e1 = bn_from_be(r.take(sw));
  p.c_l = bn_from_be(r.take(sw));
  p.c_r = bn_from_be(r.take(sw));
  p.ipa_w_rows = ipa_deserialize(g, r);
  p.ipa_w_vec = ipa_deserialize(g, r);
  p.ipa_quad = ipa2_deserialize(g, r);
  p.ipa_yr = ipa_deserialize(g, r);
  return p;
}

// ---- lookup claims ----

namespace {

Bytes pairs_bytes(const std::vector<std::pair<uint32_t, int64_t>>& pairs) {
  Bytes out;
  for (const auto& [idx, code] : pairs) {
    put_u16le(out, static_cast<uint16_t>(idx));
    put_i64le(out, code);
  }
  return out;
}

// Sorted-concatenation identity at (beta, gamma):
//   (1+beta)^{|f|} * prod_i (gamma + f_i)
//     * prod_{j<|t|-1} (gamma(1+beta) + t_j + beta t_{j+1})
//  == prod_{i<|s|-1} (gamma(1+beta) + s_i + beta s_{i+1})
// with s = the multiset union of f and t in t's sort order. A valid s exists
// iff every f_i appears in t; the verifier builds s itself, so a foreign
// value breaks the identity except with probability <= degree/q.
bool sorted_concat_identity(const Bn& q, const std::vector<Bn>& f, const std::vector<Bn>& tv,
                            const Bn& beta, const Bn& gamma) {
  Bn one_b = (1 + beta) % q;
  Bn gb = gamma * one_b % q;

  std::vector<Bn> t_sorted(tv);
  std::sort(t_sorted.begin(), t_sorted.end());
  std::vector<Bn> s(f.begin(), f.end());
  s.insert(s.end(), tv.begin(), tv.end());
  std::sort(s.begin(), s.end());

  Bn lhs(1);
  for (size_t i = 0; i < f.size(); i++) lhs = lhs * one_b % q;
  for (const Bn& fi : f) lhs = lhs * ((gamma + fi) % q) % q;
  for (size_t j = 0; j + 1 < t_sorted.size(); j++)
    lhs = lhs * ((gb + t_sorted[j] + beta * t_sorted[j + 1]) % q) % q;

  Bn rhs(1);
  for (size_t i = 0; i + 1 < s.size(); i++)
    rhs = rhs * ((gb + s[i] + beta * s[i + 1]) % q) % q;
  return lhs == rhs;
}

}  // namespace

LookupClaimProof lookup_claim_prove(const GroupParams& g, const lut::LookupTable& table,
                                    uint8_t table_id,
                                    const std::vector<std::pair<uint32_t, int64_t>>& pairs,
                                    uint32_t cap, Transcript& t, bool force) {
  if (pairs.size() > cap) throw std::length_error("lookup pair count exceeds claim capacity");
  if (!force) {
    for (const auto& [idx, code] : pairs) {
      if (idx >= table.codes.size() || table.codes[idx] != code)
        throw std::logic_error("prover lookup pair not a table entry");
    }
  }
  LookupClaimProof proof;
  proof.table_id = table_id;
  proof.live_pairs = static_cast<uint32_t>(pairs.size());
  proof.pairs = pairs;
  proof.pairs.resize(cap, {0, table.codes[0]});  // pad with the first table row

  t.absorb_u64("lookup/id", table_id);
  t.absorb_u64("lookup/live", proof.live_pairs);
  t.absorb("lookup/pairs", pairs_bytes(proof.pairs));
  Bn delta = t.challenge("lookup/delta", g.q);
  Bn gamma = t.challenge("lookup/gamma", g.q);
  t.challenge_nonzero("lookup/beta", g.q);  // drawn here to keep prover/verifier in step

  Bn grand(1);
  for (const auto& [idx, code] : proof.pairs) {
    Bn f = mod_q(g, Bn(idx) + delta * lift_i64(g, code));
    grand = grand * ((gamma + f) % g.q) % g.q;
  }
  proof.grand = grand;
  return proof;
}

ClaimVerdict lookup_claim_verify(const GroupParams& g, const lut::LookupTable& table,
                                 const LookupClaimProof& proof, uint32_t cap, Transcript& t) {
  if (proof.pairs.size() != cap || proof.live_pairs > cap) return ClaimVerdict::MALFORMED;
  if (proof.grand < 0 || proof.grand >= g.q) return ClaimVerdict::MALFORMED;

  t.absorb_u64("lookup/id", proof.table_id);
  t.absorb_u64("lookup/live", proof.live_pairs);
  t.absorb("lookup/pairs", pairs_bytes(proof.pairs));
  Bn delta = t.challenge("lookup/delta", g.q);
  Bn gamma = t.challenge("lookup/gamma", g.q);
  Bn beta = t.challenge_nonzero("lookup/beta", g.q);

  std::vector<Bn> f;
  f.reserve(proof.pairs.size());
  Bn grand(1);
  for (const auto& [idx, code] : proof.pairs) {
    Bn fi = mod_q(g, Bn(idx) + delta * lift_i64(g, code));
    grand = grand * ((gamma + fi) % g.q) % g.q;
    f.push_back(fi);
  }
  if (grand != proof.grand) return ClaimVerdict::LOOKUP_FAIL;

  std::vector<Bn> tv;
  tv.reserve(table.codes.size());
  for (size_t j = 0; j < table.codes.size(); j++)
    tv.push_back(mod_q(g, Bn(static_cast<unsigned long>(j)) + delta * lift_i64(g, table.codes[j])));

  if (!sorted_concat_identity(g.q, f, tv, beta, gamma)) return ClaimVerdict::LOOKUP_FAIL;
  return ClaimVerdict::ACCEPT;
}

Bytes lookup_claim_serialize(const GroupParams& g, const LookupClaimProof& p) {
  Bytes out;
  put_u8(out, p.table_id);
  put_u32le(out, p.live_pairs);
  put_bytes(out, pairs_bytes(p.pairs));
  put_bytes(out, bn_to_be(p.grand, g.scalar_width()));
  return out;
}

LookupClaimProof lookup_claim_deserialize(const GroupParams& g, ByteReader& r, uint32_t cap) {
  LookupClaimProof p;
  p.table_id = r.u8();
  p.live_pairs = r.u32le();
  p.pairs.resize(cap);
  for (uint32_t i = 0; i < cap; i++) {
    uint32_t idx = r.u16le();
    int64_t code = r.i64le();
    p.pairs[i] = {idx, code};
  }
  p.grand = bn_from_be(r.take(g.scalar_width()));
  return p;
}

// ---- measurement harness ----

double TamperStats::three_sigma() const {
  double p = analytic_bound;
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

TamperStats measure_matmul_false_accept(const Bn& q, uint32_t m, uint32_t n, uint32_t p,
                                        int frac_bits, uint64_t trials, uint64_t seed) {
  SeededRng rng(seed, "measure-matmul");
  GroupParams fq;  // field-only context: only q is used
  fq.q = q;

  TamperStats st;
  st.trials = trials;
  st.analytic_bound = 2.0 / q.get_d();

  fx::FixedParams fp{frac_bits};
  for (uint64_t trial = 0; trial < trials; trial++) {
    fx::FixedTensor X({m, n}, fp), W({n, p}, fp);
    for (auto& v : X.data) v = static_cast<int64_t>(rng.below(1u << 18)) - (1 << 17);
    for (auto& v : W.data) v = static_cast<int64_t>(rng.below(1u << 18)) - (1 << 17);
    auto prod = fx::fixed_matmul_with_remainder(X, W);

    // tamper one entry of Y
    uint32_t ti = static_cast<uint32_t>(rng.below(m)), tj = static_cast<uint32_t>(rng.below(p));
    int64_t bump = 1 + static_cast<int64_t>(rng.below(64));
    prod.product.at(ti, tj) += rng.below(2) ? bump : -bump;

    Bn sigma = 1 + Bn(static_cast<unsigned long>(rng.below(q.get_ui())));
    sigma = mod_q(fq, sigma);
    Bn rho = mod_q(fq, Bn(static_cast<unsigned long>(rng.below(q.get_ui()))));
    std::vector<Bn> s = powers_of(fq, sigma, m);
    std::vector<Bn> r = powers_of(fq, rho, p);

    // honest-side scalar (from X, W) vs claimed side (tampered Y, honest R)
    std::vector<Bn> u = row_combination(fq, X, s, n);
    std::vector<Bn> w = col_combination(fq, W, r, n);
    Bn c_l = dot_mod_q(fq, u, w);

    Bn two_fb = Bn(1) << frac_bits;
    Bn c_r(0);
    for (uint32_t i = 0; i < m; i++)
      for (uint32_t j = 0; j < p; j++) {
        Bn v = mod_q(fq, two_fb * lift_i64(fq, prod.product.at(i, j)) +
                             lift_i64(fq, prod.remainder.at(i, j)));
        c_r += s[i] * v % fq.q * r[j] % fq.q;
      }
    c_r = mod_q(fq, c_r);
    if (c_l == c_r) st.false_accepts++;
  }
  return st;
}

TamperStats measure_lookup_false_accept(const Bn& q, uint32_t table_size, uint32_t f_size,
                                        uint64_t trials, uint64_t seed) {
  SeededRng rng(seed, "measure-lookup");
  GroupParams fq;
  fq.q = q;

  TamperStats st;
  st.trials = trials;
  // Two failure paths: the tampered pair's delta-compression collides with
  // some table value (<= |T| bad deltas), or the sorted-concatenation
  // identity coincides at (beta, gamma) despite the foreign value (degree
  // <= |f|+|T|). Union bound: (|f| + 2|T|) / q.
  st.analytic_bound = static_cast<double>(f_size + 2 * table_size) / q.get_d();

  for (uint64_t trial = 0; trial < trials; trial++) {
    // small table of distinct codes
    std::vector<int64_t> codes(table_size);
    for (uint32_t j = 0; j < table_size; j++) codes[j] = static_cast<int64_t>(j) * 7 + 3;
    std::vector<std::pair<uint32_t, int64_t>> pairs(f_size);
    for (auto& pr : pairs) {
      uint32_t idx = static_cast<uint32_t>(rng.below(table_size));
      pr = {idx, codes[idx]};
    }
    // tamper one output so it is not the table entry at its index
    uint32_t victim = static_cast<uint32_t>(rng.below(f_size));
    pairs[victim].second += 1 + static_cast<int64_t>(rng.below(5));

    Bn delta = mod_q(fq, Bn(static_cast<unsigned long>(rng.below(q.get_ui()))));
    Bn gamma = mod_q(fq, Bn(static_cast<unsigned long>(rng.below(q.get_ui()))));
    Bn beta = 1 + Bn(static_cast<unsigned long>(rng.below(q.get_ui() - 1)));

    std::vector<Bn> f;
    for (const auto& [idx, code] : pairs)
      f.push_back(mod_q(fq, Bn(idx) + delta * lift_i64(fq, code)));
    std::vector<Bn> tv;
    for (uint32_t j = 0; j < table_size; j++)
      tv.push_back(mod_q(fq, Bn(j) + delta * lift_i64(fq, codes[j])));

    if (sorted_concat_identity(fq.q, f, tv, beta, gamma)) st.false_accepts++;
  }
  return st;
}

}  // namespace nanozk::zk
