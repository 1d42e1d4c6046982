#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanozk/ipa.hpp"
#include "nanozk/lut.hpp"
#include "nanozk/tensor.hpp"
#include "nanozk/transcript.hpp"

namespace nanozk::zk {

// Powers vector (1, x, x^2, ...) mod q.
std::vector<Bn> powers_of(const GroupParams& g, const Bn& x, size_t len);

// Row-committed matrix: the proof layer's unit of witness binding.
// Commitment count is padded to a fixed cap so proof bytes never depend on
// the live dimensions; padding rows commit to zero data.
struct CommittedRows {
  uint32_t rows = 0, cols = 0;        // live dimensions
  std::vector<Bn> commits;            // cap entries
  std::vector<Bn> blinds;             // prover side only (empty on verify)
  const fx::FixedTensor* values = nullptr;  // prover side only
};

CommittedRows commit_rows(const GroupParams& g, const fx::FixedTensor& m, uint32_t row_cap,
                          SeededRng& blind_rng, size_t gen_offset = 0);

// One matmul claim X*W = 2^fb * Y + R (exact over the integers; the carry
// matrix R holds the rescale remainders). The Freivalds reduction draws
// power-vector challenges s, r; the derived vector w = W*r is committed and
// bound to W's row commitments by a third challenge t. Sub-proofs:
//   A: <t^T W, r> = e1       (over the t-combination of W's row commits)
//   B: <w, t> = e1           (over C_w; same scalar binds w to W*r)
//   Q: <s^T X, w> = c_L      (two-vector argument over C_u * C_w)
//   D: <s^T(2^fb Y + R), r> = c_R  (over the s-combination of Y,R commits)
// and the verifier checks c_L == c_R in the field.
struct MatmulClaimProof {
  Bn c_w;            // commitment to w = W*r (slice-1 generators)
  Bn e1, c_l, c_r;   // revealed scalars
  IpaProof ipa_w_rows, ipa_w_vec, ipa_yr;
  Ipa2Proof ipa_quad;
};

struct MatmulClaimInputs {
  const CommittedRows* x;
  const CommittedRows* w;  // weight rows (setup manifest) or witness rows
  const CommittedRows* y;
  const CommittedRows* r;
  int frac_bits;
};

MatmulClaimProof matmul_claim_prove(const GroupParams& g, uint32_t vec_len,
                                    const MatmulClaimInputs& in, Transcript& t,
                                    SeededRng& blind_rng, bool force = false);

enum class ClaimVerdict : uint8_t { ACCEPT, IPA_FAIL, LOOKUP_FAIL, TRANSCRIPT_MISMATCH, MALFORMED };

struct CommittedRowsView {  // verifier-side view (no values, no blinds)
  uint32_t rows = 0, cols = 0;
  const std::vector<Bn>* commits = nullptr;
};

ClaimVerdict matmul_claim_verify(const GroupParams& g, uint32_t vec_len,
                                 const CommittedRowsView& x, const CommittedRowsView& w,
                                 const CommittedRowsView& y, const CommittedRowsView& r,
                                 int frac_bits, const MatmulClaimProof& proof, Transcript& t,
                                 BatchAcc* batch);

Bytes matmul_claim_serialize(const GroupParams& g, const MatmulClaimProof& p);
MatmulClaimProof matmul_claim_deserialize(const GroupParams& g, ByteReader& r);

// Lookup claim: every (index, code) pair is a row of the public table.
// Pairs are carried raw (the v1 witness leak) padded to `cap`, compressed
// with a challenge delta, bound by a carried grand product at gamma, and
// membership-checked with the sorted-concatenation identity at (beta, gamma).
struct LookupClaimProof {
  uint8_t table_id = 0;
  uint32_t live_pairs = 0;
  std::vector<std::pair<uint32_t, int64_t>> pairs;  // cap entries
  Bn grand;                                         // prod (gamma + f_i)
};

LookupClaimProof lookup_claim_prove(const GroupParams& g, const lut::LookupTable& table,
                                    uint8_t table_id,
                                    const std::vector<std::pair<uint32_t, int64_t>>& pairs,
                                    uint32_t cap, Transcript& t, bool force = false);

ClaimVerdict lookup_claim_verify(const GroupParams& g, const lut::LookupTable& table,
                                 const LookupClaimProof& proof, uint32_t cap, Transcript& t);

Bytes lookup_claim_serialize(const GroupParams& g, const LookupClaimProof& p);
LookupClaimProof lookup_claim_deserialize(const GroupParams& g, ByteReader& r, uint32_t cap);

// ---- small-field Monte Carlo soundness measurement ----
// Runs only the challenge arithmetic of the claims over a measurement
// field, with a forced prover that recomputes honestly from a tampered
// witness. Group operations are orthogonal to these rates.

struct TamperStats {
  uint64_t trials = 0;
  uint64_t false_accepts = 0;
  double analytic_bound = 0.0;  // <= degree / q
  double rate() const { return static_cast<double>(false_accepts) / trials; }
  // one-sided 3-sigma band around the bound
  double three_sigma() const;
};

TamperStats measure_matmul_false_accept(const Bn& q, uint32_t m, uint32_t n, uint32_t p,
                                        int frac_bits, uint64_t trials, uint64_t seed);
TamperStats measure_lookup_false_accept(const Bn& q, uint32_t table_size, uint32_t f_size,
                                        uint64_t trials, uint64_t seed);

}  // namespace nanozk::zk
