#include <doctest.h>

#include <cmath>

#include "nanozk/claims.hpp"

using namespace nanozk;
using namespace nanozk::zk;

namespace {

Bytes seed_bytes(const std::string& s = "claims-test") {
  Bytes b;
  put_str(b, s);
  return b;
}

struct Rig {
  GroupParams g;
  fx::FixedParams fp{16};
  SeededRng rng{1, "claims-rig"};
  uint32_t vec_len;
  explicit Rig(uint32_t bits, uint32_t vl) : g(group_setup(seed_bytes(), bits, 2 * vl)), vec_len(vl) {}

  fx::FixedTensor rand_tensor(uint32_t r, uint32_t c, double scale = 2.0) {
    std::vector<double> v(size_t{r} * c);
    for (auto& x : v) x = rng.uniform(-scale, scale);
    return fx::FixedTensor::from_real({r, c}, v, fp);
  }
};

struct ClaimFixture {
  fx::FixedTensor X, W, Y, R;
  CommittedRows cx, cw, cy, cr;
  ClaimFixture(Rig& rig, uint32_t m, uint32_t n, uint32_t p, uint32_t row_cap) {
    X = rig.rand_tensor(m, n);
    W = rig.rand_tensor(n, p);
    auto mm = fx::fixed_matmul_with_remainder(X, W);
    Y = mm.product;
    R = mm.remainder;
    SeededRng blinds(99, "fixture-blinds");
    cx = commit_rows(rig.g, X, row_cap, blinds);
    cw = commit_rows(rig.g, W, n, blinds);
    cy = commit_rows(rig.g, Y, row_cap, blinds);
    cr = commit_rows(rig.g, R, row_cap, blinds);
  }
  MatmulClaimInputs inputs(int fb = 16) const {
    return MatmulClaimInputs{&cx, &cw, &cy, &cr, fb};
  }
  CommittedRowsView view(const CommittedRows& c) const {
    return CommittedRowsView{c.rows, c.cols, &c.commits};
  }
};

}  // namespace

TEST_CASE("honest matmul claim verifies") {
  Rig rig(512, 16);
  ClaimFixture f(rig, 4, 8, 8, 8);
  Transcript tp("claim");
  SeededRng blinds(7, "prove-blinds");
  MatmulClaimProof proof = matmul_claim_prove(rig.g, rig.vec_len, f.inputs(), tp, blinds);
  Transcript tv("claim");
  CHECK(matmul_claim_verify(rig.g, rig.vec_len, f.view(f.cx), f.view(f.cw), f.view(f.cy),
                            f.view(f.cr), 16, proof, tv, nullptr) == ClaimVerdict::ACCEPT);
}

TEST_CASE("zero matrices: claim 0 = 0 accepted") {
  Rig rig(512, 8);
  fx::FixedTensor X({2, 4}, rig.fp), W({4, 4}, rig.fp);
  auto mm = fx::fixed_matmul_with_remainder(X, W);
  SeededRng blinds(3, "zeros");
  CommittedRows cx = commit_rows(rig.g, X, 4, blinds);
  CommittedRows cw = commit_rows(rig.g, W, 4, blinds);
  CommittedRows cy = commit_rows(rig.g, mm.product, 4, blinds);
  CommittedRows cr = commit_rows(rig.g, mm.remainder, 4, blinds);
  MatmulClaimInputs in{&cx, &cw, &cy, &cr, 16};
  Transcript tp("zero-claim");
  SeededRng pb(5, "pb");
  MatmulClaimProof proof = matmul_claim_prove(rig.g, rig.vec_len, in, tp, pb);
  CHECK(proof.c_l == 0);
  CHECK(proof.c_r == 0);
  Transcript tv("zero-claim");
  auto view = [](const CommittedRows& c) {
    return CommittedRowsView{c.rows, c.cols, &c.commits};
  };
  CHECK(matmul_claim_verify(rig.g, rig.vec_len, view(cx), view(cw), view(cy), view(cr), 16,
                            proof, tv, nullptr) == ClaimVerdict::ACCEPT);
}

TEST_CASE("prover refuses an inconsistent witness unless forced") {
  Rig rig(512, 8);
  ClaimFixture f(rig, 2, 4, 4, 4);
  f.Y.at(1, 2) += 3;  // tamper after committing is irrelevant; values are shared
  Transcript tp("forced");
  SeededRng blinds(11, "pb");
  CHECK_THROWS_AS(matmul_claim_prove(rig.g, rig.vec_len, f.inputs(), tp, blinds),
                  std::logic_error);
  Transcript tp2("forced");
  CHECK_NOTHROW(matmul_claim_prove(rig.g, rig.vec_len, f.inputs(), tp2, blinds, true));
}

TEST_CASE("forced proof over a tampered witness is rejected (large field)") {
  Rig rig(512, 8);
  for (int rep = 0; rep < 5; rep++) {
    ClaimFixture f(rig, 3, 4, 4, 4);
    f.Y.at(static_cast<uint32_t>(rep % 3), static_cast<uint32_t>(rep % 4)) += 1 + rep;
    // recommit so the committed witness is the tampered one
    SeededRng blinds(200 + rep, "re-blinds");
    f.cy = commit_rows(rig.g, f.Y, 4, blinds);
    Transcript tp("tamper" + std::to_string(rep));
    SeededRng pb(13 + rep, "pb");
    MatmulClaimProof proof =
        matmul_claim_prove(rig.g, rig.vec_len, f.inputs(), tp, pb, true);
    Transcript tv("tamper" + std::to_string(rep));
    CHECK(matmul_claim_verify(rig.g, rig.vec_len, f.view(f.cx), f.view(f.cw), f.view(f.cy),
                              f.view(f.cr), 16, proof, tv, nullptr) != ClaimVerdict::ACCEPT);
  }
}

TEST_CASE("claim proof serialization round-trips") {
  Rig rig(512, 8);
  ClaimFixture f(rig, 2, 4, 8, 4);
  Transcript tp("ser");
  SeededRng blinds(17, "pb");
  MatmulClaimProof proof = matmul_claim_prove(rig.g, rig.vec_len, f.inputs(), tp, blinds);
  Bytes b = matmul_claim_serialize(rig.g, proof);
  ByteReader r(b);
  MatmulClaimProof p2 = matmul_claim_deserialize(rig.g, r);
  CHECK(r.done());
  CHECK(matmul_claim_serialize(rig.g, p2) == b);
  Transcript tv("ser");
  CHECK(matmul_claim_verify(rig.g, rig.vec_len, f.view(f.cx), f.view(f.cw), f.view(f.cy),
                            f.view(f.cr), 16, p2, tv, nullptr) == ClaimVerdict::ACCEPT);
}

TEST_CASE("lookup claim: honest accept including padding and repetition") {
  Rig rig(512, 8);
  lut::LookupTable table = lut::build_table(lut::LutFn::EXP, rig.fp);
  // empty pair list: vacuous accept (padding fills the claim)
  Transcript tp0("lookup-empty");
  LookupClaimProof p0 = lookup_claim_prove(rig.g, table, 0, {}, 16, tp0);
  Transcript tv0("lookup-empty");
  CHECK(lookup_claim_verify(rig.g, table, p0, 16, tv0) == ClaimVerdict::ACCEPT);

  // the same entry repeated: multiset inclusion allows repetition
  std::vector<std::pair<uint32_t, int64_t>> reps(5, {0, table.codes[0]});
  Transcript tp1("lookup-rep");
  LookupClaimProof p1 = lookup_claim_prove(rig.g, table, 0, reps, 16, tp1);
  Transcript tv1("lookup-rep");
  CHECK(lookup_claim_verify(rig.g, table, p1, 16, tv1) == ClaimVerdict::ACCEPT);

  // a spread of live entries
  std::vector<std::pair<uint32_t, int64_t>> pairs;
  for (uint32_t i : {7u, 500u, 65535u, 12345u})
    pairs.push_back({i, table.codes[i]});
  Transcript tp2("lookup-live");
  LookupClaimProof p2 = lookup_claim_prove(rig.g, table, 0, pairs, 16, tp2);
  Transcript tv2("lookup-live");
  CHECK(lookup_claim_verify(rig.g, table, p2, 16, tv2) == ClaimVerdict::ACCEPT);
}

TEST_CASE("lookup claim: non-member pair rejected, prover refuses unforced") {
  Rig rig(512, 8);
  lut::LookupTable table = lut::build_table(lut::LutFn::GELU, rig.fp);
  std::vector<std::pair<uint32_t, int64_t>> pairs{{100, table.codes[100] + 1}};
  Transcript tp("lookup-bad");
  CHECK_THROWS_AS(lookup_claim_prove(rig.g, table, 1, pairs, 8, tp), std::logic_error);
  Transcript tp2("lookup-bad");
  LookupClaimProof p = lookup_claim_prove(rig.g, table, 1, pairs, 8, tp2, true);
  Transcript tv("lookup-bad");
  CHECK(lookup_claim_verify(rig.g, table, p, 8, tv) == ClaimVerdict::LOOKUP_FAIL);
}

TEST_CASE("lookup claim: tampered grand product or pairs rejected") {
  Rig rig(512, 8);
  lut::LookupTable table = lut::build_table(lut::LutFn::RSQRT, rig.fp);
  std::vector<std::pair<uint32_t, int64_t>> pairs{{1, table.codes[1]}, {2, table.codes[2]}};
  Transcript tp("lookup-tamper");
  LookupClaimProof p = lookup_claim_prove(rig.g, table, 3, pairs, 8, tp);

  LookupClaimProof bad = p;
  bad.grand = mod_q(rig.g, bad.grand + 1);
  Transcript tv1("lookup-tamper");
  CHECK(lookup_claim_verify(rig.g, table, bad, 8, tv1) == ClaimVerdict::LOOKUP_FAIL);

  LookupClaimProof bad2 = p;
  bad2.pairs[0].second += 1;
  Transcript tv2("lookup-tamper");
  CHECK(lookup_claim_verify(rig.g, table, bad2, 8, tv2) == ClaimVerdict::LOOKUP_FAIL);
}

TEST_CASE("lookup serialization round-trips") {
  Rig rig(512, 8);
  lut::LookupTable table = lut::build_table(lut::LutFn::SILU, rig.fp);
  std::vector<std::pair<uint32_t, int64_t>> pairs{{9, table.codes[9]}};
  Transcript tp("lookup-ser");
  LookupClaimProof p = lookup_claim_prove(rig.g, table, 2, pairs, 8, tp);
  Bytes b = lookup_claim_serialize(rig.g, p);
  ByteReader r(b);
  LookupClaimProof p2 = lookup_claim_deserialize(rig.g, r, 8);
  CHECK(r.done());
  CHECK(p2.pairs == p.pairs);
  CHECK(p2.grand == p.grand);
  Transcript tv("lookup-ser");
  CHECK(lookup_claim_verify(rig.g, table, p2, 8, tv) == ClaimVerdict::ACCEPT);
}

TEST_CASE("small-field matmul false-accept rate within the analytic bound") {
  TamperStats st = measure_matmul_false_accept(Bn(101), 4, 4, 4, 16, 5000, 1);
  CHECK(st.trials == 5000);
  CHECK(st.analytic_bound == doctest::Approx(2.0 / 101));
  CHECK(st.rate() <= st.analytic_bound + st.three_sigma());
  // sanity: with a tiny field some false accepts should actually occur
  CHECK(st.false_accepts > 0);
}

TEST_CASE("small-field lookup false-accept rate within the analytic bound") {
  TamperStats st = measure_lookup_false_accept(Bn(101), 8, 8, 5000, 2);
  // delta-collision term |T|/q plus identity coincidence (|f|+|T|)/q
  CHECK(st.analytic_bound == doctest::Approx(24.0 / 101));
  CHECK(st.rate() <= st.analytic_bound + st.three_sigma());
  CHECK(st.false_accepts > 0);
}

TEST_CASE("large field: tampered claims never falsely accepted") {
  GroupParams g = group_setup(seed_bytes(), 512, 2);
  TamperStats st = measure_matmul_false_accept(g.q, 3, 3, 3, 16, 300, 3);
  CHECK(st.false_accepts == 0);
}
