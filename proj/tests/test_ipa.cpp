#include <doctest.h>

#include "nanozk/ipa.hpp"

using namespace nanozk;
using namespace nanozk::zk;

namespace {

Bytes seed_bytes(const std::string& s = "ipa-test-seed") {
  Bytes b;
  put_str(b, s);
  return b;
}

struct Setup {
  GroupParams g;
  SeededRng rng;
  Setup(uint32_t bits, size_t gens, uint64_t seed = 1)
      : g(group_setup(seed_bytes(), bits, gens)), rng(seed, "ipa-test") {}
  Bn scalar() { return mod_q(g, bn_from_be(rng.bytes(g.scalar_width() + 8))); }
  std::vector<Bn> vec(size_t n) {
    std::vector<Bn> v(n);
    for (auto& x : v) x = scalar();
    return v;
  }
};

struct Statement {
  std::vector<Bn> a, b;
  Bn rho, c, C;
};

Statement make_statement(Setup& s, size_t n, size_t offset = 0) {
  Statement st;
  st.a = s.vec(n);
  st.b = s.vec(n);
  st.rho = s.scalar();
  st.c = dot_mod_q(s.g, st.a, st.b);
  st.C = pedersen_commit(s.g, st.a, st.rho, offset);
  return st;
}

}  // namespace

TEST_CASE("honest proofs verify for every power-of-two length") {
  Setup s(512, 64);
  for (size_t n : {1, 2, 4, 8, 16, 32, 64}) {
    Statement st = make_statement(s, n);
    Transcript tp("ipa-honest");
    SeededRng blinds(n, "blinds");
    IpaProof proof = ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
    CHECK(proof.L.size() == (n == 1 ? 0 : static_cast<size_t>(__builtin_ctzll(n))));
    Transcript tv("ipa-honest");
    CHECK(ipa_verify(s.g, 0, st.C, st.b, st.c, proof, tv));
  }
}

TEST_CASE("spec example: a=[1,2], b=[3,4], c=11") {
  Setup s(512, 8);
  std::vector<Bn> a{Bn(1), Bn(2)}, b{Bn(3), Bn(4)};
  Bn rho = s.scalar();
  Bn C = pedersen_commit(s.g, a, rho);
  Transcript tp("spec-example");
  SeededRng blinds(2, "blinds");
  IpaProof proof = ipa_prove(s.g, 0, a, rho, b, Bn(11), C, tp, blinds);
  // one round: exactly 2 group elements plus the 2 final scalars
  CHECK(proof.L.size() == 1);
  CHECK(proof.R.size() == 1);
  Transcript tv("spec-example");
  CHECK(ipa_verify(s.g, 0, C, b, Bn(11), proof, tv));
  // same proof for the wrong statement c=12 must fail
  Transcript tw("spec-example");
  CHECK(!ipa_verify(s.g, 0, C, b, Bn(12), proof, tw));
}

TEST_CASE("n=1 base case: zero rounds, two scalars, direct check") {
  Setup s(512, 4);
  Statement st = make_statement(s, 1);
  Transcript tp("base");
  SeededRng blinds(1, "blinds");
  IpaProof proof = ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
  CHECK(proof.L.empty());
  CHECK(proof.R.empty());
  CHECK(proof.a_final == st.a[0]);
  CHECK(proof.rho_final == mod_q(s.g, st.rho));
  Transcript tv("base");
  CHECK(ipa_verify(s.g, 0, st.C, st.b, st.c, proof, tv));
}

TEST_CASE("n=4 proof carries exactly 4 elements + 2 scalars") {
  Setup s(512, 8);
  Statement st = make_statement(s, 4);
  Transcript tp("n4");
  SeededRng blinds(4, "blinds");
  IpaProof proof = ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
  CHECK(proof.L.size() == 2);
  CHECK(proof.R.size() == 2);
  Bytes ser = ipa_serialize(s.g, proof);
  CHECK(ser.size() == 1 + 4 * s.g.element_width() + 2 * s.g.scalar_width());
}

TEST_CASE("generator slices keep statements separate") {
  Setup s(512, 32);
  Statement st = make_statement(s, 8, 16);
  Transcript tp("slice");
  SeededRng blinds(8, "blinds");
  IpaProof proof = ipa_prove(s.g, 16, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
  Transcript tv("slice");
  CHECK(ipa_verify(s.g, 16, st.C, st.b, st.c, proof, tv));
  // verifying against the wrong slice fails
  Transcript tw("slice");
  CHECK(!ipa_verify(s.g, 0, st.C, st.b, st.c, proof, tw));
}

TEST_CASE("transcript binding: different domain rejects") {
  Setup s(512, 16);
  Statement st = make_statement(s, 8);
  Transcript tp("domain-a");
  SeededRng blinds(8, "blinds");
  IpaProof proof = ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
  Transcript tv("domain-b");
  CHECK(!ipa_verify(s.g, 0, st.C, st.b, st.c, proof, tv));
}

TEST_CASE("single-bit mutations are rejected") {
  Setup s(512, 16);
  Statement st = make_statement(s, 16);
  Transcript tp("mutate");
  SeededRng blinds(16, "blinds");
  IpaProof proof = ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
  Bytes ser = ipa_serialize(s.g, proof);
  SeededRng rng(77, "mutate-bits");
  int rejected = 0, trials = 300;
  for (int i = 0; i < trials; i++) {
    Bytes mut = ser;
    size_t bit = rng.below(mut.size() * 8);
    mut[bit / 8] ^= uint8_t(1u << (bit % 8));
    bool ok = false;
    try {
      ByteReader r(mut);
      IpaProof mp = ipa_deserialize(s.g, r);
      Transcript tv("mutate");
      ok = ipa_verify(s.g, 0, st.C, st.b, st.c, mp, tv);
    } catch (const std::exception&) {
      ok = false;  // malformed parse counts as rejection
    }
    if (!ok) rejected++;
  }
  CHECK(rejected == trials);
}

TEST_CASE("batched verification matches immediate verification") {
  Setup s(512, 64);
  std::vector<Statement> sts;
  std::vector<IpaProof> proofs;
  for (int i = 0; i < 6; i++) {
    Statement st = make_statement(s, 16);
    Transcript tp("batch" + std::to_string(i));
    SeededRng blinds(100 + i, "blinds");
    proofs.push_back(ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds));
    sts.push_back(st);
  }
  BatchAcc acc(s.g, seed_bytes("batch-weights"));
  for (int i = 0; i < 6; i++) {
    Transcript tv("batch" + std::to_string(i));
    CHECK(ipa_verify(s.g, 0, sts[i].C, sts[i].b, sts[i].c, proofs[i], tv, &acc));
  }
  CHECK(acc.settle());
  // one corrupted proof poisons the batch
  BatchAcc acc2(s.g, seed_bytes("batch-weights-2"));
  proofs[3].a_final = mod_q(s.g, proofs[3].a_final + 1);
  for (int i = 0; i < 6; i++) {
    Transcript tv("batch" + std::to_string(i));
    ipa_verify(s.g, 0, sts[i].C, sts[i].b, sts[i].c, proofs[i], tv, &acc2);
  }
  CHECK(!acc2.settle());
}

TEST_CASE("two-vector argument: honest accept, tamper reject") {
  Setup s(512, 64);
  for (size_t n : {1, 2, 8, 32}) {
    std::vector<Bn> a = s.vec(n), b = s.vec(n);
    Bn ra = s.scalar(), rb = s.scalar();
    Bn c = dot_mod_q(s.g, a, b);
    Bn ca = pedersen_commit(s.g, a, ra, 0);
    Bn cb = pedersen_commit(s.g, b, rb, 32);
    Bn p0 = ca * cb % s.g.p;
    Transcript tp("ipa2");
    SeededRng blinds(n, "blinds2");
    Ipa2Proof proof = ipa2_prove(s.g, 0, 32, a, b, mod_q(s.g, ra + rb), c, p0, tp, blinds);
    Transcript tv("ipa2");
    CHECK(ipa2_verify(s.g, 0, 32, p0, c, n, proof, tv));
    // wrong claimed product
    Transcript tw("ipa2");
    CHECK(!ipa2_verify(s.g, 0, 32, p0, mod_q(s.g, c + 1), n, proof, tw));
    // mutated final scalar
    Ipa2Proof bad = proof;
    bad.b_final = mod_q(s.g, bad.b_final + 1);
    Transcript tx("ipa2");
    CHECK(!ipa2_verify(s.g, 0, 32, p0, c, n, bad, tx));
  }
}

TEST_CASE("honest proofs verify on the test group too") {
  Setup s(16, 16);
  // q=11 is tiny; completeness must still be exact
  for (int rep = 0; rep < 10; rep++) {
    Statement st = make_statement(s, 8);
    Transcript tp("tiny" + std::to_string(rep));
    SeededRng blinds(rep, "blinds");
    IpaProof proof = ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
    Transcript tv("tiny" + std::to_string(rep));
    CHECK(ipa_verify(s.g, 0, st.C, st.b, st.c, proof, tv));
  }
}

TEST_CASE("completeness across 100 random statements") {
  Setup s(512, 32);
  for (int rep = 0; rep < 100; rep++) {
    size_t n = size_t{1} << (rep % 6);
    Statement st = make_statement(s, n);
    Transcript tp("c" + std::to_string(rep));
    SeededRng blinds(rep, "blinds");
    IpaProof proof = ipa_prove(s.g, 0, st.a, st.rho, st.b, st.c, st.C, tp, blinds);
    Transcript tv("c" + std::to_string(rep));
    CHECK(ipa_verify(s.g, 0, st.C, st.b, st.c, proof, tv));
  }
}
