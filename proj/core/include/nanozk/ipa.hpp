#pragma once

#include <optional>
#include <vector>

#include "nanozk/group.hpp"
#include "nanozk/pedersen.hpp"
#include "nanozk/rng.hpp"
#include "nanozk/transcript.hpp"

namespace nanozk::zk {

// Bulletproofs-style halving argument for <a, b> = c where C = h^rho * g^a
// is a hiding commitment to a and b is public. log2(n) rounds of (L, R),
// then the folded opening (a_final, rho_final).
struct IpaProof {
  std::vector<Bn> L, R;
  Bn a_final;
  Bn rho_final;
  bool operator==(const IpaProof&) const = default;
};

// Variant with both vectors secret, for product claims: the statement is
// P = h^rho * g^a * k^b * u'^{<a,b>} with a over gens[goff..] and b over
// gens[koff..]. Three final scalars instead of two.
struct Ipa2Proof {
  std::vector<Bn> L, R;
  Bn a_final, b_final;
  Bn rho_final;
  bool operator==(const Ipa2Proof&) const = default;
};

// Accumulates verification equations prod base^exp == 1 across many
// sub-proofs, weighted by hash-derived random scalars, and settles them in
// one multi-exponentiation. IPA verification is linear in n; batching is
// what keeps full-proof verification far below proving time.
class BatchAcc {
 public:
  BatchAcc(const GroupParams& g, const Bytes& weight_seed);

  Bn next_weight();
  void add_gen(size_t index, const Bn& exp);
  void add_h(const Bn& exp);
  void add_u(const Bn& exp);
  void add_extra(const Bn& base, const Bn& exp);
  bool settle();  // true iff the accumulated product is the identity

 private:
  const GroupParams& g_;
  SeededRng rng_;
  std::vector<Bn> gen_exp_;
  Bn h_exp_, u_exp_;
  std::vector<std::pair<Bn, Bn>> extras_;
};

IpaProof ipa_prove(const GroupParams& g, size_t gen_offset, const std::vector<Bn>& a,
                   const Bn& rho, const std::vector<Bn>& b, const Bn& c, const Bn& C,
                   Transcript& t, SeededRng& blind_rng);

// Verifies into the accumulator when batch != nullptr (deferred check),
// otherwise settles immediately. Returns false on structural problems
// (wrong length, element outside the subgroup) or, in immediate mode, on a
// failed equation.
bool ipa_verify(const GroupParams& g, size_t gen_offset, const Bn& C,
                const std::vector<Bn>& b, const Bn& c, const IpaProof& proof, Transcript& t,
                BatchAcc* batch = nullptr);

// The statement is (P0 = h^rho * g^a * k^b, c = <a,b>); the u-side term is
// bound after the rerandomizing challenge, P = P0 * u^{mu c}.
Ipa2Proof ipa2_prove(const GroupParams& g, size_t a_offset, size_t b_offset,
                     const std::vector<Bn>& a, const std::vector<Bn>& b, const Bn& rho,
                     const Bn& c, const Bn& P0, Transcript& t, SeededRng& blind_rng);

bool ipa2_verify(const GroupParams& g, size_t a_offset, size_t b_offset, const Bn& P0,
                 const Bn& c, size_t n, const Ipa2Proof& proof, Transcript& t,
                 BatchAcc* batch = nullptr);

// Field dot product mod q.
Bn dot_mod_q(const GroupParams& g, const std::vector<Bn>& a, const std::vector<Bn>& b);

// Serialized sizes are exact and a pure function of (rounds, widths).
Bytes ipa_serialize(const GroupParams& g, const IpaProof& p);
IpaProof ipa_deserialize(const GroupParams& g, ByteReader& r);
Bytes ipa2_serialize(const GroupParams& g, const Ipa2Proof& p);
Ipa2Proof ipa2_deserialize(const GroupParams& g, ByteReader& r);

}  // namespace nanozk::zk
