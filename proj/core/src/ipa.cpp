#include "nanozk/ipa.hpp"

#include <memory>
#include <stdexcept>

namespace nanozk::zk {

namespace {

bool is_pow2(size_t n) { return n > 0 && (n & (n - 1)) == 0; }

size_t log2_exact(size_t n) {
  size_t m = 0;
  while ((size_t{1} << m) < n) m++;
  return m;
}

Bytes hash_scalars(const GroupParams& g, const std::vector<Bn>& v) {
  Sha256 h;
  size_t w = g.scalar_width();
  for (const auto& x : v) {
    Bytes b = bn_to_be(mod_q(g, x), w);
    h.update(b);
  }
  Digest d = h.finish();
  return Bytes(d.begin(), d.end());
}

// Generator coefficients after folding: d_i = prod_j x_j^{+-1} with the
// sign taken from bit (m-j) of i.
std::vector<Bn> fold_coefficients(const GroupParams& g, const std::vector<Bn>& xs, size_t n) {
  size_t m = xs.size();
  std::vector<Bn> inv(m);
  for (size_t j = 0; j < m; j++) inv[j] = bn_invmod(xs[j], g.q);
  std::vector<Bn> d(n);
  for (size_t i = 0; i < n; i++) {
    Bn acc(1);
    for (size_t j = 0; j < m; j++) {
      bool hi = (i >> (m - 1 - j)) & 1;
      acc = acc * (hi ? xs[j] : inv[j]) % g.q;
    }
    d[i] = acc;
  }
  return d;
}

}  // namespace

Bn dot_mod_q(const GroupParams& g, const std::vector<Bn>& a, const std::vector<Bn>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot product arity mismatch");
  Bn acc(0);
  for (size_t i = 0; i < a.size(); i++) acc += a[i] * b[i] % g.q;
  return mod_q(g, acc);
}

BatchAcc::BatchAcc(const GroupParams& g, const Bytes& weight_seed)
    : g_(g), rng_(weight_seed, "batch-verify-weights"), gen_exp_(g.gens.size(), Bn(0)),
      h_exp_(0), u_exp_(0) {}

Bn BatchAcc::next_weight() {
  // 128-bit weights are plenty for the soundness of the random linear
  // combination and keep the settle multi-exp fast.
  Bytes b = rng_.bytes(16);
  return mod_q(g_, bn_from_be(b));
}

void BatchAcc::add_gen(size_t index, const Bn& exp) {
  gen_exp_.at(index) = mod_q(g_, gen_exp_.at(index) + exp);
}
void BatchAcc::add_h(const Bn& exp) { h_exp_ = mod_q(g_, h_exp_ + exp); }
void BatchAcc::add_u(const Bn& exp) { u_exp_ = mod_q(g_, u_exp_ + exp); }
void BatchAcc::add_extra(const Bn& base, const Bn& exp) {
  extras_.emplace_back(base, mod_q(g_, exp));
}

bool BatchAcc::settle() {
  std::vector<const Bn*> bases;
  std::vector<Bn> exps;
  for (size_t i = 0; i < gen_exp_.size(); i++) {
    if (sgn(gen_exp_[i]) == 0) continue;
    bases.push_back(&g_.gens[i]);
    exps.push_back(gen_exp_[i]);
  }
  if (sgn(h_exp_) != 0) {
    bases.push_back(&g_.h);
    exps.push_back(h_exp_);
  }
  if (sgn(u_exp_) != 0) {
    bases.push_back(&g_.u);
    exps.push_back(u_exp_);
  }
  for (const auto& [base, exp] : extras_) {
    if (sgn(exp) == 0) continue;
    bases.push_back(&base);
    exps.push_back(exp);
  }
  if (bases.empty()) return true;
  return multi_exp(g_, bases, exps) == 1;
}

// ---- single-vector argument (public b) ----

IpaProof ipa_prove(const GroupParams& g, size_t gen_offset, const std::vector<Bn>& a_in,
                   const Bn& rho, const std::vector<Bn>& b_in, const Bn& c, const Bn& C,
                   Transcript& t, SeededRng& blind_rng) {
  size_t n = a_in.size();
  if (!is_pow2(n)) throw std::invalid_argument("ipa vector length must be a power of two");
  if (b_in.size() != n) throw std::invalid_argument("ipa vector lengths disagree");

  t.absorb_u64("ipa/n", n);
  t.absorb_element("ipa/C", C, g.element_width());
  t.absorb_scalar("ipa/c", mod_q(g, c));
  t.absorb("ipa/b", hash_scalars(g, b_in));
  Bn mu = t.challenge_nonzero("ipa/mu", g.q);
  Bn uprime = g.pow(g.u, mu);

  std::vector<Bn> a(a_in), b(b_in);
  for (auto& x : a) x = mod_q(g, x);
  for (auto& x : b) x = mod_q(g, x);
  std::vector<Bn> gens(g.gens.begin() + gen_offset, g.gens.begin() + gen_offset + n);
  Bn rho_cur = mod_q(g, rho);

  IpaProof proof;
  size_t m = log2_exact(n);
  proof.L.reserve(m);
  proof.R.reserve(m);

  while (a.size() > 1) {
    size_t half = a.size() / 2;
    std::vector<Bn> aL(a.begin(), a.begin() + half), aR(a.begin() + half, a.end());
    std::vector<Bn> bL(b.begin(), b.begin() + half), bR(b.begin() + half, b.end());

    Bn rhoL = mod_q(g, bn_from_be(blind_rng.bytes(g.scalar_width())));
    Bn rhoR = mod_q(g, bn_from_be(blind_rng.bytes(g.scalar_width())));
    Bn cL = dot_mod_q(g, aL, bR);
    Bn cR = dot_mod_q(g, aR, bL);

    std::vector<const Bn*> basesL{&g.h, &uprime};
    std::vector<Bn> expsL{rhoL, cL};
    std::vector<const Bn*> basesR{&g.h, &uprime};
    std::vector<Bn> expsR{rhoR, cR};
    for (size_t i = 0; i < half; i++) {
      basesL.push_back(&gens[half + i]);
      expsL.push_back(aL[i]);
      basesR.push_back(&gens[i]);
      expsR.push_back(aR[i]);
    }
    Bn L = multi_exp(g, basesL, expsL);
    Bn R = multi_exp(g, basesR, expsR);
    t.absorb_element("ipa/L", L, g.element_width());
    t.absorb_element("ipa/R", R, g.element_width());
    proof.L.push_back(L);
    proof.R.push_back(R);

    Bn x = t.challenge_nonzero("ipa/x", g.q);
    Bn xinv = bn_invmod(x, g.q);

    std::vector<Bn> a2(half), b2(half), g2(half);
    for (size_t i = 0; i < half; i++) {
      a2[i] = mod_q(g, x * aL[i] + xinv * aR[i]);
      b2[i] = mod_q(g, xinv * bL[i] + x * bR[i]);
      g2[i] = g.pow(gens[i], xinv) * g.pow(gens[half + i], x) % g.p;
    }
    a.swap(a2);
    b.swap(b2);
    gens.swap(g2);
    rho_cur = mod_q(g, rho_cur + x * x % g.q * rhoL + xinv * xinv % g.q * rhoR);
  }

  proof.a_final = a[0];
  proof.rho_final = rho_cur;
  return proof;
}

bool ipa_verify(const GroupParams& g, size_t gen_offset, const Bn& C,
                const std::vector<Bn>& b_in, const Bn& c, const IpaProof& proof,
                Transcript& t, BatchAcc* batch) {
  size_t n = b_in.size();
  if (!is_pow2(n)) return false;
  size_t m = log2_exact(n);
  if (proof.L.size() != m || proof.R.size() != m) return false;
  if (!g.in_group(C)) return false;
  for (size_t j = 0; j < m; j++)
    if (!g.in_group(proof.L[j]) || !g.in_group(proof.R[j])) return false;
  if (proof.a_final < 0 || proof.a_final >= g.q) return false;
  if (proof.rho_final < 0 || proof.rho_final >= g.q) return false;

  t.absorb_u64("ipa/n", n);
  t.absorb_element("ipa/C", C, g.element_width());
  t.absorb_scalar("ipa/c", mod_q(g, c));
  t.absorb("ipa/b", hash_scalars(g, b_in));
  Bn mu = t.challenge_nonzero("ipa/mu", g.q);

  std::vector<Bn> xs(m);
  for (size_t j = 0; j < m; j++) {
    t.absorb_element("ipa/L", proof.L[j], g.element_width());
    t.absorb_element("ipa/R", proof.R[j], g.element_width());
    xs[j] = t.challenge_nonzero("ipa/x", g.q);
  }

  // fold b with the challenges
  std::vector<Bn> b(b_in);
  for (auto& x : b) x = mod_q(g, x);
  for (size_t j = 0; j < m; j++) {
    Bn xinv = bn_invmod(xs[j], g.q);
    size_t half = b.size() / 2;
    std::vector<Bn> b2(half);
    for (size_t i = 0; i < half; i++) b2[i] = mod_q(g, xinv * b[i] + xs[j] * b[half + i]);
    b.swap(b2);
  }
  Bn b_final = b[0];
  std::vector<Bn> d = fold_coefficients(g, xs, n);

  // Equation: h^rho_f * prod g_i^{d_i a_f} * u^{mu (a_f b_f - c)}
  //           * C^{-1} * prod L_j^{-x_j^2} R_j^{-x_j^{-2}} == 1
  std::unique_ptr<BatchAcc> local;
  BatchAcc* acc = batch;
  if (!acc) {
    Bytes seed;
    put_str(seed, "ipa-single-verify");
    local = std::make_unique<BatchAcc>(g, seed);
    acc = local.get();
  }
  Bn w = acc->next_weight();
  acc->add_h(w * proof.rho_final);
  for (size_t i = 0; i < n; i++) acc->add_gen(gen_offset + i, w * d[i] % g.q * proof.a_final);
  Bn uexp = mod_q(g, proof.a_final * b_final % g.q - mod_q(g, c));
  acc->add_u(w * mu % g.q * uexp);
  acc->add_extra(C, g.q - w);
  for (size_t j = 0; j < m; j++) {
    Bn x2 = xs[j] * xs[j] % g.q;
    Bn xinv = bn_invmod(xs[j], g.q);
    Bn xinv2 = xinv * xinv % g.q;
    acc->add_extra(proof.L[j], mod_q(g, -(w * x2)));
    acc->add_extra(proof.R[j], mod_q(g, -(w * xinv2)));
  }
  if (local) return local->settle();
  return true;
}

// ---- two-vector argument ----

Ipa2Proof ipa2_prove(const GroupParams& g, size_t a_offset, size_t b_offset,
                     const std::vector<Bn>& a_in, const std::vector<Bn>& b_in, const Bn& rho,
                     const Bn& c, const Bn& P0, Transcript& t, SeededRng& blind_rng) {
  size_t n = a_in.size();
  if (!is_pow2(n) || b_in.size() != n)
    throw std::invalid_argument("ipa2 vector lengths must match and be a power of two");

  t.absorb_u64("ipa2/n", n);
  t.absorb_element("ipa2/P", P0, g.element_width());
  t.absorb_scalar("ipa2/c", mod_q(g, c));
  Bn mu = t.challenge_nonzero("ipa2/mu", g.q);
  Bn uprime = g.pow(g.u, mu);

  std::vector<Bn> a(a_in), b(b_in);
  for (auto& x : a) x = mod_q(g, x);
  for (auto& x : b) x = mod_q(g, x);
  std::vector<Bn> ga(g.gens.begin() + a_offset, g.gens.begin() + a_offset + n);
  std::vector<Bn> gb(g.gens.begin() + b_offset, g.gens.begin() + b_offset + n);
  Bn rho_cur = mod_q(g, rho);

  Ipa2Proof proof;
  while (a.size() > 1) {
    size_t half = a.size() / 2;
    std::vector<Bn> aL(a.begin(), a.begin() + half), aR(a.begin() + half, a.end());
    std::vector<Bn> bL(b.begin(), b.begin() + half), bR(b.begin() + half, b.end());

    Bn rhoL = mod_q(g, bn_from_be(blind_rng.bytes(g.scalar_width())));
    Bn rhoR = mod_q(g, bn_from_be(blind_rng.bytes(g.scalar_width())));
    Bn cL = dot_mod_q(g, aL, bR);
    Bn cR = dot_mod_q(g, aR, bL);

    std::vector<const Bn*> basesL{&g.h, &uprime};
    std::vector<Bn> expsL{rhoL, cL};
    std::vector<const Bn*> basesR{&g.h, &uprime};
    std::vector<Bn> expsR{rhoR, cR};
    for (size_t i = 0; i < half; i++) {
      basesL.push_back(&ga[half + i]);
      expsL.push_back(aL[i]);
      basesL.push_back(&gb[i]);
      expsL.push_back(bR[i]);
      basesR.push_back(&ga[i]);
      expsR.push_back(aR[i]);
      basesR.push_back(&gb[half + i]);
      expsR.push_back(bL[i]);
    }
    Bn L = multi_exp(g, basesL, expsL);
    Bn R = multi_exp(g, basesR, expsR);
    t.absorb_element("ipa2/L", L, g.element_width());
    t.absorb_element("ipa2/R", R, g.element_width());
    proof.L.push_back(L);
    proof.R.push_back(R);

    Bn x = t.challenge_nonzero("ipa2/x", g.q);
    Bn xinv = bn_invmod(x, g.q);

    std::vector<Bn> a2(half), b2(half), ga2(half), gb2(half);
    for (size_t i = 0; i < half; i++) {
      a2[i] = mod_q(g, x * aL[i] + xinv * aR[i]);
      b2[i] = mod_q(g, xinv * bL[i] + x * bR[i]);
      ga2[i] = g.pow(ga[i], xinv) * g.pow(ga[half + i], x) % g.p;
      gb2[i] = g.pow(gb[i], x) * g.pow(gb[half + i], xinv) % g.p;
    }
    a.swap(a2);
    b.swap(b2);
    ga.swap(ga2);
    gb.swap(gb2);
    rho_cur = mod_q(g, rho_cur + x * x % g.q * rhoL + xinv * xinv % g.q * rhoR);
  }

  proof.a_final = a[0];
  proof.b_final = b[0];
  proof.rho_final = rho_cur;
  return proof;
}

bool ipa2_verify(const GroupParams& g, size_t a_offset, size_t b_offset, const Bn& P0,
                 const Bn& c, size_t n, const Ipa2Proof& proof, Transcript& t,
                 BatchAcc* batch) {
  if (!is_pow2(n)) return false;
  size_t m = log2_exact(n);
  if (proof.L.size() != m || proof.R.size() != m) return false;
  if (!g.in_group(P0)) return false;
  for (size_t j = 0; j < m; j++)
    if (!g.in_group(proof.L[j]) || !g.in_group(proof.R[j])) return false;
  for (const Bn* s : {&proof.a_final, &proof.b_final, &proof.rho_final})
    if (*s < 0 || *s >= g.q) return false;

  t.absorb_u64("ipa2/n", n);
  t.absorb_element("ipa2/P", P0, g.element_width());
  t.absorb_scalar("ipa2/c", mod_q(g, c));
  Bn mu = t.challenge_nonzero("ipa2/mu", g.q);

  std::vector<Bn> xs(m);
  for (size_t j = 0; j < m; j++) {
    t.absorb_element("ipa2/L", proof.L[j], g.element_width());
    t.absorb_element("ipa2/R", proof.R[j], g.element_width());
    xs[j] = t.challenge_nonzero("ipa2/x", g.q);
  }
  std::vector<Bn> d = fold_coefficients(g, xs, n);

  std::unique_ptr<BatchAcc> local;
  BatchAcc* acc = batch;
  if (!acc) {
    Bytes seed;
    put_str(seed, "ipa2-verify");
    local = std::make_unique<BatchAcc>(g, seed);
    acc = local.get();
  }
  Bn w = acc->next_weight();
  acc->add_h(w * proof.rho_final);
  for (size_t i = 0; i < n; i++) {
    acc->add_gen(a_offset + i, w * d[i] % g.q * proof.a_final);
    acc->add_gen(b_offset + i, w * bn_invmod(d[i], g.q) % g.q * proof.b_final);
  }
  Bn uexp2 = mod_q(g, proof.a_final * proof.b_final % g.q - mod_q(g, c));
  acc->add_u(w * mu % g.q * uexp2);
  acc->add_extra(P0, g.q - w);
  for (size_t j = 0; j < m; j++) {
    Bn x2 = xs[j] * xs[j] % g.q;
    Bn xinv = bn_invmod(xs[j], g.q);
    acc->add_extra(proof.L[j], mod_q(g, -(w * x2)));
    acc->add_extra(proof.R[j], mod_q(g, -(w * (xinv * xinv % g.q))));
  }
  if (local) return local->settle();
  return true;
}

// ---- serialization ----

Bytes ipa_serialize(const GroupParams& g, const IpaProof& p) {
  Bytes out;
  size_t ew = g.element_width(), sw = g.scalar_width();
  put_u8(out, static_cast<uint8_t>(p.L.size()));
  for (size_t j = 0; j < p.L.size(); j++) {
    put_bytes(out, bn_to_be(p.L[j], ew));
    put_bytes(out, bn_to_be(p.R[j], ew));
  }
  put_bytes(out, bn_to_be(p.a_final, sw));
  put_bytes(out, bn_to_be(p.rho_final, sw));
  return out;
}

IpaProof ipa_deserialize(const GroupParams& g, ByteReader& r) {
  IpaProof p;
  size_t ew = g.element_width(), sw = g.scalar_width();
  uint8_t m = r.u8();
  p.L.resize(m);
  p.R.resize(m);
  for (size_t j = 0; j < m; j++) {
    p.L[j] = bn_from_be(r.take(ew));
    p.R[j] = bn_from_be(r.take(ew));
  }
  p.a_final = bn_from_be(r.take(sw));
  p.rho_final = bn_from_be(r.take(sw));
  return p;
}

Bytes ipa2_serialize(const GroupParams& g, const Ipa2Proof& p) {
  Bytes out;
  size_t ew = g.element_width(), sw = g.scalar_width();
  put_u8(out, static_cast<uint8_t>(p.L.size()));
  for (size_t j = 0; j < p.L.size(); j++) {
    put_bytes(out, bn_to_be(p.L[j], ew));
    put_bytes(out, bn_to_be(p.R[j], ew));
  }
  put_bytes(out, bn_to_be(p.a_final, sw));
  put_bytes(out, bn_to_be(p.b_final, sw));
  put_bytes(out, bn_to_be(p.rho_final, sw));
  return out;
}

Ipa2Proof ipa2_deserialize(const GroupParams& g, ByteReader& r) {
  Ipa2Proof p;
  size_t ew = g.element_width(), sw = g.scalar_width();
  uint8_t m = r.u8();
  p.L.resize(m);
  p.R.resize(m);
  for (size_t j = 0; j < m; j++) {
    p.L[j] = bn_from_be(r.take(ew));
    p.R[j] = bn_from_be(r.take(ew));
  }
  p.a_final = bn_from_be(r.take(sw));
  p.b_final = bn_from_be(r.take(sw));
  p.rho_final = bn_from_be(r.take(sw));
  return p;
}

}  // namespace nanozk::zk
