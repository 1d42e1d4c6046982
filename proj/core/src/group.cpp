#include "nanozk/group.hpp"

#include <stdexcept>

namespace nanozk::zk {

namespace {

// Standard MODP safe primes (1024/2048-bit); the 512-bit one is the
// smallest safe prime >= 2^511 + 2^510 (congruent 3 mod 4), fixed here so
// setup never searches.
const char* kP1024 =
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74020BBEA63B139B22514A0879"
    "8E3404DDEF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B"
    "0BFF5CB6F406B7EDEE386BFB5A899FA5AE9F24117C4B1FE649286651ECE65381FFFFFFFFFFFFFFFF";
const char* kP2048 =
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74020BBEA63B139B22514A0879"
    "8E3404DDEF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B"
    "0BFF5CB6F406B7EDEE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF0598DA4836"
    "1C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB9ED529077096966D670C354E4ABC9804"
    "F1746C08CA18217C32905E462E36CE3BE39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF6"
    "955817183995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";
const char* kP512 =
    "C000000000000000000000000000000000000000000000000000000000000000000000000000000000000000"
    "000000000000000000000000000000000000854F";

Bn preset_prime(uint32_t bits) {
  switch (bits) {
    case 16: return Bn(23);
    case 512: return bn_from_hex_str(kP512);
    case 1024: return bn_from_hex_str(kP1024);
    case 2048: return bn_from_hex_str(kP2048);
    default:
      throw std::invalid_argument("unsupported group bits (use 16, 512, 1024 or 2048)");
  }
}

// Counter-mode hash expansion into [0, p).
Bn hash_to_zp(const Bytes& seed, const std::string& label, uint64_t index, const Bn& p) {
  size_t width = (bn_bit_length(p) + 7) / 8 + 16;  // extra bytes flatten mod bias
  Bytes material;
  for (uint32_t ctr = 0; material.size() < width; ctr++) {
    Sha256 h;
    h.update(std::string("nanozk-group-v1"));
    h.update(seed);
    h.update(label);
    Bytes idx;
    put_u64le(idx, index);
    put_u32le(idx, ctr);
    h.update(idx);
    Digest d = h.finish();
    put_bytes(material, d.data(), d.size());
  }
  material.resize(width);
  return bn_from_be(material) % p;
}

Bn derive_generator(const Bytes& seed, const std::string& label, const Bn& p) {
  for (uint64_t attempt = 0;; attempt++) {
    if (attempt > 1000) throw std::runtime_error("generator derivation exhausted");
    Bn x = hash_to_zp(seed, label, attempt, p);
    Bn g = x * x % p;  // square lands in the order-q subgroup
    if (g != 1 && g != 0) return g;
  }
}

}  // namespace

size_t GroupParams::scalar_width() const {
  size_t qw = (bn_bit_length(q) + 7) / 8;
  return qw < 32 ? 32 : qw;
}

bool GroupParams::in_group(const Bn& x) const {
  if (x <= 0 || x >= p) return false;
  if (x == 1) return true;
  return bn_jacobi(x, p) == 1;
}

Bn GroupParams::pow(const Bn& base, const Bn& e) const {
  if (sgn(e) < 0) {
    Bn r = bn_powm(base, -e, p);
    return bn_invmod(r, p);
  }
  return bn_powm(base, e, p);
}

GroupParams group_setup(const Bytes& seed, uint32_t bits, size_t num_gens) {
  GroupParams g;
  g.bits = bits;
  g.p = preset_prime(bits);
  g.q = (g.p - 1) / 2;
  g.seed = seed;
  g.gens.reserve(num_gens);
  for (size_t i = 0; i < num_gens; i++)
    g.gens.push_back(derive_generator(seed, "gen/" + std::to_string(i), g.p));
  g.h = derive_generator(seed, "blind", g.p);
  g.u = derive_generator(seed, "ipa-u", g.p);
  return g;
}

Bn mod_q(const GroupParams& g, const Bn& x) {
  Bn r = x % g.q;
  if (sgn(r) < 0) r += g.q;
  return r;
}

Bn lift_i64(const GroupParams& g, int64_t v) {
  if (v >= 0) return Bn(static_cast<unsigned long>(v)) % g.q;
  Bn a = bn_from_i64(v);
  return mod_q(g, a);
}

Bn multi_exp(const GroupParams& g, const std::vector<const Bn*>& bases,
             const std::vector<Bn>& exps) {
  if (bases.size() != exps.size()) throw std::invalid_argument("multi_exp arity mismatch");
  size_t n = bases.size();
  if (n == 0) return Bn(1);

  // Small batches: plain powm is cheaper than the shared squaring chain.
  if (n <= 2) {
    Bn acc(1);
    for (size_t i = 0; i < n; i++) acc = acc * bn_powm(*bases[i], exps[i], g.p) % g.p;
    return acc;
  }

  constexpr int kWindow = 4;
  constexpr int kTable = 1 << kWindow;
  size_t max_bits = 1;
  for (const auto& e : exps) max_bits = std::max(max_bits, bn_bit_length(e));
  size_t windows = (max_bits + kWindow - 1) / kWindow;

  // per-base tables base^0..base^15
  std::vector<std::vector<Bn>> tables(n);
  for (size_t i = 0; i < n; i++) {
    auto& t = tables[i];
    t.resize(kTable);
    t[0] = 1;
    t[1] = *bases[i] % g.p;
    for (int k = 2; k < kTable; k++) t[k] = t[k - 1] * t[1] % g.p;
  }

  Bn acc(1);
  for (size_t wi = windows; wi-- > 0;) {
    for (int s = 0; s < kWindow; s++) acc = acc * acc % g.p;
    for (size_t i = 0; i < n; i++) {
      unsigned digit = 0;
      for (int b = kWindow - 1; b >= 0; b--) {
        size_t bit = wi * kWindow + b;
        digit = (digit << 1) |
                (mpz_tstbit(exps[i].get_mpz_t(), static_cast<mp_bitcnt_t>(bit)) ? 1u : 0u);
      }
      if (digit) acc = acc * tables[i][digit] % g.p;
    }
  }
  return acc;
}

Bn multi_exp(const GroupParams& g, const std::vector<Bn>& bases, const std::vector<Bn>& exps) {
  std::vector<const Bn*> ptrs(bases.size());
  for (size_t i = 0; i < bases.size(); i++) ptrs[i] = &bases[i];
  return multi_exp(g, ptrs, exps);
}

Bytes GroupParams::serialize() const {
  Bytes out;
  put_str(out, "NZKG");
  put_u8(out, 1);
  put_u32le(out, bits);
  size_t w = element_width();
  put_u32le(out, static_cast<uint32_t>(gens.size()));
  put_u32le(out, static_cast<uint32_t>(seed.size()));
  put_bytes(out, seed);
  put_bytes(out, bn_to_be(p, w));
  put_bytes(out, bn_to_be(q, w));
  for (const auto& gi : gens) put_bytes(out, bn_to_be(gi, w));
  put_bytes(out, bn_to_be(h, w));
  put_bytes(out, bn_to_be(u, w));
  return out;
}

GroupParams GroupParams::deserialize(const Bytes& b) {
  ByteReader r(b);
  r.expect_magic("NZKG", 4);
  if (r.u8() != 1) throw std::invalid_argument("unsupported group version");
  GroupParams g;
  g.bits = r.u32le();
  size_t w = g.element_width();
  uint32_t ngens = r.u32le();
  uint32_t seed_len = r.u32le();
  g.seed = r.take(seed_len);
  g.p = bn_from_be(r.take(w));
  g.q = bn_from_be(r.take(w));
  g.gens.resize(ngens);
  for (auto& gi : g.gens) gi = bn_from_be(r.take(w));
  g.h = bn_from_be(r.take(w));
  g.u = bn_from_be(r.take(w));
  if (!r.done()) throw std::invalid_argument("trailing bytes after group params");
  return g;
}

Digest GroupParams::digest() const { return Sha256::of(serialize()); }

}  // namespace nanozk::zk
