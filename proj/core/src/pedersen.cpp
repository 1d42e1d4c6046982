#include "nanozk/pedersen.hpp"

#include <stdexcept>

namespace nanozk::zk {

Bn pedersen_commit(const GroupParams& g, const std::vector<Bn>& a, const Bn& r,
                   size_t gen_offset) {
  if (gen_offset + a.size() > g.gens.size())
    throw std::length_error("vector exceeds available generators");
  std::vector<const Bn*> bases;
  std::vector<Bn> exps;
  bases.reserve(a.size() + 1);
  exps.reserve(a.size() + 1);
  if (sgn(r) != 0) {
    bases.push_back(&g.h);
    exps.push_back(mod_q(g, r));
  }
  for (size_t i = 0; i < a.size(); i++) {
    if (sgn(a[i]) == 0) continue;
    bases.push_back(&g.gens[gen_offset + i]);
    exps.push_back(mod_q(g, a[i]));
  }
  if (bases.empty()) return Bn(1);
  return multi_exp(g, bases, exps);
}

Bn pedersen_commit_codes(const GroupParams& g, const int64_t* codes, size_t n, const Bn& r,
                         size_t gen_offset) {
  if (gen_offset + n > g.gens.size())
    throw std::length_error("vector exceeds available generators");
  std::vector<const Bn*> bases;
  std::vector<Bn> exps;
  bases.reserve(n + 1);
  exps.reserve(n + 1);
  if (sgn(r) != 0) {
    bases.push_back(&g.h);
    exps.push_back(mod_q(g, r));
  }
  // |codes| are small; exponentiate by the magnitude and invert afterwards
  // so the shared squaring chain stays short.
  Bn inv_part(1);
  std::vector<const Bn*> inv_bases;
  std::vector<Bn> inv_exps;
  for (size_t i = 0; i < n; i++) {
    int64_t c = codes[i];
    if (c == 0) continue;
    if (c > 0) {
      bases.push_back(&g.gens[gen_offset + i]);
      exps.push_back(Bn(static_cast<unsigned long>(c)));
    } else {
      inv_bases.push_back(&g.gens[gen_offset + i]);
      uint64_t mag = static_cast<uint64_t>(-(c + 1)) + 1;
      inv_exps.push_back(Bn(static_cast<unsigned long>(mag)));
    }
  }
  Bn acc = bases.empty() ? Bn(1) : multi_exp(g, bases, exps);
  if (!inv_bases.empty()) {
    inv_part = multi_exp(g, inv_bases, inv_exps);
    acc = acc * g.inv(inv_part) % g.p;
  }
  return acc;
}

}  // namespace nanozk::zk
