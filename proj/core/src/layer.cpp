#include "nanozk/layer.hpp"

#include <stdexcept>

namespace nanozk::zk {

uint32_t CircuitSpec::minimal_k(const nn::ModelConfig& cfg) {
  uint32_t need = std::max({cfg.dim, cfg.d_ff(), cfg.vocab, cfg.max_seq});
  uint32_t k = 0;
  while ((1u << k) < need) k++;
  return k;
}

void CircuitSpec::validate() const {
  cfg.validate();
  uint32_t vl = vec_len();
  if (cfg.dim > vl || cfg.d_ff() > vl || cfg.vocab > vl || cfg.max_seq > vl)
    throw std::invalid_argument("padded degree too small for this model");
  if (cfg.max_seq > row_cap) throw std::invalid_argument("row cap below max_seq");
  if (cfg.head_dim() > kht_row_cap) throw std::invalid_argument("kht row cap below head_dim");
  if (cfg.max_seq > lut_cap) throw std::invalid_argument("lookup capacity below max_seq");
}

Digest CircuitSpec::digest() const {
  Sha256 h;
  h.update(std::string("nanozk-circuit-v1"));
  Bytes b;
  put_u32le(b, k);
  put_u32le(b, row_cap);
  put_u32le(b, kht_row_cap);
  put_u32le(b, lut_cap);
  h.update(b);
  h.update(cfg.to_json());
  h.update(model_digest.data(), model_digest.size());
  for (const auto& d : table_digests) h.update(d.data(), d.size());
  h.update(group_digest.data(), group_digest.size());
  return h.finish();
}

LayerPlan build_layer_plan(const CircuitSpec& spec, LayerKind kind, uint32_t seq) {
  const nn::ModelConfig& cfg = spec.cfg;
  uint32_t d = cfg.dim, dff = cfg.d_ff(), dk = cfg.head_dim(), V = cfg.vocab;
  uint32_t rc = spec.row_cap, krc = spec.kht_row_cap;
  LayerPlan plan;
  plan.kind = kind;
  if (kind == LayerKind::EMBED) return plan;
  if (kind == LayerKind::HEAD) {
    plan.slots = {{"head_x", seq, d, rc}, {"logits", seq, V, rc}, {"head_r", seq, V, rc}};
    plan.matmuls = {{"lm", 0, -1, "lm_head", 1, 2}};
    plan.lookups = {{"final_norm", lut::LutFn::RSQRT}};
    return plan;
  }
  auto slot = [&](const std::string& name, uint32_t r, uint32_t c, uint32_t cap) {
    plan.slots.push_back({name, r, c, cap});
    return static_cast<int>(plan.slots.size() - 1);
  };
  int x1 = slot("x1", seq, d, rc);
  int q = slot("q", seq, d, rc);
  int kk = slot("k", seq, d, rc);
  int v = slot("v", seq, d, rc);
  int r_q = slot("r_q", seq, d, rc);
  int r_k = slot("r_k", seq, d, rc);
  int r_v = slot("r_v", seq, d, rc);
  plan.matmuls.push_back({"q", x1, -1, "wq", q, r_q});
  plan.matmuls.push_back({"k", x1, -1, "wk", kk, r_k});
  plan.matmuls.push_back({"v", x1, -1, "wv", v, r_v});
  for (uint32_t hIdx = 0; hIdx < cfg.num_heads; hIdx++) {
    std::string hs = std::to_string(hIdx);
    int qh = slot("qh" + hs, seq, dk, rc);
    int kht = slot("kht" + hs, dk, seq, krc);
    int scores = slot("scores" + hs, seq, seq, rc);
    int r_scores = slot("r_scores" + hs, seq, seq, rc);
    int probs = slot("probs" + hs, seq, seq, rc);
    int vh = slot("vh" + hs, seq, dk, rc);
    int ctx = slot("ctx" + hs, seq, dk, rc);
    int r_ctx = slot("r_ctx" + hs, seq, dk, rc);
    plan.matmuls.push_back({"scores" + hs, qh, kht, "", scores, r_scores});
    plan.matmuls.push_back({"ctx" + hs, probs, vh, "", ctx, r_ctx});
  }
  int o = slot("o", seq, d, rc);
  int attn_out = slot("attn_out", seq, d, rc);
  int r_o = slot("r_o", seq, d, rc);
  int x2 = slot("x2", seq, d, rc);
  int f1 = slot("f1", seq, dff, rc);
  int r_f1 = slot("r_f1", seq, dff, rc);
  int gg = slot("g", seq, dff, rc);
  int f2 = slot("f2", seq, d, rc);
  int r_f2 = slot("r_f2", seq, d, rc);
  plan.matmuls.push_back({"o", o, -1, "wo", attn_out, r_o});
  plan.matmuls.push_back({"ff1", x2, -1, "w1", f1, r_f1});
  plan.matmuls.push_back({"ff2", gg, -1, "w2", f2, r_f2});
  plan.lookups = {{"norm1", lut::LutFn::RSQRT},
                  {"softmax", lut::LutFn::EXP},
                  {"act", cfg.act_kind == nn::ActKind::GELU ? lut::LutFn::GELU : lut::LutFn::SILU},
                  {"norm2", lut::LutFn::RSQRT}};
  return plan;
}

size_t layer_ipa_count(const LayerPlan& plan) {
  // three single-vector arguments plus one two-vector argument per matmul
  return plan.matmuls.size() * 4;
}

// ---- weight manifest ----

static std::string weight_key(LayerKind kind, uint32_t layer_index, const std::string& suffix) {
  if (kind == LayerKind::HEAD) return suffix;
  return "layer" + std::to_string(layer_index - 1) + "." + suffix;
}

WeightManifest commit_weights(const GroupParams& g, const nn::QuantizedWeights& qw,
                              uint64_t seed, bool keep_blinds) {
  WeightManifest m;
  SeededRng master(seed, "weight-commitments");
  auto add = [&](const std::string& name, const fx::FixedTensor& t) {
    SeededRng rng = master.fork(name);
    CommittedRows rows = commit_rows(g, t, t.shape[0], rng, 0);
    if (!keep_blinds) rows.blinds.clear();
    rows.values = keep_blinds ? &t : nullptr;
    m.entries.emplace(name, std::move(rows));
  };
  for (size_t l = 0; l < qw.layers.size(); l++) {
    const auto& ql = qw.layers[l];
    std::string p = "layer" + std::to_string(l) + ".";
    add(p + "wq", ql.wq);
    add(p + "wk", ql.wk);
    add(p + "wv", ql.wv);
    add(p + "wo", ql.wo);
    add(p + "w1", ql.w1);
    add(p + "w2", ql.w2);
  }
  add("lm_head", qw.lm_head);
  return m;
}

Bytes WeightManifest::serialize(const GroupParams& g) const {
  Bytes out;
  put_str(out, "NZKW");
  put_u32le(out, static_cast<uint32_t>(entries.size()));
  size_t ew = g.element_width();
  for (const auto& [name, rows] : entries) {
    put_u32le(out, static_cast<uint32_t>(name.size()));
    put_str(out, name);
    put_u32le(out, rows.rows);
    put_u32le(out, rows.cols);
    for (const auto& c : rows.commits) put_bytes(out, bn_to_be(c, ew));
  }
  return out;
}

WeightManifest WeightManifest::deserialize(const GroupParams& g, const Bytes& b) {
  ByteReader r(b);
  r.expect_magic("NZKW", 4);
  uint32_t count = r.u32le();
  WeightManifest m;
  size_t ew = g.element_width();
  for (uint32_t i = 0; i < count; i++) {
    uint32_t nlen = r.u32le();
    Bytes nb = r.take(nlen);
    std::string name(nb.begin(), nb.end());
    CommittedRows rows;
    rows.rows = r.u32le();
    rows.cols = r.u32le();
    rows.commits.resize(rows.rows);
    for (auto& c : rows.commits) c = bn_from_be(r.take(ew));
    m.entries.emplace(name, std::move(rows));
  }
  if (!r.done()) throw std::invalid_argument("trailing bytes after weight manifest");
  return m;
}

Digest WeightManifest::digest(const GroupParams& g) const { return Sha256::of(serialize(g)); }

// ---- witness gathering ----

namespace {

std::vector<const fx::FixedTensor*> gather_tensors(const LayerPlan& plan,
                                                   const LayerWitness& w) {
  std::vector<const fx::FixedTensor*> out;
  if (plan.kind == LayerKind::EMBED) return out;
  if (plan.kind == LayerKind::HEAD) {
    out = {w.head_x, w.logits, w.head_r};
    return out;
  }
  const nn::BlockWitness& b = *w.block;
  out = {&b.x1, &b.q, &b.k, &b.v, &b.r_q, &b.r_k, &b.r_v};
  for (const auto& h : b.heads) {
    out.push_back(&h.qh);
    out.push_back(&h.kht);
    out.push_back(&h.scores);
    out.push_back(&h.r_scores);
    out.push_back(&h.probs);
    out.push_back(&h.vh);
    out.push_back(&h.ctx);
    out.push_back(&h.r_ctx);
  }
  out.push_back(&b.o);
  out.push_back(&b.attn_out);
  out.push_back(&b.r_o);
  out.push_back(&b.x2);
  out.push_back(&b.f1);
  out.push_back(&b.r_f1);
  out.push_back(&b.g);
  out.push_back(&b.f2);
  out.push_back(&b.r_f2);
  return out;
}

std::vector<const nn::LookupPairs*> gather_lookups(const LayerPlan& plan,
                                                   const LayerWitness& w) {
  if (plan.kind == LayerKind::EMBED) return {};
  if (plan.kind == LayerKind::HEAD) return {w.final_norm};
  const nn::BlockWitness& b = *w.block;
  return {&b.lk_norm1, &b.lk_softmax, &b.lk_act, &b.lk_norm2};
}

const lut::LookupTable& table_for(const nn::TableSet& tables, lut::LutFn fn) {
  switch (fn) {
    case lut::LutFn::EXP: return tables.exp;
    case lut::LutFn::GELU: return tables.gelu;
    case lut::LutFn::SILU: return tables.silu;
    case lut::LutFn::RSQRT: return tables.rsqrt;
  }
  throw std::invalid_argument("bad table fn");
}

Transcript layer_transcript(const CircuitSpec& spec, const LayerProof& p) {
  Transcript t("nanozk-layer-proof");
  t.absorb_u64("layer/index", p.layer_index);
  t.absorb_u64("layer/kind", static_cast<uint64_t>(p.kind));
  t.absorb_u64("layer/seq", p.seq);
  t.absorb("layer/c_in", p.c_in.digest);
  t.absorb("layer/c_out", p.c_out.digest);
  t.absorb("layer/circuit", spec.digest());
  return t;
}

void absorb_witness_commits(const GroupParams& g, Transcript& t, const LayerProof& p) {
  Sha256 h;
  size_t ew = g.element_width();
  for (const auto& slot : p.witness_commits)
    for (const auto& c : slot) {
      Bytes b = bn_to_be(c, ew);
      h.update(b);
    }
  t.absorb("layer/witness-commits", h.finish());
}

}  // namespace

LayerProof layer_prove(const GroupParams& g, const CircuitSpec& spec,
                       const nn::TableSet& tables, const WeightManifest& weights,
                       uint32_t layer_index, LayerKind kind, const chain::Commitment& c_in,
                       const chain::Commitment& c_out, const LayerWitness& witness,
                       const ProveOptions& opts) {
  uint32_t seq = 0;
  if (kind == LayerKind::BLOCK) seq = witness.block->x1.shape[0];
  if (kind == LayerKind::HEAD) seq = witness.head_x->shape[0];
  LayerPlan plan = build_layer_plan(spec, kind, seq);

  LayerProof proof;
  proof.layer_index = layer_index;
  proof.kind = kind;
  proof.seq = seq;
  proof.c_in = c_in;
  proof.c_out = c_out;

  auto tensors = gather_tensors(plan, witness);
  if (tensors.size() != plan.slots.size())
    throw std::logic_error("witness does not match the layer plan");

  SeededRng master(opts.seed, "layer-blinds/" + std::to_string(layer_index));
  std::vector<CommittedRows> committed(plan.slots.size());
  for (size_t i = 0; i < plan.slots.size(); i++) {
    SeededRng rng = master.fork("slot/" + plan.slots[i].name);
    committed[i] = commit_rows(g, *tensors[i], plan.slots[i].row_cap, rng, 0);
    proof.witness_commits.push_back(committed[i].commits);
  }

  Transcript t = layer_transcript(spec, proof);
  absorb_witness_commits(g, t, proof);

  SeededRng blind_rng = master.fork("claim-blinds");
  for (const auto& mc : plan.matmuls) {
    MatmulClaimInputs in;
    in.x = &committed[mc.x_slot];
    in.y = &committed[mc.y_slot];
    in.r = &committed[mc.r_slot];
    const CommittedRows* wrows;
    if (mc.w_slot >= 0) {
      wrows = &committed[mc.w_slot];
    } else {
      auto it = weights.entries.find(weight_key(kind, layer_index, mc.w_name));
      if (it == weights.entries.end() || it->second.blinds.empty() || !it->second.values)
        throw std::logic_error("weight manifest lacks prover data for " + mc.w_name);
      wrows = &it->second;
    }
    in.w = wrows;
    in.frac_bits = spec.cfg.frac_bits;
    proof.matmul_proofs.push_back(
        matmul_claim_prove(g, spec.vec_len(), in, t, blind_rng, opts.force));
  }
  auto lookups = gather_lookups(plan, witness);
  for (size_t i = 0; i < plan.lookups.size(); i++) {
    const auto& lp = plan.lookups[i];
    proof.lookup_proofs.push_back(lookup_claim_prove(g, table_for(tables, lp.fn),
                                                     static_cast<uint8_t>(lp.fn),
                                                     lookups[i]->pairs, spec.lut_cap, t,
                                                     opts.force));
  }
  return proof;
}

namespace {

LayerVerdict layer_verify_inner(const GroupParams& g, const CircuitSpec& spec,
                                const nn::TableSet& tables, const WeightManifest& weights,
                                const LayerProof& proof, bool batched) {
  LayerPlan plan = build_layer_plan(spec, proof.kind, proof.seq);
  if (proof.witness_commits.size() != plan.slots.size() ||
      proof.matmul_proofs.size() != plan.matmuls.size() ||
      proof.lookup_proofs.size() != plan.lookups.size())
    return {ClaimVerdict::MALFORMED, -1};
  if (proof.kind == LayerKind::BLOCK && proof.seq > spec.cfg.max_seq)
    return {ClaimVerdict::MALFORMED, -1};
  for (size_t i = 0; i < plan.slots.size(); i++) {
    if (proof.witness_commits[i].size() != plan.slots[i].row_cap)
      return {ClaimVerdict::MALFORMED, -1};
    for (const auto& c : proof.witness_commits[i])
      if (!g.in_group(c)) return {ClaimVerdict::MALFORMED, -1};
  }

  Transcript t = layer_transcript(spec, proof);
  absorb_witness_commits(g, t, proof);

  Bytes batch_seed = layer_proof_serialize(g, spec, proof);
  BatchAcc batch(g, batch_seed);
  BatchAcc* acc = batched ? &batch : nullptr;

  for (size_t i = 0; i < plan.matmuls.size(); i++) {
    const auto& mc = plan.matmuls[i];
    auto view = [&](int slot) {
      CommittedRowsView v;
      v.rows = plan.slots[slot].rows;
      v.cols = plan.slots[slot].cols;
      v.commits = &proof.witness_commits[slot];
      return v;
    };
    CommittedRowsView wv;
    if (mc.w_slot >= 0) {
      wv = view(mc.w_slot);
    } else {
      auto it = weights.entries.find(weight_key(proof.kind, proof.layer_index, mc.w_name));
      if (it == weights.entries.end()) return {ClaimVerdict::MALFORMED, static_cast<int>(i)};
      wv.rows = it->second.rows;
      wv.cols = it->second.cols;
      wv.commits = &it->second.commits;
    }
    ClaimVerdict cv = matmul_claim_verify(g, spec.vec_len(), view(mc.x_slot), wv,
                                          view(mc.y_slot), view(mc.r_slot),
                                          spec.cfg.frac_bits, proof.matmul_proofs[i], t, acc);
    if (cv != ClaimVerdict::ACCEPT) return {cv, static_cast<int>(i)};
  }
  for (size_t i = 0; i < plan.lookups.size(); i++) {
    ClaimVerdict cv = lookup_claim_verify(g, table_for(tables, plan.lookups[i].fn),
                                          proof.lookup_proofs[i], spec.lut_cap, t);
    if (cv != ClaimVerdict::ACCEPT) return {cv, static_cast<int>(i)};
  }
  if (batched && !batch.settle()) return {ClaimVerdict::IPA_FAIL, -2};  // -2: re-diagnose
  return {ClaimVerdict::ACCEPT, -1};
}

}  // namespace

LayerVerdict layer_verify(const GroupParams& g, const CircuitSpec& spec,
                          const nn::TableSet& tables, const WeightManifest& weights,
                          const LayerProof& proof) {
  LayerVerdict v = layer_verify_inner(g, spec, tables, weights, proof, true);
  if (v.verdict == ClaimVerdict::IPA_FAIL && v.claim_index == -2) {
    // batch failed somewhere: replay claim by claim to attribute the failure
    v = layer_verify_inner(g, spec, tables, weights, proof, false);
    if (v.ok()) v = {ClaimVerdict::TRANSCRIPT_MISMATCH, -1};  // batch/immediate disagree
  }
  return v;
}

std::string LayerVerdict::describe() const {
  switch (verdict) {
    case ClaimVerdict::ACCEPT: return "accept";
    case ClaimVerdict::IPA_FAIL: return "IPA_FAIL(" + std::to_string(claim_index) + ")";
    case ClaimVerdict::LOOKUP_FAIL: return "LOOKUP_FAIL(" + std::to_string(claim_index) + ")";
    case ClaimVerdict::TRANSCRIPT_MISMATCH: return "TRANSCRIPT_MISMATCH";
    case ClaimVerdict::MALFORMED: return "MALFORMED";
  }
  return "?";
}

// ---- serialization ----

Bytes layer_proof_serialize(const GroupParams& g, const CircuitSpec& /*spec*/,
                            const LayerProof& p) {
  Bytes out;
  put_str(out, "NZKP");
  put_u8(out, 1);
  put_u32le(out, p.layer_index);
  put_u8(out, static_cast<uint8_t>(p.kind));
  put_u32le(out, p.seq);
  put_bytes(out, p.c_in.digest.data(), 32);
  put_bytes(out, p.c_out.digest.data(), 32);
  size_t ew = g.element_width();
  for (const auto& slot : p.witness_commits)
    for (const auto& c : slot) put_bytes(out, bn_to_be(c, ew));
  for (const auto& mp : p.matmul_proofs) put_bytes(out, matmul_claim_serialize(g, mp));
  for (const auto& lp : p.lookup_proofs) put_bytes(out, lookup_claim_serialize(g, lp));
  return out;
}

LayerProof layer_proof_deserialize(const GroupParams& g, const CircuitSpec& spec,
                                   const Bytes& b) {
  ByteReader r(b);
  r.expect_magic("NZKP", 4);
  if (r.u8() != 1) throw std::invalid_argument("unsupported layer proof version");
  LayerProof p;
  p.layer_index = r.u32le();
  uint8_t kind = r.u8();
  if (kind > 2) throw std::invalid_argument("bad layer kind");
  p.kind = static_cast<LayerKind>(kind);
  p.seq = r.u32le();
  if (p.seq > spec.vec_len()) throw std::invalid_argument("sequence length out of range");
  Bytes cin = r.take(32), cout = r.take(32);
  std::copy(cin.begin(), cin.end(), p.c_in.digest.begin());
  std::copy(cout.begin(), cout.end(), p.c_out.digest.begin());
  LayerPlan plan = build_layer_plan(spec, p.kind, p.seq);
  size_t ew = g.element_width();
  for (const auto& slot : plan.slots) {
    std::vector<Bn> commits(slot.row_cap);
    for (auto& c : commits) c = bn_from_be(r.take(ew));
    p.witness_commits.push_back(std::move(commits));
  }
  for (size_t i = 0; i < plan.matmuls.size(); i++)
    p.matmul_proofs.push_back(matmul_claim_deserialize(g, r));
  for (size_t i = 0; i < plan.lookups.size(); i++)
    p.lookup_proofs.push_back(lookup_claim_deserialize(g, r, spec.lut_cap));
  if (!r.done()) throw std::invalid_argument("trailing bytes after layer proof");
  return p;
}

}  // namespace nanozk::zk
