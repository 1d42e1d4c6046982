#include "nanozk/composite.hpp"

#include <chrono>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nanozk/workpool.hpp"

namespace nanozk::zk {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const char* kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const Bytes& data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (size_t i = 0; i < data.size(); i += 3) {
    uint32_t v = data[i] << 16;
    if (i + 1 < data.size()) v |= data[i + 1] << 8;
    if (i + 2 < data.size()) v |= data[i + 2];
    out.push_back(kB64[(v >> 18) & 63]);
    out.push_back(kB64[(v >> 12) & 63]);
    out.push_back(i + 1 < data.size() ? kB64[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < data.size() ? kB64[v & 63] : '=');
  }
  return out;
}

Bytes b64_decode(const std::string& s) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    if (c == '=') return -1;
    throw std::invalid_argument("bad base64 character");
  };
  if (s.size() % 4 != 0) throw std::invalid_argument("bad base64 length");
  Bytes out;
  out.reserve(s.size() / 4 * 3);
  for (size_t i = 0; i < s.size(); i += 4) {
    int a = val(s[i]), b = val(s[i + 1]), c = val(s[i + 2]), d = val(s[i + 3]);
    if (a < 0 || b < 0) throw std::invalid_argument("bad base64 padding");
    uint32_t v = (a << 18) | (b << 12) | (c < 0 ? 0 : c << 6) | (d < 0 ? 0 : d);
    out.push_back((v >> 16) & 0xff);
    if (c >= 0) out.push_back((v >> 8) & 0xff);
    if (d >= 0) out.push_back(v & 0xff);
  }
  return out;
}

LayerKind kind_for_index(uint32_t idx, uint32_t num_blocks) {
  if (idx == 0) return LayerKind::EMBED;
  if (idx <= num_blocks) return LayerKind::BLOCK;
  return LayerKind::HEAD;
}

}  // namespace

CompositeProof prove_composite(const GroupParams& g, const CircuitSpec& spec,
                               const nn::TableSet& tables, const WeightManifest& weights,
                               const nn::LutTrace& trace, uint32_t lambda, size_t workers,
                               const ProveOptions& opts, ProveReport* report) {
  spec.validate();
  uint32_t L = spec.cfg.num_layers;
  if (trace.h.size() != L + 1 || trace.blocks.size() != L)
    throw std::invalid_argument("trace incomplete for this configuration");

  CompositeProof proof;
  proof.spec = spec;
  proof.group_bits = g.bits;
  proof.lambda = lambda;
  proof.seq = static_cast<uint32_t>(trace.tokens.size());
  proof.input_digest = chain::commit_tokens(trace.tokens);
  proof.output_digest = chain::commit_activation(trace.logits);

  std::vector<chain::Commitment> stages;
  stages.push_back(proof.input_digest);
  for (const auto& h : trace.h) stages.push_back(chain::commit_activation(h));
  stages.push_back(proof.output_digest);
  proof.links = chain::build_chain(stages);

  proof.weight_manifest = weights.serialize(g);
  proof.budget = chain::soundness_budget(L, lambda);

  auto t0 = Clock::now();
  size_t n_layers = L + 2;
  proof.layer_blobs.assign(n_layers, {});
  std::vector<LayerTiming> timings(n_layers);
  run_pool(n_layers, workers, [&](size_t idx) {
    auto lt0 = Clock::now();
    LayerKind kind = kind_for_index(static_cast<uint32_t>(idx), L);
    LayerWitness w;
    if (kind == LayerKind::BLOCK) {
      w.block = &trace.blocks[idx - 1];
      w.h_in = &trace.h[idx - 1];
    } else if (kind == LayerKind::HEAD) {
      w.head_x = &trace.head_x;
      w.head_r = &trace.head_r;
      w.logits = &trace.logits;
      w.final_norm = &trace.lk_final_norm;
    }
    LayerProof lp = layer_prove(g, spec, tables, weights, static_cast<uint32_t>(idx), kind,
                                proof.links[idx].c_in, proof.links[idx].c_out, w, opts);
    proof.layer_blobs[idx] = layer_proof_serialize(g, spec, lp);
    timings[idx].prove_ms = ms_since(lt0);
    timings[idx].proof_bytes = proof.layer_blobs[idx].size();
  });
  if (report) {
    report->layers = timings;
    report->wall_ms = ms_since(t0);
    report->workers = workers;
  }
  return proof;
}

CompositeVerdict verify_composite(const GroupParams& g, const nn::TableSet& tables,
                                  const CompositeProof& proof,
                                  const std::optional<std::set<uint32_t>>& subset) {
  auto t0 = Clock::now();
  CompositeVerdict v;
  uint32_t L = proof.num_blocks();

  auto fail = [&](CompositeStatus st, const std::string& why, int layer = -1) {
    v.status = st;
    v.reason = why;
    v.layer = layer;
    v.verify_ms = ms_since(t0);
    return v;
  };

  if (proof.links.size() != L + 2 || proof.layer_blobs.size() != L + 2)
    return fail(CompositeStatus::STRUCTURE_REJECT, "wrong link or proof count");

  // budget must match the theorem accounting exactly
  chain::SoundnessBudget expect = chain::soundness_budget(L, proof.lambda);
  if (!(expect.eps_total == proof.budget.eps_total))
    return fail(CompositeStatus::STRUCTURE_REJECT, "soundness budget mismatch");

  chain::ChainResult cr = chain::verify_chain(proof.links, proof.input_digest,
                                              proof.output_digest);
  if (!cr.ok()) return fail(CompositeStatus::CHAIN_REJECT, cr.describe(), cr.break_index);

  WeightManifest weights;
  try {
    weights = WeightManifest::deserialize(g, proof.weight_manifest);
  } catch (const std::exception& e) {
    return fail(CompositeStatus::STRUCTURE_REJECT, std::string("weight manifest: ") + e.what());
  }

  // table digests bound into the circuit must match the local tables
  std::vector<Digest> local = tables.digests();
  if (proof.spec.table_digests != local)
    return fail(CompositeStatus::STRUCTURE_REJECT, "table digest mismatch");
  if (!(proof.spec.group_digest == g.digest()))
    return fail(CompositeStatus::STRUCTURE_REJECT, "group digest mismatch");

  for (uint32_t idx = 0; idx < L + 2; idx++) {
    bool selected = !subset || subset->count(idx) > 0;
    LayerProof lp;
    try {
      lp = layer_proof_deserialize(g, proof.spec, proof.layer_blobs[idx]);
    } catch (const std::exception& e) {
      return fail(CompositeStatus::STRUCTURE_REJECT,
                  std::string("layer parse: ") + e.what(), static_cast<int>(idx));
    }
    if (lp.layer_index != idx || lp.kind != kind_for_index(idx, L))
      return fail(CompositeStatus::LAYER_REJECT, "layer identity mismatch",
                  static_cast<int>(idx));
    if (!(lp.c_in == proof.links[idx].c_in) || !(lp.c_out == proof.links[idx].c_out))
      return fail(CompositeStatus::LAYER_REJECT, "layer/chain commitment mismatch",
                  static_cast<int>(idx));
    if (lp.seq != proof.seq)
      return fail(CompositeStatus::LAYER_REJECT, "layer sequence length mismatch",
                  static_cast<int>(idx));
    if (!selected) continue;
    LayerVerdict lv = layer_verify(g, proof.spec, tables, weights, lp);
    if (!lv.ok())
      return fail(CompositeStatus::LAYER_REJECT, lv.describe(), static_cast<int>(idx));
  }

  if (subset) {
    chain::Dyadic residual = chain::Dyadic::zero();
    for (uint32_t idx = 0; idx < L + 2; idx++)
      if (subset->count(idx) == 0)
        residual = residual + chain::Dyadic::pow2(static_cast<int32_t>(proof.lambda));
    v.residual_unverified = residual;
  }
  v.verify_ms = ms_since(t0);
  return v;
}

std::string CompositeProof::to_json() const {
  json j;
  j["format"] = "nanozk-proof";
  j["version"] = 1;
  j["group_bits"] = group_bits;
  j["lambda"] = lambda;
  j["seq"] = seq;
  j["k"] = spec.k;
  j["row_cap"] = spec.row_cap;
  j["kht_row_cap"] = spec.kht_row_cap;
  j["lut_cap"] = spec.lut_cap;
  j["config"] = json::parse(spec.cfg.to_json());
  j["model_digest"] = digest_hex(spec.model_digest);
  j["group_digest"] = digest_hex(spec.group_digest);
  json tds = json::array();
  for (const auto& d : spec.table_digests) tds.push_back(digest_hex(d));
  j["table_digests"] = tds;
  j["input_digest"] = input_digest.hex();
  j["output_digest"] = output_digest.hex();
  json jl = json::array();
  for (const auto& link : links) {
    json e;
    e["c_in"] = link.c_in.hex();
    e["c_out"] = link.c_out.hex();
    jl.push_back(e);
  }
  j["links"] = jl;
  chain::Dyadic tot = budget.eps_total.normalized();
  j["budget"] = {{"lambda", budget.lambda},
                 {"mantissa", bn_to_dec(tot.num)},
                 {"exp2", tot.log2_den},
                 {"approx", tot.scientific()}};
  j["weight_manifest_b64"] = b64_encode(weight_manifest);
  json layers = json::array();
  for (const auto& b : layer_blobs) layers.push_back(b64_encode(b));
  j["layers_b64"] = layers;
  if (verified_set) {
    json vs = json::array();
    for (uint32_t i : *verified_set) vs.push_back(i);
    j["verified_set"] = vs;
  }
  return j.dump(2);
}

CompositeProof CompositeProof::from_json(const std::string& s) {
  json j = json::parse(s);
  if (j.value("format", "") != std::string("nanozk-proof") || j.value("version", 0) != 1)
    throw std::invalid_argument("not a composite proof file");
  CompositeProof p;
  p.group_bits = j.at("group_bits").get<uint32_t>();
  p.lambda = j.at("lambda").get<uint32_t>();
  p.seq = j.at("seq").get<uint32_t>();
  p.spec.k = j.at("k").get<uint32_t>();
  p.spec.row_cap = j.at("row_cap").get<uint32_t>();
  p.spec.kht_row_cap = j.at("kht_row_cap").get<uint32_t>();
  p.spec.lut_cap = j.at("lut_cap").get<uint32_t>();
  p.spec.cfg = nn::ModelConfig::from_json(j.at("config").dump());
  p.spec.model_digest = digest_from_hex(j.at("model_digest").get<std::string>());
  p.spec.group_digest = digest_from_hex(j.at("group_digest").get<std::string>());
  for (const auto& d : j.at("table_digests"))
    p.spec.table_digests.push_back(digest_from_hex(d.get<std::string>()));
  p.input_digest.digest = digest_from_hex(j.at("input_digest").get<std::string>());
  p.output_digest.digest = digest_from_hex(j.at("output_digest").get<std::string>());
  uint32_t idx = 0;
  for (const auto& e : j.at("links")) {
    chain::ChainLink link;
    link.layer_index = idx++;
    link.c_in.digest = digest_from_hex(e.at("c_in").get<std::string>());
    link.c_out.digest = digest_from_hex(e.at("c_out").get<std::string>());
    p.links.push_back(link);
  }
  p.budget = chain::soundness_budget(p.spec.cfg.num_layers, p.lambda);
  chain::Dyadic claimed{bn_from_dec(j.at("budget").at("mantissa").get<std::string>()),
                        j.at("budget").at("exp2").get<uint32_t>()};
  if (!(claimed == p.budget.eps_total))
    throw std::invalid_argument("budget in file disagrees with the theorem accounting");
  p.weight_manifest = b64_decode(j.at("weight_manifest_b64").get<std::string>());
  for (const auto& b : j.at("layers_b64")) p.layer_blobs.push_back(b64_decode(b.get<std::string>()));
  if (j.contains("verified_set")) {
    std::set<uint32_t> vs;
    for (const auto& e : j.at("verified_set")) vs.insert(e.get<uint32_t>());
    p.verified_set = vs;
  }
  return p;
}

}  // namespace nanozk::zk
