#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nanozk/claims.hpp"
#include "nanozk/commit.hpp"
#include "nanozk/model.hpp"

namespace nanozk::zk {

enum class LayerKind : uint8_t { EMBED = 0, BLOCK = 1, HEAD = 2 };

// Everything both sides must agree on before any proof exists. Proof byte
// size is a pure function of (k, caps, claim structure) and never of the
// live dimensions.
struct CircuitSpec {
  uint32_t k = 8;             // claim vectors padded to 2^k
  uint32_t row_cap = 16;      // activation matrices: committed row count
  uint32_t kht_row_cap = 32;  // K_h^T row count cap (>= head_dim)
  uint32_t lut_cap = 2048;    // lookup pairs per claim
  nn::ModelConfig cfg;
  Digest model_digest{};
  std::vector<Digest> table_digests;
  Digest group_digest{};

  uint32_t vec_len() const { return 1u << k; }
  // smallest k that fits the model's claim vectors
  static uint32_t minimal_k(const nn::ModelConfig& cfg);
  void validate() const;
  Digest digest() const;
};

// Per-matrix slot in a layer's witness table.
struct WitnessSlot {
  std::string name;
  uint32_t rows, cols;  // live dims
  uint32_t row_cap;
};

struct MatmulClaimPlan {
  std::string role;
  int x_slot;             // witness slot index
  int w_slot = -1;        // witness slot index, or -1 when weight-backed
  std::string w_name;     // weight manifest key when w_slot == -1
  int y_slot, r_slot;
};

struct LookupClaimPlan {
  std::string site;
  lut::LutFn fn;
};

struct LayerPlan {
  LayerKind kind;
  std::vector<WitnessSlot> slots;
  std::vector<MatmulClaimPlan> matmuls;
  std::vector<LookupClaimPlan> lookups;
};

LayerPlan build_layer_plan(const CircuitSpec& spec, LayerKind kind, uint32_t seq);

// Total IPA sub-proof count for one layer (each contributes two group
// elements per k increment; the size-growth law checks against this).
size_t layer_ipa_count(const LayerPlan& plan);

// Weight row-commitments, published alongside proofs. Blinds stay on the
// prover side (re-derived from the run seed).
struct WeightManifest {
  std::map<std::string, CommittedRows> entries;
  Bytes serialize(const GroupParams& g) const;
  static WeightManifest deserialize(const GroupParams& g, const Bytes& b);
  Digest digest(const GroupParams& g) const;
};

WeightManifest commit_weights(const GroupParams& g, const nn::QuantizedWeights& qw,
                              uint64_t seed, bool keep_blinds);

struct LayerProof {
  uint32_t layer_index = 0;
  LayerKind kind = LayerKind::BLOCK;
  uint32_t seq = 0;
  chain::Commitment c_in, c_out;
  std::vector<std::vector<Bn>> witness_commits;  // per slot, cap entries
  std::vector<MatmulClaimProof> matmul_proofs;
  std::vector<LookupClaimProof> lookup_proofs;
};

Bytes layer_proof_serialize(const GroupParams& g, const CircuitSpec& spec, const LayerProof& p);
LayerProof layer_proof_deserialize(const GroupParams& g, const CircuitSpec& spec,
                                   const Bytes& b);
inline size_t proof_size_bytes(const GroupParams& g, const CircuitSpec& spec,
                               const LayerProof& p) {
  return layer_proof_serialize(g, spec, p).size();
}

struct LayerVerdict {
  ClaimVerdict verdict = ClaimVerdict::ACCEPT;
  int claim_index = -1;  // offending matmul/lookup claim, when applicable
  bool ok() const { return verdict == ClaimVerdict::ACCEPT; }
  std::string describe() const;
};

struct ProveOptions {
  uint64_t seed = 1;   // blinding derivation
  bool force = false;  // skip prover witness assertions (dishonest-prover tests)
};

// Witness bundle for one layer, borrowed from the trace.
struct LayerWitness {
  const nn::BlockWitness* block = nullptr;  // BLOCK
  const fx::FixedTensor* h_in = nullptr;
  const fx::FixedTensor* head_x = nullptr;  // HEAD
  const fx::FixedTensor* head_r = nullptr;
  const fx::FixedTensor* logits = nullptr;
  const nn::LookupPairs* final_norm = nullptr;
};

LayerProof layer_prove(const GroupParams& g, const CircuitSpec& spec,
                       const nn::TableSet& tables, const WeightManifest& weights,
                       uint32_t layer_index, LayerKind kind, const chain::Commitment& c_in,
                       const chain::Commitment& c_out, const LayerWitness& witness,
                       const ProveOptions& opts);

LayerVerdict layer_verify(const GroupParams& g, const CircuitSpec& spec,
                          const nn::TableSet& tables, const WeightManifest& weights,
                          const LayerProof& proof);

}  // namespace nanozk::zk
