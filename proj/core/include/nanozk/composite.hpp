#pragma once

#include <optional>
#include <set>

#include "nanozk/layer.hpp"
#include "nanozk/soundness.hpp"

namespace nanozk::zk {

struct CompositeProof {
  CircuitSpec spec;
  uint32_t group_bits = 2048;
  uint32_t lambda = 128;
  uint32_t seq = 0;
  chain::Commitment input_digest;   // H(serialized token ids)
  chain::Commitment output_digest;  // H(logits tensor)
  std::vector<chain::ChainLink> links;      // L+2
  std::vector<Bytes> layer_blobs;           // serialized LayerProof per link
  Bytes weight_manifest;                    // serialized WeightManifest
  chain::SoundnessBudget budget;
  std::optional<std::set<uint32_t>> verified_set;

  uint32_t num_blocks() const { return spec.cfg.num_layers; }
  std::string to_json() const;
  static CompositeProof from_json(const std::string& s);
};

struct LayerTiming {
  double prove_ms = 0.0;
  size_t proof_bytes = 0;
};

struct ProveReport {
  std::vector<LayerTiming> layers;
  double forward_ms = 0.0;
  double wall_ms = 0.0;   // chain + proving wall clock (excludes forward)
  size_t workers = 1;
};

// Proves every layer of a quantized forward trace across a worker pool and
// assembles the composite: links, layer proofs, Theorem-style budget.
CompositeProof prove_composite(const GroupParams& g, const CircuitSpec& spec,
                               const nn::TableSet& tables, const WeightManifest& weights,
                               const nn::LutTrace& trace, uint32_t lambda, size_t workers,
                               const ProveOptions& opts, ProveReport* report = nullptr);

enum class CompositeStatus : uint8_t {
  ACCEPT = 0,
  CHAIN_REJECT = 1,
  LAYER_REJECT = 2,
  STRUCTURE_REJECT = 3,
};

struct CompositeVerdict {
  CompositeStatus status = CompositeStatus::ACCEPT;
  std::string reason = "accept";
  int layer = -1;
  double verify_ms = 0.0;
  // selective mode: budget terms covered by the verified subset
  std::optional<chain::Dyadic> residual_unverified;
  bool ok() const { return status == CompositeStatus::ACCEPT; }
};

// Full or selective verification: the commitment chain is always checked in
// full (it is cheap); layer sub-proofs are checked for the selected subset.
CompositeVerdict verify_composite(const GroupParams& g, const nn::TableSet& tables,
                                  const CompositeProof& proof,
                                  const std::optional<std::set<uint32_t>>& subset = {});

}  // namespace nanozk::zk
