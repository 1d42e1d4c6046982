#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nanozk/sha256.hpp"
#include "nanozk/tensor.hpp"

namespace nanozk::chain {

// SHA-256 over the canonical tensor serialization.
struct Commitment {
  Digest digest{};
  bool operator==(const Commitment&) const = default;
  std::string hex() const { return digest_hex(digest); }
};

Commitment commit_activation(const fx::FixedTensor& h);
// The chain anchor h_{-1}: the user's token ids themselves, so the chain
// binds to the actual query rather than to the embedded vectors.
Bytes serialize_tokens(const std::vector<uint32_t>& tokens);
Commitment commit_tokens(const std::vector<uint32_t>& tokens);

struct ChainLink {
  uint32_t layer_index = 0;
  Commitment c_in;
  Commitment c_out;
  bool operator==(const ChainLink&) const = default;
};

// Builds the L+2 links (embed, blocks, head) from the committed stages:
// stages[0] = H(tokens), stages[1] = H(h_0), ..., stages[L+2] = H(logits).
std::vector<ChainLink> build_chain(const std::vector<Commitment>& stages);

enum class ChainVerdict : uint8_t { ACCEPT, CHAIN_BREAK, INPUT_MISMATCH, OUTPUT_MISMATCH };

struct ChainResult {
  ChainVerdict verdict = ChainVerdict::ACCEPT;
  int32_t break_index = -1;  // first offending link for CHAIN_BREAK
  bool ok() const { return verdict == ChainVerdict::ACCEPT; }
  std::string describe() const;
};

// Order-sensitive sequential check: adjacency of every pair, first c_in
// against the input digest, last c_out against the claimed output digest.
ChainResult verify_chain(const std::vector<ChainLink>& links, const Commitment& input_digest,
                         const Commitment& output_digest);

}  // namespace nanozk::chain
