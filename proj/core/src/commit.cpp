#include "nanozk/commit.hpp"

#include <stdexcept>

namespace nanozk::chain {

Commitment commit_activation(const fx::FixedTensor& h) {
  return Commitment{Sha256::of(h.serialize())};
}

Bytes serialize_tokens(const std::vector<uint32_t>& tokens) {
  Bytes out;
  put_str(out, "NZKQ");
  put_u32le(out, static_cast<uint32_t>(tokens.size()));
  for (uint32_t t : tokens) put_u32le(out, t);
  return out;
}

Commitment commit_tokens(const std::vector<uint32_t>& tokens) {
  return Commitment{Sha256::of(serialize_tokens(tokens))};
}

std::vector<ChainLink> build_chain(const std::vector<Commitment>& stages) {
  if (stages.size() < 3)
    throw std::invalid_argument("chain needs at least input, one hidden state and output");
  std::vector<ChainLink> links;
  links.reserve(stages.size() - 1);
  for (size_t i = 0; i + 1 < stages.size(); i++)
    links.push_back(ChainLink{static_cast<uint32_t>(i), stages[i], stages[i + 1]});
  return links;
}

ChainResult verify_chain(const std::vector<ChainLink>& links, const Commitment& input_digest,
                         const Commitment& output_digest) {
  if (links.empty()) return {ChainVerdict::INPUT_MISMATCH, -1};
  if (!(links.front().c_in == input_digest)) return {ChainVerdict::INPUT_MISMATCH, -1};
  for (size_t i = 0; i + 1 < links.size(); i++) {
    if (!(links[i].c_out == links[i + 1].c_in))
      return {ChainVerdict::CHAIN_BREAK, static_cast<int32_t>(i)};
  }
  if (!(links.back().c_out == output_digest)) return {ChainVerdict::OUTPUT_MISMATCH, -1};
  return {ChainVerdict::ACCEPT, -1};
}

std::string ChainResult::describe() const {
  switch (verdict) {
    case ChainVerdict::ACCEPT: return "accept";
    case ChainVerdict::CHAIN_BREAK: return "CHAIN_BREAK(" + std::to_string(break_index) + ")";
    case ChainVerdict::INPUT_MISMATCH: return "INPUT_MISMATCH";
    case ChainVerdict::OUTPUT_MISMATCH: return "OUTPUT_MISMATCH";
  }
  return "?";
}

}  // namespace nanozk::chain
