#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nanozk/bignum.hpp"
#include "nanozk/bytes.hpp"
#include "nanozk/sha256.hpp"

namespace nanozk::zk {

// Fiat-Shamir transcript over a running SHA-256 chaining value. Challenges
// are a deterministic function of the domain label and every absorbed byte;
// extraction uses rejection sampling on 256-bit draws so reduction into
// [0, q) is unbiased for any q.
class Transcript {
 public:
  explicit Transcript(const std::string& domain_label);

  void absorb(const std::string& label, const Bytes& data);
  void absorb(const std::string& label, const Digest& d);
  void absorb_u64(const std::string& label, uint64_t v);
  void absorb_scalar(const std::string& label, const Bn& v);
  void absorb_element(const std::string& label, const Bn& v, size_t width);

  // Scalar in [0, q).
  Bn challenge(const std::string& label, const Bn& q);
  // Scalar in [1, q) (folding challenges must be invertible).
  Bn challenge_nonzero(const std::string& label, const Bn& q);
  // Raw 32-byte squeeze (used for golden-vector tests and batch weights).
  Digest challenge_bytes(const std::string& label);

  const std::vector<std::pair<std::string, size_t>>& absorb_log() const { return log_; }
  Digest state() const { return state_; }

 private:
  Digest state_{};
  std::vector<std::pair<std::string, size_t>> log_;  // (label, byte count), introspection only
};

}  // namespace nanozk::zk
