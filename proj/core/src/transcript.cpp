#include "nanozk/transcript.hpp"

namespace nanozk::zk {

Transcript::Transcript(const std::string& domain_label) {
  Sha256 h;
  h.update(std::string("nanozk-transcript-v1"));
  h.update(domain_label);
  state_ = h.finish();
}

void Transcript::absorb(const std::string& label, const Bytes& data) {
  Sha256 h;
  h.update(state_.data(), state_.size());
  Bytes framing;
  put_u64le(framing, label.size());
  h.update(framing);
  h.update(label);
  framing.clear();
  put_u64le(framing, data.size());
  h.update(framing);
  h.update(data);
  state_ = h.finish();
  log_.emplace_back(label, data.size());
}

void Transcript::absorb(const std::string& label, const Digest& d) {
  absorb(label, Bytes(d.begin(), d.end()));
}

void Transcript::absorb_u64(const std::string& label, uint64_t v) {
  Bytes b;
  put_u64le(b, v);
  absorb(label, b);
}

void Transcript::absorb_scalar(const std::string& label, const Bn& v) {
  size_t w = (bn_bit_length(v) + 7) / 8;
  absorb(label, bn_to_be(v, w == 0 ? 1 : w));
}

void Transcript::absorb_element(const std::string& label, const Bn& v, size_t width) {
  absorb(label, bn_to_be(v, width));
}

Digest Transcript::challenge_bytes(const std::string& label) {
  Sha256 h;
  h.update(state_.data(), state_.size());
  h.update(std::string("challenge"));
  h.update(label);
  Digest out = h.finish();
  // advance the state so successive challenges differ
  Sha256 adv;
  adv.update(state_.data(), state_.size());
  adv.update(std::string("advance"));
  adv.update(label);
  state_ = adv.finish();
  return out;
}

Bn Transcript::challenge(const std::string& label, const Bn& q) {
  // rejection sampling: accept 256-bit draws below the largest multiple of
  // q. For q >= 2^256 every draw already lies in [0, q), so challenges are
  // 256-bit scalars (which also keeps exponentiations fast).
  Bn two256 = Bn(1) << 256;
  Bn limit = q >= two256 ? two256 : (two256 / q) * q;
  for (uint32_t ctr = 0;; ctr++) {
    Sha256 h;
    h.update(state_.data(), state_.size());
    h.update(std::string("challenge"));
    h.update(label);
    Bytes c;
    put_u32le(c, ctr);
    h.update(c);
    Digest d = h.finish();
    Bn draw = bn_from_be(d.data(), d.size());
    if (draw < limit) {
      Sha256 adv;
      adv.update(state_.data(), state_.size());
      adv.update(std::string("advance"));
      adv.update(label);
      state_ = adv.finish();
      return draw % q;
    }
  }
}

Bn Transcript::challenge_nonzero(const std::string& label, const Bn& q) {
  for (uint32_t i = 0;; i++) {
    Bn c = challenge(label + (i == 0 ? "" : "/retry" + std::to_string(i)), q);
    if (sgn(c) != 0) return c;
  }
}

}  // namespace nanozk::zk
