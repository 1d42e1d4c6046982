#include "nanozk/rng.hpp"

#include <cmath>

namespace nanozk {

SeededRng::SeededRng(uint64_t seed, const std::string& label) {
  Bytes material;
  put_u64le(material, seed);
  Sha256 h;
  h.update(std::string("nanozk-rng-v1"));
  h.update(material);
  h.update(label);
  key_ = h.finish();
}

SeededRng::SeededRng(const Bytes& seed_material, const std::string& label) {
  Sha256 h;
  h.update(std::string("nanozk-rng-v1"));
  h.update(seed_material);
  h.update(label);
  key_ = h.finish();
}

void SeededRng::refill() {
  Sha256 h;
  h.update(key_.data(), key_.size());
  Bytes ctr;
  put_u64le(ctr, counter_++);
  h.update(ctr);
  block_ = h.finish();
  block_pos_ = 0;
}

uint8_t SeededRng::next_byte() {
  if (block_pos_ >= 32) refill();
  return block_[block_pos_++];
}

void SeededRng::fill(uint8_t* p, size_t n) {
  for (size_t i = 0; i < n; i++) p[i] = next_byte();
}

Bytes SeededRng::bytes(size_t n) {
  Bytes b(n);
  fill(b.data(), n);
  return b;
}

uint64_t SeededRng::next_u64() {
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(next_byte()) << (8 * i);
  return v;
}

uint64_t SeededRng::below(uint64_t bound) {
  if (bound == 0) return 0;
  uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_normal_ = true;
  return r * std::cos(theta);
}

SeededRng SeededRng::fork(const std::string& label) const {
  Bytes material(key_.begin(), key_.end());
  return SeededRng(material, label);
}

}  // namespace nanozk
