#pragma once

#include <array>
#include <string>

#include "nanozk/bytes.hpp"

namespace nanozk {

using Digest = std::array<uint8_t, 32>;

// Incremental SHA-256 (OpenSSL EVP under the hood).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const uint8_t* p, size_t n);
  void update(const Bytes& b) { update(b.data(), b.size()); }
  void update(const std::string& s) {
    update(reinterpret_cast<const uint8_t*>(s.data()), s.size());
  }
  Digest finish();

  static Digest of(const Bytes& b);
  static Digest of(const uint8_t* p, size_t n);

 private:
  void* ctx_;
};

std::string digest_hex(const Digest& d);
Digest digest_from_hex(const std::string& s);
Bytes digest_bytes(const Digest& d);

}  // namespace nanozk
