#include "nanozk/sha256.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace nanozk {

Sha256::Sha256() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
  ctx_ = ctx;
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256::update(const uint8_t* p, size_t n) {
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), p, n) != 1)
    throw std::runtime_error("sha256 update failed");
}

Digest Sha256::finish() {
  Digest d{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), d.data(), &len) != 1 || len != 32)
    throw std::runtime_error("sha256 final failed");
  return d;
}

Digest Sha256::of(const Bytes& b) { return of(b.data(), b.size()); }

Digest Sha256::of(const uint8_t* p, size_t n) {
  Sha256 h;
  h.update(p, n);
  return h.finish();
}

std::string digest_hex(const Digest& d) { return to_hex(d.data(), d.size()); }

Digest digest_from_hex(const std::string& s) {
  Bytes b = from_hex(s);
  if (b.size() != 32) throw std::invalid_argument("digest hex must be 64 chars");
  Digest d{};
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

Bytes digest_bytes(const Digest& d) { return Bytes(d.begin(), d.end()); }

}  // namespace nanozk
