// Copyright 2026 The DMP Platform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dmp/common/crypto.h"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <memory>

#include "dmp/common/error.h"

namespace dmp::crypto {

namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error(ErrorCode::kIo, "EVP_CIPHER_CTX_new failed");
  return ctx;
}

void require_key(std::span<const std::uint8_t> key) {
  if (key.size() != 32) throw Error(ErrorCode::kInvalidArgument, "AES-256 needs a 32-byte key");
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out;
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Digest sha256(std::string_view data) { return sha256(as_bytes(data)); }

Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message) {
  Digest out;
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(), message.size(),
           out.data(), &len) == nullptr ||
      len != out.size()) {
    throw Error(ErrorCode::kIo, "HMAC-SHA256 failed");
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::kInvalidArgument, "non-hex character");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

Bytes random_bytes(std::size_t count) {
  Bytes out(count);
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(ErrorCode::kIo, "RAND_bytes failed");
  }
  return out;
}

Bytes aead_seal(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                std::span<const std::uint8_t> aad, std::span<const std::uint8_t> plaintext) {
  require_key(key);
  if (nonce.size() != kGcmNonceSize) throw Error(ErrorCode::kInvalidArgument, "GCM nonce must be 12 bytes");
  auto ctx = new_ctx();
  int len = 0;
  Bytes out(plaintext.size() + kGcmTagSize);
  bool ok = EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) == 1 &&
            EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1 &&
            EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                              static_cast<int>(plaintext.size())) == 1;
  int total = len;
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), out.data() + total, &len) == 1;
  total += len;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagSize, out.data() + total) == 1;
  if (!ok) throw Error(ErrorCode::kIo, "AES-256-GCM encryption failed");
  return out;
}

Bytes aead_open(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                std::span<const std::uint8_t> aad, std::span<const std::uint8_t> sealed) {
  require_key(key);
  if (nonce.size() != kGcmNonceSize) throw Error(ErrorCode::kInvalidArgument, "GCM nonce must be 12 bytes");
  if (sealed.size() < kGcmTagSize) throw Error(ErrorCode::kAuthenticationFailed, "ciphertext too short");
  std::size_t body = sealed.size() - kGcmTagSize;
  auto ctx = new_ctx();
  int len = 0;
  Bytes out(body);
  Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(body), sealed.end());
  bool ok = EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) == 1 &&
            EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1 &&
            EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), static_cast<int>(body)) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag.data()) == 1;
  int total = len;
  ok = ok && EVP_DecryptFinal_ex(ctx.get(), out.data() + total, &len) == 1;
  if (!ok) throw Error(ErrorCode::kAuthenticationFailed, "AES-256-GCM tag mismatch");
  return out;
}

Bytes keystream(std::span<const std::uint8_t> key, std::size_t count) {
  require_key(key);
  std::array<std::uint8_t, 16> iv{};
  auto ctx = new_ctx();
  Bytes zeros(count, 0);
  Bytes out(count);
  int len = 0;
  bool ok = EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ctr(), nullptr, key.data(), iv.data()) == 1 &&
            EVP_EncryptUpdate(ctx.get(), out.data(), &len, zeros.data(), static_cast<int>(count)) == 1;
  if (!ok) throw Error(ErrorCode::kIo, "AES-256-CTR keystream failed");
  return out;
}

}  // namespace dmp::crypto
