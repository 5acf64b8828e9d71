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

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "dmp/common/crypto.h"
#include "dmp/records/records.h"

namespace dmp::privacy {

// Per-deployment secret. Lives next to the school-local table only.
class PseudonymKey {
 public:
  static constexpr std::size_t kSize = 32;

  // Throws Error(kInvalidArgument) unless exactly 32 bytes are given.
  static PseudonymKey from_bytes(std::span<const std::uint8_t> bytes);
  static PseudonymKey from_hex(std::string_view hex);
  static PseudonymKey generate();

  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::string hex() const { return crypto::to_hex(bytes_); }

  bool operator==(const PseudonymKey&) const = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

// HMAC-SHA256 keyed by `key` over the length-prefixed pair (school, raw_id),
// hex-encoded. Deterministic; the raw id never appears in the output.
records::PseudonymToken pseudonymize(const records::StudentId& id, const PseudonymKey& key);

// Maps tokens back to school-issued identities. Kept encrypted at rest in the
// school-local store; never part of the central store.
class ReidentificationTable {
 public:
  // Throws Error(kCollisionDetected) when `token` is already bound to a
  // different student.
  void insert(const records::PseudonymToken& token, const records::StudentId& id);

  std::optional<records::StudentId> lookup(const records::PseudonymToken& token) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<records::PseudonymToken, records::StudentId>& entries() const { return entries_; }

  bool operator==(const ReidentificationTable&) const = default;

 private:
  std::map<records::PseudonymToken, records::StudentId> entries_;
};

// Binary container: "DMPL" | version u8 | 12-byte nonce | AES-256-GCM
// ciphertext with trailing tag. The header is bound as associated data.
// A fresh random nonce is drawn unless one is supplied.
crypto::Bytes encrypt_table(const ReidentificationTable& table, const PseudonymKey& key,
                            std::optional<std::array<std::uint8_t, 12>> nonce = std::nullopt);

// Throws Error(kAuthenticationFailed) on a wrong key or tampered bytes and
// Error(kCorruptSnapshot) on a malformed container.
ReidentificationTable decrypt_table(std::span<const std::uint8_t> sealed, const PseudonymKey& key);

}  // namespace dmp::privacy
