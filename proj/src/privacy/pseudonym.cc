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

#include "dmp/privacy/pseudonym.h"

#include <algorithm>

#include "dmp/common/error.h"
#include "json.hpp"

namespace dmp::privacy {

namespace {

constexpr std::array<std::uint8_t, 4> kTableMagic{'D', 'M', 'P', 'L'};
constexpr std::uint8_t kTableVersion = 1;
constexpr std::size_t kHeaderSize = kTableMagic.size() + 1 + crypto::kGcmNonceSize;

void put_u32(crypto::Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_string(crypto::Bytes& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
}

// Separate subkey so the pseudonym key is never used directly as a cipher key.
crypto::Digest table_key(const PseudonymKey& key) {
  return crypto::hmac_sha256(key.bytes(), crypto::as_bytes("dmp local reidentification table v1"));
}

}  // namespace

PseudonymKey PseudonymKey::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kSize) {
    throw Error(ErrorCode::kInvalidArgument, "pseudonym key must be exactly 32 bytes");
  }
  PseudonymKey key;
  std::copy(bytes.begin(), bytes.end(), key.bytes_.begin());
  return key;
}

PseudonymKey PseudonymKey::from_hex(std::string_view hex) {
  auto bytes = crypto::from_hex(hex);
  return from_bytes(bytes);
}

PseudonymKey PseudonymKey::generate() { return from_bytes(crypto::random_bytes(kSize)); }

records::PseudonymToken pseudonymize(const records::StudentId& id, const PseudonymKey& key) {
  crypto::Bytes message;
  put_u32(message, static_cast<std::uint32_t>(id.school.size()));
  put_string(message, id.school);
  put_u32(message, static_cast<std::uint32_t>(id.raw_id.size()));
  put_string(message, id.raw_id);
  auto mac = crypto::hmac_sha256(key.bytes(), message);
  return *records::PseudonymToken::from_hex(crypto::to_hex(mac));
}

void ReidentificationTable::insert(const records::PseudonymToken& token,
                                   const records::StudentId& id) {
  auto [it, inserted] = entries_.emplace(token, id);
  if (!inserted && it->second != id) {
    throw Error(ErrorCode::kCollisionDetected,
                "two distinct students map to token " + token.str().substr(0, 12) + "...");
  }
}

std::optional<records::StudentId> ReidentificationTable::lookup(
    const records::PseudonymToken& token) const {
  auto it = entries_.find(token);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

crypto::Bytes encrypt_table(const ReidentificationTable& table, const PseudonymKey& key,
                            std::optional<std::array<std::uint8_t, 12>> nonce) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [token, id] : table.entries()) {
    entries.push_back({{"token", token.str()}, {"school", id.school}, {"raw_id", id.raw_id}});
  }
  std::string plaintext = nlohmann::json{{"entries", std::move(entries)}}.dump();

  crypto::Bytes header(kTableMagic.begin(), kTableMagic.end());
  header.push_back(kTableVersion);
  if (nonce) {
    header.insert(header.end(), nonce->begin(), nonce->end());
  } else {
    auto fresh = crypto::random_bytes(crypto::kGcmNonceSize);
    header.insert(header.end(), fresh.begin(), fresh.end());
  }
  auto nonce_view = std::span<const std::uint8_t>(header).subspan(5, crypto::kGcmNonceSize);
  auto subkey = table_key(key);
  auto sealed = crypto::aead_seal(subkey, nonce_view, header, crypto::as_bytes(plaintext));

  crypto::Bytes out = header;
  out.insert(out.end(), sealed.begin(), sealed.end());
  return out;
}

ReidentificationTable decrypt_table(std::span<const std::uint8_t> sealed, const PseudonymKey& key) {
  if (sealed.size() < kHeaderSize + crypto::kGcmTagSize ||
      !std::equal(kTableMagic.begin(), kTableMagic.end(), sealed.begin())) {
    throw Error(ErrorCode::kCorruptSnapshot, "not a local table container");
  }
  if (sealed[4] != kTableVersion) {
    throw Error(ErrorCode::kCorruptSnapshot, "unsupported local table version");
  }
  auto header = sealed.first(kHeaderSize);
  auto nonce = sealed.subspan(5, crypto::kGcmNonceSize);
  auto subkey = table_key(key);
  auto plaintext = crypto::aead_open(subkey, nonce, header, sealed.subspan(kHeaderSize));

  ReidentificationTable table;
  try {
    auto doc = nlohmann::json::parse(plaintext.begin(), plaintext.end());
    for (const auto& entry : doc.at("entries")) {
      auto token = records::PseudonymToken::from_hex(entry.at("token").get<std::string>());
      if (!token) throw Error(ErrorCode::kCorruptSnapshot, "bad token in local table");
      table.insert(*token, {entry.at("school").get<std::string>(), entry.at("raw_id").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptSnapshot, e.what());
  }
  return table;
}

}  // namespace dmp::privacy
