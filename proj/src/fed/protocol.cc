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

#include "dmp/fed/protocol.h"

#include <cstring>

#include "dmp/common/crypto.h"
#include "dmp/common/error.h"

namespace dmp::fed {

namespace {

constexpr std::pair<MessageType, std::string_view> kTypeNames[] = {
    {MessageType::kRegister, "Register"}, {MessageType::kRoundStart, "RoundStart"},
    {MessageType::kUpdate, "Update"},     {MessageType::kRoundEnd, "RoundEnd"},
    {MessageType::kAbort, "Abort"},
};

void append_u32be(crypto::Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

std::string_view to_string(MessageType type) {
  for (const auto& [t, name] : kTypeNames) {
    if (t == type) return name;
  }
  return "Unknown";
}

std::optional<MessageType> parse_message_type(std::string_view text) {
  for (const auto& [t, name] : kTypeNames) {
    if (name == text) return t;
  }
  return std::nullopt;
}

std::string to_wire(const Envelope& envelope) {
  nlohmann::json doc = {{"type", to_string(envelope.type)},
                        {"round", envelope.round},
                        {"school", envelope.school},
                        {"payload", envelope.payload}};
  return doc.dump() + "\n";
}

Envelope from_wire(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  auto doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || doc.size() != 4) {
    throw Error(ErrorCode::kInvalidArgument, "malformed federation envelope");
  }
  try {
    auto type = parse_message_type(doc.at("type").get<std::string>());
    if (!type) throw Error(ErrorCode::kInvalidArgument, "unknown federation message type");
    return {*type, doc.at("round").get<int>(), doc.at("school").get<std::string>(), doc.at("payload")};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed federation envelope: ") + e.what());
  }
}

nlohmann::json to_json(const UpdatePayload& payload) { return {{"n", payload.n}, {"values", payload.values}}; }

UpdatePayload update_from_json(const nlohmann::json& doc) {
  try {
    return {doc.at("values").get<std::vector<std::int64_t>>(), doc.at("n").get<long>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed update payload: ") + e.what());
  }
}

void Channel::set_tap(Tap tap) {
  std::lock_guard lock(mu_);
  tap_ = std::move(tap);
}

void Channel::send(const Envelope& envelope) { send_raw(to_wire(envelope)); }

void Channel::send_raw(std::string line) {
  {
    std::lock_guard lock(mu_);
    if (tap_) tap_(line);
    queue_.push_back(std::move(line));
  }
  cv_.notify_one();
}

std::optional<std::string> Channel::try_receive() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  auto line = std::move(queue_.front());
  queue_.pop_front();
  return line;
}

std::string Channel::receive() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !queue_.empty(); });
  auto line = std::move(queue_.front());
  queue_.pop_front();
  return line;
}

std::size_t Channel::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

void TranscriptRecorder::record(std::string_view bytes) {
  std::lock_guard lock(mu_);
  log_.append(bytes);
}

std::string TranscriptRecorder::bytes() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t TranscriptRecorder::size() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

PairSeeds derive_pair_seeds(std::span<const SchoolId> schools, std::uint64_t master_seed) {
  crypto::Bytes master;
  for (int shift = 56; shift >= 0; shift -= 8) master.push_back(static_cast<std::uint8_t>(master_seed >> shift));
  PairSeeds seeds;
  for (const auto& a : schools) {
    for (const auto& b : schools) {
      if (!(a < b)) continue;
      crypto::Bytes msg;
      append_u32be(msg, static_cast<std::uint32_t>(a.size()));
      msg.insert(msg.end(), a.begin(), a.end());
      append_u32be(msg, static_cast<std::uint32_t>(b.size()));
      msg.insert(msg.end(), b.begin(), b.end());
      seeds[{a, b}] = crypto::hmac_sha256(master, msg);
    }
  }
  return seeds;
}

std::vector<std::uint64_t> pair_mask(const PairSeed& seed, int round, std::size_t length) {
  crypto::Bytes msg{'m', 'a', 's', 'k'};
  append_u32be(msg, static_cast<std::uint32_t>(round));
  auto key = crypto::hmac_sha256(seed, msg);
  auto stream = crypto::keystream(key, length * 8);
  std::vector<std::uint64_t> words(length);
  for (std::size_t i = 0; i < length; ++i) {
    std::uint64_t w = 0;
    for (int b = 0; b < 8; ++b) w |= static_cast<std::uint64_t>(stream[i * 8 + b]) << (8 * b);
    words[i] = w;
  }
  return words;
}

std::vector<std::int64_t> mask_update(std::span<const std::int64_t> encoded, const SchoolId& self,
                                      std::span<const SchoolId> peers, const PairSeeds& seeds, int round) {
  std::vector<std::uint64_t> acc(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) acc[i] = static_cast<std::uint64_t>(encoded[i]);
  for (const auto& peer : peers) {
    if (peer == self) continue;
    bool lower = self < peer;
    auto it = seeds.find(lower ? std::pair{self, peer} : std::pair{peer, self});
    if (it == seeds.end()) throw Error(ErrorCode::kInvalidArgument, "no shared seed with " + peer);
    auto mask = pair_mask(it->second, round, encoded.size());
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = lower ? acc[i] + mask[i] : acc[i] - mask[i];
  }
  std::vector<std::int64_t> out(acc.size());
  std::memcpy(out.data(), acc.data(), acc.size() * sizeof(std::uint64_t));
  return out;
}

std::vector<std::int64_t> sum_payloads(std::span<const std::vector<std::int64_t>> payloads) {
  if (payloads.empty()) return {};
  std::vector<std::uint64_t> acc(payloads.front().size(), 0);
  for (const auto& p : payloads) {
    if (p.size() != acc.size()) throw Error(ErrorCode::kInvalidArgument, "payload length mismatch");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<std::uint64_t>(p[i]);
  }
  std::vector<std::int64_t> out(acc.size());
  std::memcpy(out.data(), acc.data(), acc.size() * sizeof(std::uint64_t));
  return out;
}

}  // namespace dmp::fed
