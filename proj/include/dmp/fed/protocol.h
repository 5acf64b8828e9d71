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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::fed {

using records::SchoolId;

enum class MessageType { kRegister, kRoundStart, kUpdate, kRoundEnd, kAbort };

std::string_view to_string(MessageType type);
std::optional<MessageType> parse_message_type(std::string_view text);

// Wire envelope. Serialized as one JSON object per line with exactly the
// keys type, round, school and payload.
struct Envelope {
  MessageType type = MessageType::kRegister;
  int round = 0;
  SchoolId school;
  nlohmann::json payload = nlohmann::json::object();
};

// Newline-terminated.
std::string to_wire(const Envelope& envelope);
// Throws Error(kInvalidArgument) on malformed lines or extra keys.
Envelope from_wire(std::string_view line);

// Update payload: masked fixed-point values plus the plaintext sample count.
struct UpdatePayload {
  std::vector<std::int64_t> values;
  long n = 0;
};

nlohmann::json to_json(const UpdatePayload& payload);
UpdatePayload update_from_json(const nlohmann::json& doc);

// Observer for every byte crossing a channel.
using Tap = std::function<void(std::string_view)>;

// Unbounded in-process byte channel carrying NDJSON lines.
class Channel {
 public:
  void set_tap(Tap tap);
  void send(const Envelope& envelope);
  void send_raw(std::string line);
  // Non-blocking.
  std::optional<std::string> try_receive();
  // Blocks until a line arrives.
  std::string receive();
  std::size_t pending() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  Tap tap_;
};

// Thread-safe byte log of everything the coordinator sends or receives.
class TranscriptRecorder {
 public:
  void record(std::string_view bytes);
  std::string bytes() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::string log_;
};

using PairSeed = std::array<std::uint8_t, 32>;

// Seeds shared by each unordered pair of schools, keyed (lower, higher).
using PairSeeds = std::map<std::pair<SchoolId, SchoolId>, PairSeed>;

// Stands in for pairwise key agreement: derives one seed per pair from a
// master seed.
PairSeeds derive_pair_seeds(std::span<const SchoolId> schools, std::uint64_t master_seed);

// Per-round, per-coordinate mask words for one pair.
std::vector<std::uint64_t> pair_mask(const PairSeed& seed, int round, std::size_t length);

// Adds the pair masks to `encoded` (own id < peer) or subtracts them
// (own id > peer), modulo 2^64.
std::vector<std::int64_t> mask_update(std::span<const std::int64_t> encoded, const SchoolId& self,
                                      std::span<const SchoolId> peers, const PairSeeds& seeds, int round);

// Coordinate-wise sum modulo 2^64. Throws Error(kInvalidArgument) on length
// mismatch.
std::vector<std::int64_t> sum_payloads(std::span<const std::vector<std::int64_t>> payloads);

}  // namespace dmp::fed
