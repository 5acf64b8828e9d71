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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dmp/fed/model.h"
#include "dmp/fed/protocol.h"
#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::fed {

// Heterogeneity weights n_s^alpha (alpha = 1 count-weighted, 0 uniform).
double school_weight(long n, double alpha);

// Fixed-point payload a school submits before masking: n^alpha * delta.
// Throws Error(kEncodingOverflow).
std::vector<std::int64_t> encode_update(const ItemFactors& delta, long n, double alpha);

// Unmasks by summation and returns decode(sum) / sum(n^alpha).
std::vector<double> aggregate_values(std::span<const std::vector<std::int64_t>> masked, std::span<const long> counts,
                                     double alpha);

// Applies the aggregated delta to `global` and bumps the version. Every
// expected school must appear exactly once with round == `round`. Throws
// Error(kMissingSchool) or Error(kVersionMismatch).
ItemFactors aggregate(const ItemFactors& global, std::span<const Envelope> updates,
                      const std::set<SchoolId>& expected, int round, double alpha);

// Single logical event loop. Sees only envelopes.
class Coordinator {
 public:
  Coordinator(int d, double alpha, std::uint64_t seed, TranscriptRecorder* transcript = nullptr);

  Channel& inbox() { return inbox_; }
  void connect(const SchoolId& school, Channel* node_inbox);

  // Consumes pending Register messages and initializes the shared factors
  // over the union catalog. Throws Error(kInvalidArgument) for < 2 schools.
  void collect_registrations();
  void start_round(int round);
  // Drains Update messages for the current round. On success aggregates and
  // broadcasts RoundEnd. On a missing school broadcasts Abort and rethrows
  // Error(kMissingSchool).
  void finish_round();

  const ItemFactors& factors() const { return factors_; }
  const Popularity& popularity() const { return popularity_; }
  const std::set<SchoolId>& schools() const { return schools_; }

 private:
  void broadcast(const Envelope& envelope);

  int d_;
  double alpha_;
  std::uint64_t seed_;
  TranscriptRecorder* transcript_;
  Channel inbox_;
  std::map<SchoolId, Channel*> outboxes_;
  std::set<SchoolId> schools_;
  std::map<SchoolId, std::set<std::string>> offered_;
  ItemFactors factors_;
  Popularity popularity_;
  int round_ = 0;
};

struct FederationConfig {
  int d = kDefaultDim;
  int rounds = 40;
  TrainParams train{2.0, 1e-5, 5};
  double alpha = 1.0;
  std::uint64_t seed = 1;
  std::size_t eval_k = 5;
  // Simulated dropout: the school trains and masks but never sends its Update.
  std::optional<std::pair<SchoolId, int>> drop;

  static FederationConfig defaults();
};

nlohmann::json to_json(const FederationConfig& config);
FederationConfig federation_config_from_json(const nlohmann::json& doc);

// Held-out enrolled elective per (school, token).
using Holdout = std::map<std::pair<SchoolId, std::string>, std::string>;

// One enrolled elective per student with at least two, chosen by seed.
Holdout choose_holdout(std::span<const records::StudentRecord> records, std::uint64_t seed);
std::vector<records::StudentRecord> without_holdout(std::span<const records::StudentRecord> records,
                                                    const Holdout& holdout);

// Electives each school offers: enrollment rows tagged with that school.
std::map<SchoolId, std::set<std::string>> offered_catalogs(std::span<const records::StudentRecord> records);

struct RoundRecord {
  int round = 0;
  int version = 0;
  std::optional<double> hit_rate;
  std::string factors_digest;
};

struct Instrumentation {
  TranscriptRecorder* transcript = nullptr;
  // Called with each school's true encoded payload before masking.
  std::function<void(const SchoolId&, int, const std::vector<std::int64_t>&)> on_encoded;
  // Called with each school's masked payload as sent.
  std::function<void(const SchoolId&, int, const std::vector<std::int64_t>&)> on_masked;
};

struct FederationResult {
  std::vector<RoundRecord> history;
  ItemFactors factors;
  Popularity popularity;
  std::vector<SchoolNode> nodes;
  bool aborted = false;
  std::string abort_reason;

  const SchoolNode* node(const SchoolId& school) const;
};

// Full simulation. `records` are training records; the optional holdout
// drives the per-round hit-rate. Offered catalogs come from `catalog_records`
// when given, else from `records`. Throws Error(kInvalidArgument) for fewer
// than two schools.
FederationResult run_federation(std::span<const records::StudentRecord> records, const FederationConfig& config,
                                const Holdout* holdout = nullptr, const Instrumentation& hooks = {},
                                std::span<const records::StudentRecord> catalog_records = {});

// Hit-rate@k over the school-local catalog.
std::optional<double> hit_rate(const FederationResult& result, const Holdout& holdout, std::size_t k);
// Same protocol ranking by global popularity.
std::optional<double> popularity_hit_rate(const FederationResult& result, const Holdout& holdout, std::size_t k);

nlohmann::json history_json(const FederationResult& result);

}  // namespace dmp::fed
