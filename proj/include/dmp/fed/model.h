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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::fed {

using records::SchoolId;

inline constexpr int kDefaultDim = 8;
// Global offset of the implicit-feedback target (1:1 positives/negatives).
inline constexpr double kMu = 0.5;

struct ItemVector {
  std::vector<double> q;
  double b = 0.0;

  bool operator==(const ItemVector&) const = default;
};

// Shared elective embeddings. Flattened layout is catalog order (ascending
// elective id), each item as q[0..d) then b.
struct ItemFactors {
  int d = kDefaultDim;
  int version = 0;
  std::map<std::string, ItemVector> items;

  static ItemFactors init(const std::set<std::string>& catalog, int d, std::uint64_t seed);

  std::size_t flat_size() const { return items.size() * static_cast<std::size_t>(d + 1); }
  std::vector<double> flatten() const;
  // Same shape, values replaced. Throws Error(kInvalidArgument) on length.
  ItemFactors with_values(std::span<const double> flat) const;
  bool finite() const;

  bool operator==(const ItemFactors&) const = default;
};

nlohmann::json to_json(const ItemFactors& factors);
ItemFactors item_factors_from_json(const nlohmann::json& doc);
// Hex SHA-256 of the JSON serialization.
std::string digest(const ItemFactors& factors);

struct UserState {
  std::vector<double> p;
  double b = 0.0;

  bool operator==(const UserState&) const = default;
};

struct TrainParams {
  double lr = 0.05;
  double lambda = 1e-4;
  int epochs = 1;
};

// One training example; r = 1 enrolled, r = 0 sampled negative.
struct Row {
  std::string token;
  std::string elective;
  double r = 1.0;

  bool operator==(const Row&) const = default;
};

struct LocalUpdate {
  ItemFactors delta;  // new shared parameters minus received ones
  long n = 0;         // rows used
};

struct Recommendation {
  std::string elective_id;
  double score = 0.0;
  bool cross_school = false;

  bool operator==(const Recommendation&) const = default;
};

// Global enrollment fraction per elective.
using Popularity = std::map<std::string, double>;

// One school's private side of the federation.
class SchoolNode {
 public:
  // Keeps the records belonging to `school`. `offered` is the school's local
  // catalog; enrolled interactions become positives.
  SchoolNode(SchoolId school, std::span<const records::StudentRecord> records, std::set<std::string> offered,
             int d, std::uint64_t seed);

  const SchoolId& school() const { return school_; }
  const std::set<std::string>& offered() const { return offered_; }
  long student_count() const { return static_cast<long>(users_.size()); }
  long interaction_count() const;
  std::map<std::string, long> enrollment_counts() const;
  const std::set<std::string>& enrolled(const std::string& token) const;

  // Positives plus one negative per positive drawn from the local catalog,
  // keyed by (school, round, seed).
  std::vector<Row> sample_rows(const ItemFactors& global, int round, std::uint64_t seed) const;

  // Mean squared error over `rows` plus the L2 penalty.
  double objective(std::span<const Row> rows, const ItemFactors& global, double lambda) const;

  // Full-batch gradient descent for params.epochs epochs on the rows of this
  // round. Private state updates in place. Throws Error(kNoInteractions).
  LocalUpdate local_train(const ItemFactors& global, const TrainParams& params, int round, std::uint64_t seed);

  // Scores electives the student has not taken, top-k by score desc then id.
  // local_only restricts to the school's catalog. Throws Error(kUnknownStudent)
  // for tokens without training interactions.
  std::vector<Recommendation> recommend(const std::string& token, const ItemFactors& global, std::size_t k,
                                        bool local_only = false) const;

  std::map<std::string, UserState>& users() { return users_; }
  const std::map<std::string, UserState>& users() const { return users_; }
  std::map<std::string, std::vector<double>>& offsets() { return offsets_; }
  const std::map<std::string, std::vector<double>>& offsets() const { return offsets_; }

  nlohmann::json private_state_json() const;
  void restore_private_state(const nlohmann::json& doc);

 private:
  SchoolId school_;
  int d_;
  std::set<std::string> offered_;
  std::map<std::string, std::set<std::string>> enrolled_;
  std::map<std::string, UserState> users_;
  std::map<std::string, std::vector<double>> offsets_;
};

// 0.5 * popularity + 0.5 * rank-normalized item bias over the whole catalog,
// cross_school set for electives `school_offered` lacks. Throws
// Error(kEmptyCatalog).
std::vector<Recommendation> cold_start_recommend(const ItemFactors& global, const Popularity& popularity,
                                                 const std::set<std::string>& school_offered, std::size_t k);

// recommend, falling back to cold_start_recommend for unknown students.
std::vector<Recommendation> recommend_or_cold_start(const SchoolNode& node, const std::string& token,
                                                    const ItemFactors& global, const Popularity& popularity,
                                                    std::size_t k, bool local_only = false);

nlohmann::json recommendations_payload(std::span<const Recommendation> recs);

}  // namespace dmp::fed
