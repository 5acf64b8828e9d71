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

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmp/predict/models.h"
#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::ews {

// Declared in increasing severity.
enum class AlertColor { kGreen, kYellow, kRed };

int severity(AlertColor color);
std::string_view to_string(AlertColor color);  // "red" / "yellow" / "green"
std::optional<AlertColor> parse_alert_color(std::string_view text);

struct ConfigScope {
  std::string teacher = "default";
  std::optional<std::string> subject;

  auto operator<=>(const ConfigScope&) const = default;
};

struct AlertConfig {
  ConfigScope scope;
  double inschool_red_cutoff = -10.0;
  double inschool_yellow_cutoff = -3.0;
  int exam_yellow_deviation = -1;
  int exam_red_deviation = -2;
  double behavior_red = 0.7;
  double behavior_yellow = 0.4;

  bool operator==(const AlertConfig&) const = default;
};

// Human-readable ordering constraints the config breaks; empty when valid.
std::vector<std::string> config_violations(const AlertConfig& cfg);
// Throws Error(kInvalidConfig) naming the first violated constraint.
void validate_config(const AlertConfig& cfg);

// delta = predicted next score - mean of the last two actual scores.
// Red iff delta <= red cutoff, Yellow iff red < delta <= yellow, else Green.
AlertColor classify_inschool(double delta, const AlertConfig& cfg);

// deviation = predicted - target grade.
// Red iff deviation <= red, Yellow iff red < deviation <= yellow, else Green.
AlertColor classify_exam(int predicted_grade, int target_grade, const AlertConfig& cfg);

// Red iff risk >= red, Yellow iff yellow <= risk < red, else Green.
AlertColor classify_behavior(double risk, const AlertConfig& cfg);

enum class DimensionKind { kInSchool, kExam, kBehavior };

std::string_view to_string(DimensionKind kind);  // "inschool" / "exam" / "behavior"
std::optional<DimensionKind> parse_dimension_kind(std::string_view text);

struct Dimension {
  DimensionKind kind = DimensionKind::kBehavior;
  std::string subject;  // empty for behavior

  auto operator<=>(const Dimension&) const = default;
};

struct Alert {
  records::PseudonymToken token;
  Dimension dimension;
  AlertColor color = AlertColor::kGreen;
  // inschool: score delta; exam: grade deviation; behavior: risk.
  double metric = 0.0;
  std::string config_snapshot_id;
  std::string generated_at;  // ISO-8601 UTC

  bool operator==(const Alert&) const = default;
};

// Teacher-scoped threshold configurations with immutable snapshots. Every
// accepted update issues a new snapshot id; existing alerts keep theirs.
// Thread-safe; updates are serialized.
class AlertConfigStore {
 public:
  static constexpr std::string_view kDefaultSnapshotId = "cfg-0";

  AlertConfigStore();

  // Throws Error(kInvalidConfig) and leaves the store untouched when invalid.
  std::string update_config(const AlertConfig& cfg);

  struct Resolved {
    std::string snapshot_id;
    AlertConfig config;
  };

  // Subject override for the teacher, then the teacher default, then the
  // built-in defaults.
  Resolved lookup(const std::string& teacher, const std::optional<std::string>& subject) const;

  std::optional<AlertConfig> snapshot(const std::string& snapshot_id) const;

  nlohmann::json to_json() const;
  // Replaces the whole store. Throws Error(kInvalidConfig) on bad input.
  void restore(const nlohmann::json& doc);

 private:
  mutable std::mutex mu_;
  std::uint64_t next_id_ = 1;
  std::map<std::string, AlertConfig> snapshots_;
  std::map<ConfigScope, std::string> active_;
};

// Recomputes the color of an alert from its metric and config snapshot.
AlertColor rederive_color(const Alert& alert, const AlertConfig& snapshot);

struct AlertFeed {
  std::vector<Alert> alerts;
  std::vector<std::string> warnings;
};

// One alert per (student, dimension) with data and a trained model, sorted
// by severity (worst first), then by how bad the metric is (lowest delta or
// deviation, highest risk), then token, then dimension. Missing models are
// reported once each in `warnings`.
AlertFeed build_alert_feed(std::span<const records::StudentRecord> roster,
                           const predict::ModelSet& models, const AlertConfigStore& configs,
                           const std::string& teacher, const std::string& generated_at);

nlohmann::json to_json(const Alert& alert);
Alert alert_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AlertConfig& cfg);
AlertConfig alert_config_from_json(const nlohmann::json& doc);

// One alert per line.
std::string to_jsonl(std::span<const Alert> alerts);

}  // namespace dmp::ews
