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

#include "dmp/ews/alerts.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "dmp/common/error.h"
#include "dmp/predict/features.h"

namespace dmp::ews {

using predict::kAllSubjects;

int severity(AlertColor color) { return static_cast<int>(color); }

std::string_view to_string(AlertColor color) {
  switch (color) {
    case AlertColor::kRed: return "red";
    case AlertColor::kYellow: return "yellow";
    case AlertColor::kGreen: return "green";
  }
  return "green";
}

std::optional<AlertColor> parse_alert_color(std::string_view text) {
  if (text == "red") return AlertColor::kRed;
  if (text == "yellow") return AlertColor::kYellow;
  if (text == "green") return AlertColor::kGreen;
  return std::nullopt;
}

std::string_view to_string(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::kInSchool: return "inschool";
    case DimensionKind::kExam: return "exam";
    case DimensionKind::kBehavior: return "behavior";
  }
  return "behavior";
}

std::optional<DimensionKind> parse_dimension_kind(std::string_view text) {
  if (text == "inschool") return DimensionKind::kInSchool;
  if (text == "exam") return DimensionKind::kExam;
  if (text == "behavior") return DimensionKind::kBehavior;
  return std::nullopt;
}

std::vector<std::string> config_violations(const AlertConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.scope.teacher.empty()) out.push_back("scope.teacher must be non-empty");
  if (!std::isfinite(cfg.inschool_red_cutoff) || !std::isfinite(cfg.inschool_yellow_cutoff)) {
    out.push_back("in-school cutoffs must be finite");
  } else {
    if (!(cfg.inschool_red_cutoff < cfg.inschool_yellow_cutoff)) {
      out.push_back("inschool_red_cutoff < inschool_yellow_cutoff");
    }
    if (!(cfg.inschool_yellow_cutoff <= 0.0)) out.push_back("inschool_yellow_cutoff <= 0");
  }
  if (!(cfg.exam_red_deviation <= cfg.exam_yellow_deviation)) {
    out.push_back("exam_red_deviation <= exam_yellow_deviation");
  }
  if (!(cfg.exam_yellow_deviation < 0)) out.push_back("exam_yellow_deviation < 0");
  if (!(cfg.behavior_red > 0.0 && cfg.behavior_red <= 1.0)) out.push_back("behavior_red in (0,1]");
  if (!(cfg.behavior_yellow > 0.0 && cfg.behavior_yellow < 1.0)) out.push_back("behavior_yellow in (0,1)");
  if (!(cfg.behavior_yellow < cfg.behavior_red)) out.push_back("behavior_yellow < behavior_red");
  return out;
}

void validate_config(const AlertConfig& cfg) {
  auto violations = config_violations(cfg);
  if (!violations.empty()) throw Error(ErrorCode::kInvalidConfig, "violated: " + violations.front());
}

AlertColor classify_inschool(double delta, const AlertConfig& cfg) {
  validate_config(cfg);
  if (delta <= cfg.inschool_red_cutoff) return AlertColor::kRed;
  if (delta <= cfg.inschool_yellow_cutoff) return AlertColor::kYellow;
  return AlertColor::kGreen;
}

AlertColor classify_exam(int predicted_grade, int target_grade, const AlertConfig& cfg) {
  validate_config(cfg);
  auto in_range = [](int g) { return g >= records::kMinGrade && g <= records::kMaxGrade; };
  if (!in_range(predicted_grade) || !in_range(target_grade)) {
    throw Error(ErrorCode::kInvalidArgument, "grades must lie in 0..7");
  }
  int deviation = predicted_grade - target_grade;
  if (deviation <= cfg.exam_red_deviation) return AlertColor::kRed;
  if (deviation <= cfg.exam_yellow_deviation) return AlertColor::kYellow;
  return AlertColor::kGreen;
}

AlertColor classify_behavior(double risk, const AlertConfig& cfg) {
  validate_config(cfg);
  if (!(risk >= 0.0 && risk <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "risk must lie in [0,1]");
  if (risk >= cfg.behavior_red) return AlertColor::kRed;
  if (risk >= cfg.behavior_yellow) return AlertColor::kYellow;
  return AlertColor::kGreen;
}

AlertConfigStore::AlertConfigStore() {
  snapshots_.emplace(std::string(kDefaultSnapshotId), AlertConfig{});
}

std::string AlertConfigStore::update_config(const AlertConfig& cfg) {
  validate_config(cfg);
  std::lock_guard lock(mu_);
  std::string id = "cfg-" + std::to_string(next_id_++);
  snapshots_.emplace(id, cfg);
  active_[cfg.scope] = id;
  return id;
}

AlertConfigStore::Resolved AlertConfigStore::lookup(const std::string& teacher,
                                                    const std::optional<std::string>& subject) const {
  std::lock_guard lock(mu_);
  auto find = [&](const ConfigScope& scope) -> const std::string* {
    auto it = active_.find(scope);
    return it == active_.end() ? nullptr : &it->second;
  };
  const std::string* id = nullptr;
  if (subject) id = find({teacher, subject});
  if (!id) id = find({teacher, std::nullopt});
  std::string chosen = id ? *id : std::string(kDefaultSnapshotId);
  return {chosen, snapshots_.at(chosen)};
}

std::optional<AlertConfig> AlertConfigStore::snapshot(const std::string& snapshot_id) const {
  std::lock_guard lock(mu_);
  auto it = snapshots_.find(snapshot_id);
  if (it == snapshots_.end()) return std::nullopt;
  return it->second;
}

nlohmann::json AlertConfigStore::to_json() const {
  std::lock_guard lock(mu_);
  nlohmann::json snapshots = nlohmann::json::object();
  for (const auto& [id, cfg] : snapshots_) snapshots[id] = ews::to_json(cfg);
  nlohmann::json active = nlohmann::json::array();
  for (const auto& [scope, id] : active_) {
    nlohmann::json entry{{"teacher", scope.teacher}, {"snapshot_id", id}};
    entry["subject"] = scope.subject ? nlohmann::json(*scope.subject) : nlohmann::json(nullptr);
    active.push_back(std::move(entry));
  }
  return {{"next_id", next_id_}, {"snapshots", std::move(snapshots)}, {"active", std::move(active)}};
}

void AlertConfigStore::restore(const nlohmann::json& doc) {
  std::map<std::string, AlertConfig> snapshots;
  std::map<ConfigScope, std::string> active;
  std::uint64_t next_id = 1;
  try {
    next_id = doc.at("next_id").get<std::uint64_t>();
    for (const auto& [id, cfg] : doc.at("snapshots").items()) {
      snapshots.emplace(id, alert_config_from_json(cfg));
    }
    for (const auto& entry : doc.at("active")) {
      ConfigScope scope{entry.at("teacher").get<std::string>(), std::nullopt};
      if (!entry.at("subject").is_null()) scope.subject = entry.at("subject").get<std::string>();
      auto id = entry.at("snapshot_id").get<std::string>();
      if (!snapshots.count(id)) throw Error(ErrorCode::kInvalidConfig, "active scope names unknown snapshot " + id);
      active.emplace(std::move(scope), std::move(id));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("malformed config store: ") + e.what());
  }
  snapshots.emplace(std::string(kDefaultSnapshotId), AlertConfig{});
  std::lock_guard lock(mu_);
  next_id_ = next_id;
  snapshots_ = std::move(snapshots);
  active_ = std::move(active);
}

AlertColor rederive_color(const Alert& alert, const AlertConfig& snapshot) {
  switch (alert.dimension.kind) {
    case DimensionKind::kInSchool:
      return classify_inschool(alert.metric, snapshot);
    case DimensionKind::kExam: {
      // Any (predicted, target) pair with this deviation classifies alike.
      int deviation = static_cast<int>(std::lround(alert.metric));
      return deviation >= 0 ? classify_exam(deviation, 0, snapshot)
                            : classify_exam(0, -deviation, snapshot);
    }
    case DimensionKind::kBehavior:
      return classify_behavior(alert.metric, snapshot);
  }
  return AlertColor::kGreen;
}

namespace {

// Lower is worse.
double badness_key(const Alert& a) {
  return a.dimension.kind == DimensionKind::kBehavior ? -a.metric : a.metric;
}

bool feed_order(const Alert& a, const Alert& b) {
  if (severity(a.color) != severity(b.color)) return severity(a.color) > severity(b.color);
  double ka = badness_key(a), kb = badness_key(b);
  if (ka != kb) return ka < kb;
  if (a.token != b.token) return a.token < b.token;
  return a.dimension < b.dimension;
}

}  // namespace

AlertFeed build_alert_feed(std::span<const records::StudentRecord> roster,
                           const predict::ModelSet& models, const AlertConfigStore& configs,
                           const std::string& teacher, const std::string& generated_at) {
  AlertFeed feed;
  std::set<std::string> warnings;
  if (!models.behavior) warnings.insert("NoTrainedModel: behavior");

  for (const auto& record : roster) {
    auto latest = predict::latest_term(record);
    if (!latest) continue;
    const auto as_of = latest->next();

    for (const auto& subject : predict::subjects_of(record)) {
      auto it = models.inschool.find({record.school, subject});
      if (it == models.inschool.end()) {
        warnings.insert("NoTrainedModel: inschool " + record.school + "/" + subject);
        continue;
      }
      auto baseline = predict::recent_mean(record, subject, as_of);
      if (!baseline) continue;
      double predicted = predict::predict_score(it->second, predict::extract_features(record, subject, as_of));
      double delta = predicted - *baseline;
      auto resolved = configs.lookup(teacher, subject);
      feed.alerts.push_back({record.token, {DimensionKind::kInSchool, subject},
                             classify_inschool(delta, resolved.config), delta, resolved.snapshot_id,
                             generated_at});
    }

    for (const auto& [subject, target] : record.target_grades) {
      auto it = models.exam.find(subject);
      if (it == models.exam.end()) {
        warnings.insert("NoTrainedModel: exam " + subject);
        continue;
      }
      int predicted = predict::predict_exam_grade(it->second, predict::extract_features(record, subject, as_of),
                                                  models.exam_bins);
      auto resolved = configs.lookup(teacher, subject);
      feed.alerts.push_back({record.token, {DimensionKind::kExam, subject},
                             classify_exam(predicted, target, resolved.config),
                             static_cast<double>(predicted - target), resolved.snapshot_id, generated_at});
    }

    if (models.behavior) {
      double risk = predict::predict_behavior_risk(*models.behavior,
                                                   predict::extract_features(record, kAllSubjects, as_of));
      auto resolved = configs.lookup(teacher, std::nullopt);
      feed.alerts.push_back({record.token, {DimensionKind::kBehavior, ""},
                             classify_behavior(risk, resolved.config), risk, resolved.snapshot_id,
                             generated_at});
    }
  }
  std::sort(feed.alerts.begin(), feed.alerts.end(), feed_order);
  feed.warnings.assign(warnings.begin(), warnings.end());
  return feed;
}

nlohmann::json to_json(const Alert& alert) {
  nlohmann::json doc{{"token", alert.token.str()},
                     {"dimension", to_string(alert.dimension.kind)},
                     {"color", to_string(alert.color)},
                     {"metric", alert.metric},
                     {"config_snapshot_id", alert.config_snapshot_id},
                     {"generated_at", alert.generated_at}};
  if (alert.dimension.kind != DimensionKind::kBehavior) doc["subject"] = alert.dimension.subject;
  return doc;
}

Alert alert_from_json(const nlohmann::json& doc) {
  try {
    Alert alert;
    auto token = records::PseudonymToken::from_hex(doc.at("token").get<std::string>());
    auto kind = parse_dimension_kind(doc.at("dimension").get<std::string>());
    auto color = parse_alert_color(doc.at("color").get<std::string>());
    if (!token || !kind || !color) throw Error(ErrorCode::kInvalidArgument, "malformed alert");
    alert.token = *token;
    alert.dimension = {*kind, doc.value("subject", std::string())};
    alert.color = *color;
    alert.metric = doc.at("metric").get<double>();
    alert.config_snapshot_id = doc.at("config_snapshot_id").get<std::string>();
    alert.generated_at = doc.at("generated_at").get<std::string>();
    return alert;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed alert: ") + e.what());
  }
}

nlohmann::json to_json(const AlertConfig& cfg) {
  nlohmann::json doc{{"teacher", cfg.scope.teacher},
                     {"inschool_red_cutoff", cfg.inschool_red_cutoff},
                     {"inschool_yellow_cutoff", cfg.inschool_yellow_cutoff},
                     {"exam_yellow_deviation", cfg.exam_yellow_deviation},
                     {"exam_red_deviation", cfg.exam_red_deviation},
                     {"behavior_red", cfg.behavior_red},
                     {"behavior_yellow", cfg.behavior_yellow}};
  doc["subject"] = cfg.scope.subject ? nlohmann::json(*cfg.scope.subject) : nlohmann::json(nullptr);
  return doc;
}

AlertConfig alert_config_from_json(const nlohmann::json& doc) {
  AlertConfig cfg;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
    cfg.scope.teacher = doc.value("teacher", cfg.scope.teacher);
    if (doc.contains("subject") && !doc.at("subject").is_null()) {
      cfg.scope.subject = doc.at("subject").get<std::string>();
    }
    // red_cutoff / yellow_cutoff are short aliases for the in-school pair.
    cfg.inschool_red_cutoff = doc.value("red_cutoff", cfg.inschool_red_cutoff);
    cfg.inschool_yellow_cutoff = doc.value("yellow_cutoff", cfg.inschool_yellow_cutoff);
    cfg.inschool_red_cutoff = doc.value("inschool_red_cutoff", cfg.inschool_red_cutoff);
    cfg.inschool_yellow_cutoff = doc.value("inschool_yellow_cutoff", cfg.inschool_yellow_cutoff);
    cfg.exam_yellow_deviation = doc.value("exam_yellow_deviation", cfg.exam_yellow_deviation);
    cfg.exam_red_deviation = doc.value("exam_red_deviation", cfg.exam_red_deviation);
    cfg.behavior_red = doc.value("behavior_red", cfg.behavior_red);
    cfg.behavior_yellow = doc.value("behavior_yellow", cfg.behavior_yellow);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("malformed config: ") + e.what());
  }
  return cfg;
}

std::string to_jsonl(std::span<const Alert> alerts) {
  std::string out;
  for (const auto& alert : alerts) {
    out += to_json(alert).dump();
    out += '\n';
  }
  return out;
}

}  // namespace dmp::ews
