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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::talent {

using records::ActivityCategory;

// Academic, Sports, Arts, Leadership, Service, Technology, Other.
const std::vector<ActivityCategory>& categories();

// Case-insensitive category label.
std::optional<ActivityCategory> parse_category(std::string_view label);

enum class EvidenceKind {
  kAwardInCategory,
  kActivityHoursInCategory,  // weight applies per 10 hours
  kSubjectPercentileTop10,   // Academic only
  kLeadershipRole,           // Leadership only
};

std::string_view to_string(EvidenceKind kind);

// Nonnegative weight per (category, evidence kind) plus the award-name and
// leadership-role patterns (case-insensitive substrings).
struct TalentWeights {
  std::map<std::pair<ActivityCategory, EvidenceKind>, double> weights;
  // Checked in order; the first matching pattern decides the category.
  std::vector<std::pair<std::string, ActivityCategory>> award_patterns;
  std::vector<std::string> leadership_role_patterns;

  // award 3.0, per-10-hours 1.0, top-decile subject 5.0, leadership role 4.0
  // and a small built-in award mapping.
  static TalentWeights defaults();

  double weight(ActivityCategory category, EvidenceKind kind) const;
  // Multiplies every weight by c.
  TalentWeights scaled(double c) const;

  // {"weights": {"award": x, "hours_per_10": x, "top_decile": x,
  //  "leadership_role": x}, "award_patterns": [{"pattern","category"}],
  //  "leadership_role_patterns": [...]}. Missing keys keep defaults.
  // Throws Error(kInvalidArgument) for negative weights or unknown categories.
  static TalentWeights from_json(const nlohmann::json& doc);
};

// Category an award lands in; unmapped awards go to Other.
ActivityCategory award_category(std::string_view award_name, const TalentWeights& weights);

// Per-subject mean scores of every student in the peer cohort.
struct CohortScores {
  std::map<std::string, std::vector<double>> by_subject;  // sorted ascending
};

CohortScores build_cohort(std::span<const records::StudentRecord> cohort);

// True when fewer than 10% of the cohort have a strictly higher value.
bool in_top_decile(double value, const std::vector<double>& sorted_cohort);

struct Evidence {
  ActivityCategory category = ActivityCategory::kOther;
  EvidenceKind kind = EvidenceKind::kAwardInCategory;
  std::string detail;
  double contribution = 0.0;
};

struct TalentScorecard {
  records::PseudonymToken token;
  std::map<ActivityCategory, double> scores;  // all seven categories
  std::vector<Evidence> evidence;
};

// Linear accumulation of award, activity-hour, top-decile subject and
// leadership-role evidence. Throws Error(kInvalidArgument) for negative
// weights.
TalentScorecard score_student(const records::StudentRecord& record, const TalentWeights& weights,
                              const CohortScores& cohort);

struct RankedTalent {
  records::PseudonymToken token;
  double score = 0.0;
  const TalentScorecard* card = nullptr;
};

// Filters score >= min_score, sorts score-desc then token-asc, keeps k.
// Scores within a relative 1e-9 of each other compare equal.
// Throws Error(kUnknownCategory) for an unknown label and
// Error(kInvalidArgument) when k < 1 or min_score < 0.
std::vector<RankedTalent> rank_category(std::span<const TalentScorecard> cards, std::string_view category,
                                        std::size_t k, double min_score = 5.0);

// [{token, score, evidence[]}] where evidence holds the entries for the
// ranked category.
nlohmann::json talent_payload(std::span<const RankedTalent> ranked, ActivityCategory category);

}  // namespace dmp::talent
