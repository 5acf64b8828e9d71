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

#include "dmp/talent/talent.h"

#include <algorithm>
#include <cmath>
#include <cctype>

#include "dmp/common/error.h"

namespace dmp::talent {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

void set_kind_weight(TalentWeights& w, EvidenceKind kind, double value) {
  if (!(value >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "talent weights must be >= 0");
  switch (kind) {
    case EvidenceKind::kAwardInCategory:
    case EvidenceKind::kActivityHoursInCategory:
      for (auto c : categories()) w.weights[{c, kind}] = value;
      break;
    case EvidenceKind::kSubjectPercentileTop10:
      w.weights[{ActivityCategory::kAcademic, kind}] = value;
      break;
    case EvidenceKind::kLeadershipRole:
      w.weights[{ActivityCategory::kLeadership, kind}] = value;
      break;
  }
}

}  // namespace

const std::vector<ActivityCategory>& categories() { return records::all_activity_categories(); }

std::optional<ActivityCategory> parse_category(std::string_view label) {
  for (auto c : categories()) {
    if (lower(records::to_string(c)) == lower(label)) return c;
  }
  return std::nullopt;
}

std::string_view to_string(EvidenceKind kind) {
  switch (kind) {
    case EvidenceKind::kAwardInCategory: return "AwardInCategory";
    case EvidenceKind::kActivityHoursInCategory: return "ActivityHoursInCategory";
    case EvidenceKind::kSubjectPercentileTop10: return "SubjectPercentileTop10";
    case EvidenceKind::kLeadershipRole: return "LeadershipRole";
  }
  return "Unknown";
}

TalentWeights TalentWeights::defaults() {
  TalentWeights w;
  set_kind_weight(w, EvidenceKind::kAwardInCategory, 3.0);
  set_kind_weight(w, EvidenceKind::kActivityHoursInCategory, 1.0);
  set_kind_weight(w, EvidenceKind::kSubjectPercentileTop10, 5.0);
  set_kind_weight(w, EvidenceKind::kLeadershipRole, 4.0);
  w.award_patterns = {
      {"olympiad", ActivityCategory::kAcademic},   {"science", ActivityCategory::kAcademic},
      {"math", ActivityCategory::kAcademic},       {"debate", ActivityCategory::kAcademic},
      {"athletic", ActivityCategory::kSports},     {"basketball", ActivityCategory::kSports},
      {"football", ActivityCategory::kSports},     {"swimming", ActivityCategory::kSports},
      {"music", ActivityCategory::kArts},          {"art", ActivityCategory::kArts},
      {"drama", ActivityCategory::kArts},          {"leadership", ActivityCategory::kLeadership},
      {"prefect", ActivityCategory::kLeadership},  {"volunteer", ActivityCategory::kService},
      {"community", ActivityCategory::kService},   {"coding", ActivityCategory::kTechnology},
      {"robotics", ActivityCategory::kTechnology}, {"technology", ActivityCategory::kTechnology},
  };
  w.leadership_role_patterns = {"captain", "president", "chair", "prefect", "leader"};
  return w;
}

double TalentWeights::weight(ActivityCategory category, EvidenceKind kind) const {
  auto it = weights.find({category, kind});
  return it == weights.end() ? 0.0 : it->second;
}

TalentWeights TalentWeights::scaled(double c) const {
  TalentWeights out = *this;
  for (auto& [key, value] : out.weights) value *= c;
  return out;
}

TalentWeights TalentWeights::from_json(const nlohmann::json& doc) {
  TalentWeights w = defaults();
  try {
    if (auto it = doc.find("weights"); it != doc.end()) {
      const std::pair<const char*, EvidenceKind> keys[] = {
          {"award", EvidenceKind::kAwardInCategory},
          {"hours_per_10", EvidenceKind::kActivityHoursInCategory},
          {"top_decile", EvidenceKind::kSubjectPercentileTop10},
          {"leadership_role", EvidenceKind::kLeadershipRole},
      };
      for (const auto& [key, kind] : keys) {
        if (it->contains(key)) set_kind_weight(w, kind, it->at(key).get<double>());
      }
    }
    if (auto it = doc.find("award_patterns"); it != doc.end()) {
      w.award_patterns.clear();
      for (const auto& entry : *it) {
        auto category = parse_category(entry.at("category").get<std::string>());
        if (!category) throw Error(ErrorCode::kInvalidArgument, "unknown category in award mapping");
        w.award_patterns.emplace_back(entry.at("pattern").get<std::string>(), *category);
      }
    }
    if (auto it = doc.find("leadership_role_patterns"); it != doc.end()) {
      w.leadership_role_patterns = it->get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed talent config: ") + e.what());
  }
  return w;
}

ActivityCategory award_category(std::string_view award_name, const TalentWeights& weights) {
  for (const auto& [pattern, category] : weights.award_patterns) {
    if (contains_ci(award_name, pattern)) return category;
  }
  return ActivityCategory::kOther;
}

namespace {

std::map<std::string, double> subject_means(const records::StudentRecord& record) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& s : record.scores) {
    auto& [sum, n] = acc[s.subject];
    sum += s.score;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [subject, a] : acc) out[subject] = a.first / a.second;
  return out;
}

}  // namespace

CohortScores build_cohort(std::span<const records::StudentRecord> cohort) {
  CohortScores out;
  for (const auto& record : cohort) {
    for (const auto& [subject, mean] : subject_means(record)) out.by_subject[subject].push_back(mean);
  }
  for (auto& [subject, values] : out.by_subject) std::sort(values.begin(), values.end());
  return out;
}

bool in_top_decile(double value, const std::vector<double>& sorted_cohort) {
  if (sorted_cohort.empty()) return false;
  auto higher = sorted_cohort.end() - std::upper_bound(sorted_cohort.begin(), sorted_cohort.end(), value);
  return static_cast<double>(higher) < 0.1 * static_cast<double>(sorted_cohort.size());
}

TalentScorecard score_student(const records::StudentRecord& record, const TalentWeights& weights,
                              const CohortScores& cohort) {
  for (const auto& [key, value] : weights.weights) {
    if (!(value >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "talent weights must be >= 0");
  }
  TalentScorecard card;
  card.token = record.token;
  for (auto c : categories()) card.scores[c] = 0.0;
  auto add = [&](ActivityCategory category, EvidenceKind kind, std::string detail, double contribution) {
    card.scores[category] += contribution;
    card.evidence.push_back({category, kind, std::move(detail), contribution});
  };

  for (const auto& event : record.behavior) {
    if (event.kind != records::BehaviorKind::kAward) continue;
    std::string name = event.detail.value_or("");
    auto category = award_category(name, weights);
    add(category, EvidenceKind::kAwardInCategory, name, weights.weight(category, EvidenceKind::kAwardInCategory));
  }
  for (const auto& activity : record.activities) {
    add(activity.category, EvidenceKind::kActivityHoursInCategory, activity.name,
        weights.weight(activity.category, EvidenceKind::kActivityHoursInCategory) * (activity.hours / 10.0));
    if (activity.category == ActivityCategory::kLeadership) {
      bool role = std::any_of(weights.leadership_role_patterns.begin(), weights.leadership_role_patterns.end(),
                              [&](const auto& p) { return contains_ci(activity.name, p); });
      if (role) {
        add(ActivityCategory::kLeadership, EvidenceKind::kLeadershipRole, activity.name,
            weights.weight(ActivityCategory::kLeadership, EvidenceKind::kLeadershipRole));
      }
    }
  }
  for (const auto& [subject, mean] : subject_means(record)) {
    auto it = cohort.by_subject.find(subject);
    if (it != cohort.by_subject.end() && in_top_decile(mean, it->second)) {
      add(ActivityCategory::kAcademic, EvidenceKind::kSubjectPercentileTop10, subject,
          weights.weight(ActivityCategory::kAcademic, EvidenceKind::kSubjectPercentileTop10));
    }
  }
  return card;
}

namespace {

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

std::vector<RankedTalent> rank_category(std::span<const TalentScorecard> cards, std::string_view category,
                                        std::size_t k, double min_score) {
  auto parsed = parse_category(category);
  if (!parsed) throw Error(ErrorCode::kUnknownCategory, "unknown talent category '" + std::string(category) + "'");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(min_score >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "min_score must be >= 0");
  std::vector<RankedTalent> ranked;
  for (const auto& card : cards) {
    double score = card.scores.at(*parsed);
    if (score >= min_score || near(score, min_score)) ranked.push_back({card.token, score, &card});
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.token < b.token;
  });
  // Scores that differ only by summation rounding tie; ties go by token.
  for (std::size_t i = 0; i < ranked.size();) {
    std::size_t j = i + 1;
    while (j < ranked.size() && near(ranked[j].score, ranked[i].score)) ++j;
    std::sort(ranked.begin() + static_cast<std::ptrdiff_t>(i), ranked.begin() + static_cast<std::ptrdiff_t>(j),
              [](const auto& a, const auto& b) { return a.token < b.token; });
    i = j;
  }
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

nlohmann::json talent_payload(std::span<const RankedTalent> ranked, ActivityCategory category) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : ranked) {
    nlohmann::json evidence = nlohmann::json::array();
    if (r.card) {
      for (const auto& e : r.card->evidence) {
        if (e.category != category) continue;
        evidence.push_back({{"kind", to_string(e.kind)}, {"detail", e.detail}, {"contribution", e.contribution}});
      }
    }
    out.push_back({{"token", r.token.str()}, {"score", r.score}, {"evidence", std::move(evidence)}});
  }
  return out;
}

}  // namespace dmp::talent
