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

#include "dmp/records/records.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "dmp/common/error.h"

namespace dmp::records {

using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto parse = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && ptr == part.data() + part.size();
  };
  if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) ||
      !parse(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  Date date{year{y}, month{m}, day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return buf;
}

std::optional<PseudonymToken> PseudonymToken::from_hex(std::string_view hex) {
  if (hex.size() != kLength) return std::nullopt;
  for (char c : hex) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) return std::nullopt;
  }
  return PseudonymToken(std::string(hex));
}

TermRef TermRef::next() const {
  if (term >= kTermsPerYear) return {year + 1, 1};
  return {year, term + 1};
}

TermRef TermRef::prev() const {
  if (term <= 1) return {year - 1, kTermsPerYear};
  return {year, term - 1};
}

bool is_valid_term(const TermRef& ref) {
  return ref.term >= 1 && ref.term <= kTermsPerYear;
}

Date term_start(const TermRef& ref) {
  if (ref.term == 1) return Date{year{ref.year}, month{9}, day{1}};
  return Date{year{ref.year + 1}, month{2}, day{1}};
}

TermRef term_of(const Date& date) {
  int y = static_cast<int>(date.year());
  unsigned m = static_cast<unsigned>(date.month());
  if (m >= 9) return {y, 1};
  if (m == 1) return {y - 1, 1};
  return {y - 1, 2};
}

namespace {

constexpr std::array<std::pair<BehaviorKind, std::string_view>, 6> kBehaviorNames{{
    {BehaviorKind::kAttendance, "Attendance"},
    {BehaviorKind::kAbsence, "Absence"},
    {BehaviorKind::kPunishment, "Punishment"},
    {BehaviorKind::kAward, "Award"},
    {BehaviorKind::kHomeworkSubmitted, "HomeworkSubmitted"},
    {BehaviorKind::kHomeworkMissed, "HomeworkMissed"},
}};

constexpr std::array<std::pair<ActivityCategory, std::string_view>, 7> kCategoryNames{{
    {ActivityCategory::kAcademic, "Academic"},
    {ActivityCategory::kSports, "Sports"},
    {ActivityCategory::kArts, "Arts"},
    {ActivityCategory::kLeadership, "Leadership"},
    {ActivityCategory::kService, "Service"},
    {ActivityCategory::kTechnology, "Technology"},
    {ActivityCategory::kOther, "Other"},
}};

template <typename Container>
void sort_unique(Container& items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
}

template <typename T>
void append(std::vector<T>& out, const std::vector<T>& in) {
  out.insert(out.end(), in.begin(), in.end());
}

}  // namespace

std::string_view to_string(BehaviorKind kind) {
  for (const auto& [k, name] : kBehaviorNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

std::optional<BehaviorKind> parse_behavior_kind(std::string_view text) {
  for (const auto& [k, name] : kBehaviorNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

const std::vector<ActivityCategory>& all_activity_categories() {
  static const std::vector<ActivityCategory> kAll = [] {
    std::vector<ActivityCategory> out;
    for (const auto& entry : kCategoryNames) out.push_back(entry.first);
    return out;
  }();
  return kAll;
}

std::string_view to_string(ActivityCategory category) {
  for (const auto& [c, name] : kCategoryNames) {
    if (c == category) return name;
  }
  return "Unknown";
}

std::optional<ActivityCategory> parse_activity_category(std::string_view text) {
  for (const auto& [c, name] : kCategoryNames) {
    if (name == text) return c;
  }
  return std::nullopt;
}

std::vector<Violation> validate_record(const StudentRecord& record) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };

  if (record.token.empty()) add("StudentRecord.token", "token must be present");
  if (record.school.empty()) add("StudentRecord.school", "school must be non-empty");

  std::set<std::tuple<std::string, int, int>> score_keys;
  for (const auto& s : record.scores) {
    if (!(s.score >= 0.0 && s.score <= 100.0)) {
      add("TermScore.score", "out of [0,100]");
    }
    if (s.subject.empty()) add("TermScore.subject", "must be non-empty");
    if (!is_valid_term(s.ref())) add("TermScore.term", "must be within 1.." + std::to_string(kTermsPerYear));
    if (!score_keys.emplace(s.subject, s.year, s.term).second) {
      add("TermScore", "(subject, year, term) must be unique");
    }
  }
  for (const auto& e : record.behavior) {
    if (!e.date.ok()) add("BehaviorEvent.date", "invalid calendar date");
  }
  for (const auto& a : record.activities) {
    if (!(a.hours >= 0.0) || !std::isfinite(a.hours)) {
      add("Activity.hours", "must be finite and >= 0");
    }
  }
  for (const auto& entry : record.iep) {
    if (entry.sen_type.empty()) add("IepEntry.sen_type", "must be non-empty");
    if (!entry.date.ok()) add("IepEntry.date", "invalid calendar date");
  }
  for (const auto& e : record.electives) {
    if (e.elective_id.empty()) add("ElectiveInteraction.elective_id", "must be non-empty");
    if (e.rating && !(*e.rating >= 0.0 && *e.rating <= 1.0)) {
      add("ElectiveInteraction.rating", "out of [0,1]");
    }
    if (!e.enrolled) {
      add("ElectiveInteraction.enrolled", "non-enrolled rows are never ingested");
    }
  }
  for (const auto& [subject, grade] : record.target_grades) {
    if (grade < kMinGrade || grade > kMaxGrade) {
      add("StudentRecord.target_grades", "grade for " + subject + " out of [0,7]");
    }
  }
  return out;
}

void canonicalize(StudentRecord& record) {
  sort_unique(record.scores);
  sort_unique(record.behavior);
  sort_unique(record.activities);
  sort_unique(record.iep);
  sort_unique(record.electives);
}

StudentRecord merge_records(const StudentRecord& a, const StudentRecord& b) {
  if (a.token != b.token || a.school != b.school) {
    throw Error(ErrorCode::kTokenMismatch, "cannot merge records of different students");
  }
  StudentRecord out;
  out.token = a.token;
  out.school = a.school;
  out.cohort_year = b.cohort_year != 0 ? b.cohort_year : a.cohort_year;

  std::set<std::tuple<std::string, int, int>> b_keys;
  for (const auto& s : b.scores) b_keys.emplace(s.subject, s.year, s.term);
  out.scores = b.scores;
  for (const auto& s : a.scores) {
    if (!b_keys.count({s.subject, s.year, s.term})) out.scores.push_back(s);
  }

  out.behavior = a.behavior;
  append(out.behavior, b.behavior);
  out.activities = a.activities;
  append(out.activities, b.activities);
  out.iep = a.iep;
  append(out.iep, b.iep);
  out.electives = a.electives;
  append(out.electives, b.electives);

  out.target_grades = a.target_grades;
  for (const auto& [subject, grade] : b.target_grades) out.target_grades[subject] = grade;

  canonicalize(out);
  return out;
}

StudentRecord merge_all(std::span<const StudentRecord> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to merge");
  for (const auto& r : parts) {
    if (r.token != parts.front().token || r.school != parts.front().school) {
      throw Error(ErrorCode::kTokenMismatch, "cannot merge records of different students");
    }
  }
  StudentRecord out;
  out.token = parts.front().token;
  out.school = parts.front().school;
  std::set<std::tuple<std::string, int, int>> later;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    std::set<std::tuple<std::string, int, int>> mine;
    for (const auto& s : it->scores) {
      mine.emplace(s.subject, s.year, s.term);
      if (!later.count({s.subject, s.year, s.term})) out.scores.push_back(s);
    }
    later.insert(mine.begin(), mine.end());
  }
  for (const auto& r : parts) {
    if (r.cohort_year != 0) out.cohort_year = r.cohort_year;
    append(out.behavior, r.behavior);
    append(out.activities, r.activities);
    append(out.iep, r.iep);
    append(out.electives, r.electives);
    for (const auto& [subject, grade] : r.target_grades) out.target_grades[subject] = grade;
  }
  canonicalize(out);
  return out;
}

}  // namespace dmp::records
