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

#include <chrono>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dmp::records {

using SchoolId = std::string;
using Date = std::chrono::year_month_day;

// Parses "YYYY-MM-DD". Returns nullopt for anything that is not a valid
// calendar date.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

// School-issued identity. Only ever stored in the school-local table.
struct StudentId {
  SchoolId school;
  std::string raw_id;

  auto operator<=>(const StudentId&) const = default;
};

// 64 lowercase hex characters. Constructed by privacy::pseudonymize, or
// restored from a serialized record through from_hex.
class PseudonymToken {
 public:
  static constexpr std::size_t kLength = 64;

  PseudonymToken() = default;

  static std::optional<PseudonymToken> from_hex(std::string_view hex);

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  auto operator<=>(const PseudonymToken&) const = default;

 private:
  explicit PseudonymToken(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

inline constexpr int kTermsPerYear = 2;

// Academic year `year` runs from September of `year` to August of year + 1.
// Term 1 covers Sep-Jan, term 2 covers Feb-Aug.
struct TermRef {
  int year = 0;
  int term = 1;

  auto operator<=>(const TermRef&) const = default;

  TermRef next() const;
  TermRef prev() const;
};

Date term_start(const TermRef& ref);
TermRef term_of(const Date& date);
bool is_valid_term(const TermRef& ref);

struct TermScore {
  std::string subject;
  int year = 0;
  int term = 1;
  double score = 0.0;

  TermRef ref() const { return {year, term}; }
  auto operator<=>(const TermScore&) const = default;
};

enum class BehaviorKind {
  kAttendance,
  kAbsence,
  kPunishment,
  kAward,
  kHomeworkSubmitted,
  kHomeworkMissed,
};

std::string_view to_string(BehaviorKind kind);
std::optional<BehaviorKind> parse_behavior_kind(std::string_view text);

struct BehaviorEvent {
  BehaviorKind kind = BehaviorKind::kAttendance;
  Date date;
  std::optional<std::string> detail;

  auto operator<=>(const BehaviorEvent&) const = default;
};

enum class ActivityCategory {
  kAcademic,
  kSports,
  kArts,
  kLeadership,
  kService,
  kTechnology,
  kOther,
};

inline constexpr std::size_t kActivityCategoryCount = 7;

// All seven categories in canonical order.
const std::vector<ActivityCategory>& all_activity_categories();
std::string_view to_string(ActivityCategory category);
std::optional<ActivityCategory> parse_activity_category(std::string_view text);

struct Activity {
  std::string name;
  ActivityCategory category = ActivityCategory::kOther;
  double hours = 0.0;

  auto operator<=>(const Activity&) const = default;
};

struct IepEntry {
  std::string sen_type;
  std::string narrative;
  Date date;

  auto operator<=>(const IepEntry&) const = default;
};

struct ElectiveInteraction {
  std::string elective_id;
  SchoolId school;
  bool enrolled = true;
  std::optional<double> rating;

  auto operator<=>(const ElectiveInteraction&) const = default;
};

// Exam grade bands run 0 (unclassified) through 7 (top band).
inline constexpr int kMinGrade = 0;
inline constexpr int kMaxGrade = 7;

struct StudentRecord {
  PseudonymToken token;
  SchoolId school;
  int cohort_year = 0;
  std::vector<TermScore> scores;
  std::vector<BehaviorEvent> behavior;
  std::vector<Activity> activities;
  std::vector<IepEntry> iep;
  std::vector<ElectiveInteraction> electives;
  std::map<std::string, int> target_grades;

  bool operator==(const StudentRecord&) const = default;
};

struct Violation {
  std::string field;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_record(const StudentRecord& record);

// Set union of the list fields in canonical (sorted) order. Entries from `b`
// win on key collisions: target grades by subject, term scores by
// (subject, year, term). Throws TokenMismatch when the records describe
// different students.
StudentRecord merge_records(const StudentRecord& a, const StudentRecord& b);

// Same result as folding merge_records left to right over parts.
StudentRecord merge_all(std::span<const StudentRecord> parts);

// Sorts and deduplicates every list field in place.
void canonicalize(StudentRecord& record);

}  // namespace dmp::records
