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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmp/records/records.h"

namespace dmp::predict {

inline constexpr std::string_view kFeatureSchemaId = "student-features-v1";

// Pseudo-subject selecting the per-term average across all subjects.
inline constexpr std::string_view kAllSubjects = "*";

// Feature order of kFeatureSchemaId. The last four entries are missingness
// indicators for the four slots that can be imputed.
inline constexpr std::array<std::string_view, 12> kFeatureNames{
    "mean_last2_score",  "last_score",          "attendance_rate",  "homework_rate",
    "punishment_count",  "award_count",         "activity_count",   "activity_hours",
    "missing_mean_last2", "missing_last_score", "missing_attendance", "missing_homework"};

inline constexpr std::size_t kFeatureCount = kFeatureNames.size();

enum FeatureSlot : std::size_t {
  kMeanLast2,
  kLastScore,
  kAttendanceRate,
  kHomeworkRate,
  kPunishments,
  kAwards,
  kActivityCount,
  kActivityHours,
  kMissingMeanLast2,
  kMissingLastScore,
  kMissingAttendance,
  kMissingHomework,
};

// Values in kFeatureNames order. Slots without data hold NaN until imputed
// with the training means of a model; their indicator is then 1.
struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;
};

// Uses only data strictly before the start of term `as_of`: scores of earlier
// terms, behavior events in the trailing year, and all activities.
// Throws Error(kNoHistory) when the student has no scores and no behavior
// events before `as_of`, and Error(kInvalidArgument) for an invalid term.
FeatureVector extract_features(const records::StudentRecord& record, std::string_view subject,
                               const records::TermRef& as_of);

// Latest term with any score or behavior event, if any.
std::optional<records::TermRef> latest_term(const records::StudentRecord& record);

// Mean of the last two actual term scores in `subject` before `as_of`
// (single score when only one exists).
std::optional<double> recent_mean(const records::StudentRecord& record, std::string_view subject,
                                  const records::TermRef& as_of);

// Subjects the record has scores in, sorted.
std::vector<std::string> subjects_of(const records::StudentRecord& record);

}  // namespace dmp::predict
