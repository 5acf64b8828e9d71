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

#include "dmp/predict/features.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "dmp/common/error.h"

namespace dmp::predict {

using records::BehaviorKind;
using records::TermRef;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-term score series for `subject` before `as_of`, oldest first.
std::vector<double> score_series(const records::StudentRecord& record, std::string_view subject,
                                 const TermRef& as_of) {
  std::map<TermRef, std::pair<double, int>> by_term;
  for (const auto& s : record.scores) {
    if (!(s.ref() < as_of)) continue;
    if (subject != kAllSubjects && s.subject != subject) continue;
    auto& [sum, count] = by_term[s.ref()];
    sum += s.score;
    ++count;
  }
  std::vector<double> out;
  out.reserve(by_term.size());
  for (const auto& [ref, acc] : by_term) out.push_back(acc.first / acc.second);
  return out;
}

double ratio_or_nan(int num, int den) {
  return den == 0 ? kNaN : static_cast<double>(num) / den;
}

}  // namespace

FeatureVector extract_features(const records::StudentRecord& record, std::string_view subject,
                               const TermRef& as_of) {
  if (!records::is_valid_term(as_of)) {
    throw Error(ErrorCode::kInvalidArgument, "as_of must name a valid term");
  }
  const auto cutoff = records::term_start(as_of);
  const auto window_start = records::term_start({as_of.year - 1, as_of.term});

  bool any_history = std::any_of(record.scores.begin(), record.scores.end(),
                                 [&](const auto& s) { return s.ref() < as_of; }) ||
                     std::any_of(record.behavior.begin(), record.behavior.end(),
                                 [&](const auto& e) { return e.date < cutoff; });
  if (!any_history) throw Error(ErrorCode::kNoHistory, "no scores or behavior before the requested term");

  FeatureVector fv;
  fv.schema_id = std::string(kFeatureSchemaId);
  fv.values.assign(kFeatureCount, 0.0);
  auto& v = fv.values;

  auto series = score_series(record, subject, as_of);
  if (series.empty()) {
    v[kMeanLast2] = kNaN;
    v[kLastScore] = kNaN;
    v[kMissingMeanLast2] = 1.0;
    v[kMissingLastScore] = 1.0;
  } else {
    std::size_t n = series.size();
    v[kLastScore] = series.back();
    v[kMeanLast2] = n >= 2 ? (series[n - 1] + series[n - 2]) / 2.0 : series.back();
  }

  int attended = 0, absent = 0, submitted = 0, missed = 0, punished = 0, awarded = 0;
  for (const auto& e : record.behavior) {
    if (e.date < window_start || !(e.date < cutoff)) continue;
    switch (e.kind) {
      case BehaviorKind::kAttendance: ++attended; break;
      case BehaviorKind::kAbsence: ++absent; break;
      case BehaviorKind::kHomeworkSubmitted: ++submitted; break;
      case BehaviorKind::kHomeworkMissed: ++missed; break;
      case BehaviorKind::kPunishment: ++punished; break;
      case BehaviorKind::kAward: ++awarded; break;
    }
  }
  v[kAttendanceRate] = ratio_or_nan(attended, attended + absent);
  v[kMissingAttendance] = attended + absent == 0 ? 1.0 : 0.0;
  v[kHomeworkRate] = ratio_or_nan(submitted, submitted + missed);
  v[kMissingHomework] = submitted + missed == 0 ? 1.0 : 0.0;
  v[kPunishments] = punished;
  v[kAwards] = awarded;

  v[kActivityCount] = static_cast<double>(record.activities.size());
  double hours = 0.0;
  for (const auto& a : record.activities) hours += a.hours;
  v[kActivityHours] = hours;
  return fv;
}

std::optional<TermRef> latest_term(const records::StudentRecord& record) {
  std::optional<TermRef> latest;
  auto consider = [&](const TermRef& ref) {
    if (!latest || *latest < ref) latest = ref;
  };
  for (const auto& s : record.scores) consider(s.ref());
  for (const auto& e : record.behavior) consider(records::term_of(e.date));
  return latest;
}

std::optional<double> recent_mean(const records::StudentRecord& record, std::string_view subject,
                                  const TermRef& as_of) {
  auto series = score_series(record, subject, as_of);
  if (series.empty()) return std::nullopt;
  std::size_t n = series.size();
  return n >= 2 ? (series[n - 1] + series[n - 2]) / 2.0 : series.back();
}

std::vector<std::string> subjects_of(const records::StudentRecord& record) {
  std::set<std::string> subjects;
  for (const auto& s : record.scores) subjects.insert(s.subject);
  return {subjects.begin(), subjects.end()};
}

}  // namespace dmp::predict
