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

#include "dmp/predict/datasets.h"

#include <map>
#include <set>

#include "dmp/common/error.h"

namespace dmp::predict {

using records::TermRef;

std::vector<RegressionRow> inschool_rows(std::span<const records::StudentRecord> records,
                                         const std::string& subject) {
  std::vector<RegressionRow> rows;
  for (const auto& record : records) {
    for (const auto& s : record.scores) {
      if (s.subject != subject) continue;
      try {
        rows.push_back({extract_features(record, subject, s.ref()), s.score});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoHistory) throw;
      }
    }
  }
  return rows;
}

std::vector<RegressionRow> exam_rows(std::span<const records::StudentRecord> records,
                                     const std::string& subject) {
  std::vector<RegressionRow> rows;
  for (const auto& record : records) {
    std::set<int> years;
    for (const auto& s : record.scores) years.insert(s.year);
    if (static_cast<int>(years.size()) < kExamMinYears) continue;
    const int final_year = *years.rbegin();
    double sum = 0.0;
    int count = 0;
    for (const auto& s : record.scores) {
      if (s.subject == subject && s.year == final_year) {
        sum += s.score;
        ++count;
      }
    }
    if (count == 0) continue;
    try {
      rows.push_back({extract_features(record, subject, TermRef{final_year, 1}), sum / count});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoHistory) throw;
    }
  }
  return rows;
}

std::vector<ClassificationRow> behavior_rows(std::span<const records::StudentRecord> records,
                                             const RiskLabelRule& rule) {
  std::vector<ClassificationRow> rows;
  for (const auto& record : records) {
    std::set<TermRef> terms;
    for (const auto& s : record.scores) terms.insert(s.ref());
    for (const auto& e : record.behavior) terms.insert(records::term_of(e.date));
    for (const auto& term : terms) {
      try {
        auto features = extract_features(record, kAllSubjects, term);
        rows.push_back({std::move(features), label_risk(record, rule, term)});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoHistory) throw;
      }
    }
  }
  return rows;
}

}  // namespace dmp::predict
