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

#include <span>
#include <string>
#include <vector>

#include "dmp/predict/models.h"

namespace dmp::predict {

// In-school rows for one subject: every term score becomes a target, with
// features taken as of the start of that term. Rows without any prior
// history are skipped.
std::vector<RegressionRow> inschool_rows(std::span<const records::StudentRecord> records,
                                         const std::string& subject);

// Minimum number of distinct academic years before a student contributes to
// exam models.
inline constexpr int kExamMinYears = 3;

// Exam rows for one subject: students with scores in at least kExamMinYears
// academic years; target is the mean subject score of the final year,
// features are taken as of the first term of that year.
std::vector<RegressionRow> exam_rows(std::span<const records::StudentRecord> records,
                                     const std::string& subject);

// Behavior rows: one row per (student, term) after the first term with data,
// features over all subjects as of that term and label_risk for it.
std::vector<ClassificationRow> behavior_rows(std::span<const records::StudentRecord> records,
                                             const RiskLabelRule& rule);

}  // namespace dmp::predict
