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
#include <string>
#include <string_view>
#include <vector>

#include "dmp/privacy/pseudonym.h"
#include "dmp/records/records.h"

namespace dmp::privacy {

enum class IngestFormat { kCsv, kJsonl };

// "csv" or "jsonl"; anything else throws Error(kUnsupportedFormat).
IngestFormat parse_ingest_format(std::string_view name);

inline constexpr int kCsvSchemaVersion = 1;

// Column order of CSV schema v1. The header row must match it exactly.
inline constexpr std::array<std::string_view, 17> kCsvColumns{
    "student_id",    "record_type",       "subject",        "year",
    "term",          "score",             "event_kind",     "event_date",
    "activity_name", "activity_category", "activity_hours", "sen_type",
    "narrative",     "elective_id",       "rating",         "target_subject",
    "target_grade"};

std::string csv_header();

// One CSV v1 row. Unused columns stay empty. Record types:
//   student   year = cohort year
//   score     subject, year, term, score
//   behavior  event_kind, event_date, narrative (optional detail)
//   activity  activity_name, activity_category, activity_hours
//   iep       sen_type, narrative, event_date
//   elective  elective_id, rating (optional)
//   target    target_subject, target_grade
using CsvRow = std::array<std::string, kCsvColumns.size()>;

// Quotes fields containing commas or quotes. Throws Error(kInvalidArgument)
// for fields containing line breaks.
std::string format_csv_row(const CsvRow& row);

// A parsed input row (CSV) or document (JSONL) still carrying the raw id.
// `body` has no token yet.
struct RawRecord {
  std::size_t line = 0;
  std::string student_id;
  records::StudentRecord body;
};

struct Reject {
  std::size_t line = 0;
  std::string reason;

  bool operator==(const Reject&) const = default;
};

struct IngestBatch {
  records::SchoolId school;
  std::vector<RawRecord> records;
  std::vector<Reject> rejects;
  int source_format_version = kCsvSchemaVersion;
};

// Total over rows: malformed rows land in `rejects` with 1-based line numbers
// (the CSV header is line 1). Throws Error(kEmptyFile) for zero-byte input
// and Error(kUnsupportedFormat) for an unrecognised CSV header.
IngestBatch parse_batch(std::string_view bytes, IngestFormat format, const records::SchoolId& school);

struct SplitResult {
  std::vector<records::StudentRecord> central;  // sorted by token
  ReidentificationTable local;
};

// Pseudonymizes and merges rows per student. Throws Error(kCollisionDetected)
// when two distinct raw ids yield one token, and Error(kInvalidArgument) when
// a merged record fails validation.
SplitResult split_stores(const IngestBatch& batch, const PseudonymKey& key);

}  // namespace dmp::privacy
