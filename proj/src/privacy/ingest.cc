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

#include "dmp/privacy/ingest.h"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>

#include "dmp/common/error.h"
#include "dmp/records/serialize.h"

namespace dmp::privacy {

using records::StudentRecord;

namespace {

enum Column : std::size_t {
  kStudentId,
  kRecordType,
  kSubject,
  kYear,
  kTerm,
  kScore,
  kEventKind,
  kEventDate,
  kActivityName,
  kActivityCategory,
  kActivityHours,
  kSenType,
  kNarrative,
  kElectiveId,
  kRating,
  kTargetSubject,
  kTargetGrade,
};

// Row-level failure; becomes a Reject.
struct RowError {
  std::string reason;
};

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::string_view> split_lines(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < bytes.size()) {
    auto end = bytes.find('\n', start);
    if (end == std::string_view::npos) end = bytes.size();
    auto line = bytes.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      if (!current.empty() || field_was_quoted) return std::nullopt;
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
      field_was_quoted = false;
    } else {
      if (field_was_quoted) return std::nullopt;
      current.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(current));
  return fields;
}

const std::string& need(const std::vector<std::string>& f, Column col) {
  if (f[col].empty()) throw RowError{"missing " + std::string(kCsvColumns[col])};
  return f[col];
}

int need_int(const std::vector<std::string>& f, Column col) {
  const auto& text = need(f, col);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw RowError{std::string(kCsvColumns[col]) + " is not an integer"};
  }
  return value;
}

double parse_real(const std::string& text, Column col) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw RowError{std::string(kCsvColumns[col]) + " is not a number"};
  }
  return value;
}

records::Date need_date(const std::vector<std::string>& f, Column col) {
  auto date = records::parse_date(need(f, col));
  if (!date) throw RowError{std::string(kCsvColumns[col]) + " is not a YYYY-MM-DD date"};
  return *date;
}

RawRecord parse_csv_row(const std::vector<std::string>& f, const records::SchoolId& school) {
  RawRecord raw;
  raw.student_id = need(f, kStudentId);
  StudentRecord& body = raw.body;
  body.school = school;
  const auto& type = need(f, kRecordType);

  if (type == "student") {
    body.cohort_year = need_int(f, kYear);
  } else if (type == "score") {
    records::TermScore s{need(f, kSubject), need_int(f, kYear), need_int(f, kTerm),
                         parse_real(need(f, kScore), kScore)};
    if (!(s.score >= 0.0 && s.score <= 100.0)) throw RowError{"score out of [0,100]"};
    if (!records::is_valid_term(s.ref())) throw RowError{"term out of range"};
    body.scores.push_back(std::move(s));
  } else if (type == "behavior") {
    auto kind = records::parse_behavior_kind(need(f, kEventKind));
    if (!kind) throw RowError{"unknown event_kind"};
    records::BehaviorEvent event{*kind, need_date(f, kEventDate), std::nullopt};
    if (!f[kNarrative].empty()) event.detail = f[kNarrative];
    body.behavior.push_back(std::move(event));
  } else if (type == "activity") {
    auto category = records::parse_activity_category(need(f, kActivityCategory));
    if (!category) throw RowError{"unknown activity_category"};
    double hours = parse_real(need(f, kActivityHours), kActivityHours);
    if (hours < 0.0) throw RowError{"activity_hours must be >= 0"};
    body.activities.push_back({need(f, kActivityName), *category, hours});
  } else if (type == "iep") {
    body.iep.push_back({need(f, kSenType), f[kNarrative], need_date(f, kEventDate)});
  } else if (type == "elective") {
    records::ElectiveInteraction e{need(f, kElectiveId), school, true, std::nullopt};
    if (!f[kRating].empty()) {
      double rating = parse_real(f[kRating], kRating);
      if (rating < 0.0 || rating > 1.0) throw RowError{"rating out of [0,1]"};
      e.rating = rating;
    }
    body.electives.push_back(std::move(e));
  } else if (type == "target") {
    int grade = need_int(f, kTargetGrade);
    if (grade < records::kMinGrade || grade > records::kMaxGrade) throw RowError{"target_grade out of [0,7]"};
    body.target_grades[need(f, kTargetSubject)] = grade;
  } else {
    throw RowError{"unknown record_type '" + type + "'"};
  }
  return raw;
}

void parse_csv(std::string_view bytes, IngestBatch& batch) {
  auto lines = split_lines(bytes);
  if (lines.empty() || lines.front() != csv_header()) {
    throw Error(ErrorCode::kUnsupportedFormat, "CSV header does not match schema v1");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t line_no = i + 1;
    auto line = lines[i];
    if (line.empty()) continue;
    if (!valid_utf8(line)) {
      batch.rejects.push_back({line_no, "invalid UTF-8"});
      continue;
    }
    auto fields = split_csv(line);
    if (!fields) {
      batch.rejects.push_back({line_no, "unbalanced quotes"});
      continue;
    }
    if (fields->size() != kCsvColumns.size()) {
      batch.rejects.push_back({line_no, "expected " + std::to_string(kCsvColumns.size()) +
                                            " columns, found " + std::to_string(fields->size())});
      continue;
    }
    try {
      auto raw = parse_csv_row(*fields, batch.school);
      raw.line = line_no;
      batch.records.push_back(std::move(raw));
    } catch (const RowError& e) {
      batch.rejects.push_back({line_no, e.reason});
    }
  }
}

void parse_jsonl(std::string_view bytes, IngestBatch& batch) {
  auto lines = split_lines(bytes);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t line_no = i + 1;
    auto line = lines[i];
    if (line.empty()) continue;
    if (!valid_utf8(line)) {
      batch.rejects.push_back({line_no, "invalid UTF-8"});
      continue;
    }
    try {
      auto doc = records::Json::parse(line);
      if (!doc.is_object()) throw RowError{"line is not a JSON object"};
      auto id = doc.find("student_id");
      if (id == doc.end() || !id->is_string() || id->get<std::string>().empty()) {
        throw RowError{"missing student_id"};
      }
      if (doc.contains("token")) throw RowError{"ingest rows must not carry a token"};
      if (!doc.contains("school")) doc["school"] = batch.school;
      RawRecord raw;
      raw.line = line_no;
      raw.student_id = id->get<std::string>();
      raw.body = records::record_from_json(doc);
      if (raw.body.school != batch.school) throw RowError{"row belongs to school " + raw.body.school};
      for (const auto& v : records::validate_record(raw.body)) {
        if (v.field == "StudentRecord.token") continue;
        throw RowError{v.field + " " + v.rule};
      }
      batch.records.push_back(std::move(raw));
    } catch (const RowError& e) {
      batch.rejects.push_back({line_no, e.reason});
    } catch (const records::Json::exception& e) {
      batch.rejects.push_back({line_no, std::string("malformed JSON: ") + e.what()});
    } catch (const Error& e) {
      batch.rejects.push_back({line_no, e.what()});
    }
  }
}

}  // namespace

IngestFormat parse_ingest_format(std::string_view name) {
  if (name == "csv" || name == "CSV") return IngestFormat::kCsv;
  if (name == "jsonl" || name == "JSONL") return IngestFormat::kJsonl;
  throw Error(ErrorCode::kUnsupportedFormat, "unknown ingest format '" + std::string(name) + "'");
}

std::string csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  return out;
}

std::string format_csv_row(const CsvRow& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const auto& field = row[i];
    if (field.find_first_of("\r\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "CSV fields cannot contain line breaks");
    }
    if (i) out += ',';
    if (field.find_first_of(",\"") == std::string::npos) {
      out += field;
      continue;
    }
    out += '"';
    for (char c : field) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
  }
  return out;
}

IngestBatch parse_batch(std::string_view bytes, IngestFormat format, const records::SchoolId& school) {
  if (bytes.empty()) throw Error(ErrorCode::kEmptyFile, "ingest file is empty");
  if (school.empty()) throw Error(ErrorCode::kInvalidArgument, "school id must be non-empty");
  IngestBatch batch;
  batch.school = school;
  batch.source_format_version = kCsvSchemaVersion;
  if (format == IngestFormat::kCsv) {
    parse_csv(bytes, batch);
  } else {
    parse_jsonl(bytes, batch);
  }
  return batch;
}

SplitResult split_stores(const IngestBatch& batch, const PseudonymKey& key) {
  SplitResult out;
  std::map<std::string, records::PseudonymToken> tokens;
  std::map<records::PseudonymToken, std::vector<StudentRecord>> parts;
  for (const auto& raw : batch.records) {
    auto known = tokens.find(raw.student_id);
    if (known == tokens.end()) {
      records::StudentId id{batch.school, raw.student_id};
      known = tokens.emplace(raw.student_id, pseudonymize(id, key)).first;
      out.local.insert(known->second, id);
    }
    StudentRecord body = raw.body;
    body.token = known->second;
    body.school = batch.school;
    parts[known->second].push_back(std::move(body));
  }
  std::map<records::PseudonymToken, StudentRecord> merged;
  for (const auto& [token, list] : parts) merged.emplace(token, records::merge_all(list));
  out.central.reserve(merged.size());
  for (auto& [token, record] : merged) {
    auto violations = records::validate_record(record);
    if (!violations.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "merged record fails validation: " + violations.front().field + " " +
                      violations.front().rule);
    }
    out.central.push_back(std::move(record));
  }
  return out;
}

}  // namespace dmp::privacy
