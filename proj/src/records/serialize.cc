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

#include "dmp/records/serialize.h"

#include <sstream>

#include "dmp/common/error.h"

namespace dmp::records {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, field + ": " + what);
}

const Json& require(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) bad(key, "missing");
  return *it;
}

template <typename T>
T get_as(const Json& doc, const char* key) {
  try {
    return require(doc, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(key, e.what());
  }
}

Date date_field(const Json& doc, const char* key) {
  auto date = parse_date(get_as<std::string>(doc, key));
  if (!date) bad(key, "not a YYYY-MM-DD date");
  return *date;
}

const Json& array_or_empty(const Json& doc, const char* key) {
  static const Json kEmpty = Json::array();
  auto it = doc.find(key);
  if (it == doc.end()) return kEmpty;
  if (!it->is_array()) bad(key, "must be an array");
  return *it;
}

}  // namespace

Json to_json(const StudentRecord& record) {
  Json doc;
  if (!record.token.empty()) doc["token"] = record.token.str();
  doc["school"] = record.school;
  doc["cohort_year"] = record.cohort_year;

  Json scores = Json::array();
  for (const auto& s : record.scores) {
    scores.push_back({{"subject", s.subject}, {"year", s.year}, {"term", s.term}, {"score", s.score}});
  }
  doc["scores"] = std::move(scores);

  Json behavior = Json::array();
  for (const auto& e : record.behavior) {
    Json item{{"kind", to_string(e.kind)}, {"date", format_date(e.date)}};
    if (e.detail) item["detail"] = *e.detail;
    behavior.push_back(std::move(item));
  }
  doc["behavior"] = std::move(behavior);

  Json activities = Json::array();
  for (const auto& a : record.activities) {
    activities.push_back({{"name", a.name}, {"category", to_string(a.category)}, {"hours", a.hours}});
  }
  doc["activities"] = std::move(activities);

  Json iep = Json::array();
  for (const auto& entry : record.iep) {
    iep.push_back({{"sen_type", entry.sen_type},
                   {"narrative", entry.narrative},
                   {"date", format_date(entry.date)}});
  }
  doc["iep"] = std::move(iep);

  Json electives = Json::array();
  for (const auto& e : record.electives) {
    Json item{{"elective_id", e.elective_id}, {"school", e.school}, {"enrolled", e.enrolled}};
    if (e.rating) item["rating"] = *e.rating;
    electives.push_back(std::move(item));
  }
  doc["electives"] = std::move(electives);

  Json targets = Json::object();
  for (const auto& [subject, grade] : record.target_grades) targets[subject] = grade;
  doc["target_grades"] = std::move(targets);
  return doc;
}

StudentRecord record_from_json(const Json& doc) {
  if (!doc.is_object()) bad("record", "must be a JSON object");
  StudentRecord record;
  if (auto it = doc.find("token"); it != doc.end()) {
    auto token = it->is_string() ? PseudonymToken::from_hex(it->get<std::string>()) : std::nullopt;
    if (!token) bad("token", "must be 64 lowercase hex characters");
    record.token = *token;
  }
  record.school = get_as<std::string>(doc, "school");
  if (doc.contains("cohort_year")) record.cohort_year = get_as<int>(doc, "cohort_year");

  for (const auto& s : array_or_empty(doc, "scores")) {
    record.scores.push_back({get_as<std::string>(s, "subject"), get_as<int>(s, "year"),
                             get_as<int>(s, "term"), get_as<double>(s, "score")});
  }
  for (const auto& e : array_or_empty(doc, "behavior")) {
    auto kind = parse_behavior_kind(get_as<std::string>(e, "kind"));
    if (!kind) bad("behavior.kind", "unknown event kind");
    BehaviorEvent event{*kind, date_field(e, "date"), std::nullopt};
    if (e.contains("detail")) event.detail = get_as<std::string>(e, "detail");
    record.behavior.push_back(std::move(event));
  }
  for (const auto& a : array_or_empty(doc, "activities")) {
    auto category = parse_activity_category(get_as<std::string>(a, "category"));
    if (!category) bad("activities.category", "unknown category");
    record.activities.push_back({get_as<std::string>(a, "name"), *category, get_as<double>(a, "hours")});
  }
  for (const auto& entry : array_or_empty(doc, "iep")) {
    record.iep.push_back({get_as<std::string>(entry, "sen_type"),
                          get_as<std::string>(entry, "narrative"), date_field(entry, "date")});
  }
  for (const auto& e : array_or_empty(doc, "electives")) {
    ElectiveInteraction interaction;
    interaction.elective_id = get_as<std::string>(e, "elective_id");
    interaction.school = e.contains("school") ? get_as<std::string>(e, "school") : record.school;
    interaction.enrolled = e.contains("enrolled") ? get_as<bool>(e, "enrolled") : true;
    if (e.contains("rating") && !e["rating"].is_null()) interaction.rating = get_as<double>(e, "rating");
    record.electives.push_back(std::move(interaction));
  }
  if (auto it = doc.find("target_grades"); it != doc.end()) {
    if (!it->is_object()) bad("target_grades", "must be an object");
    for (const auto& [subject, grade] : it->items()) {
      if (!grade.is_number_integer()) bad("target_grades", "grades must be integers");
      record.target_grades[subject] = grade.get<int>();
    }
  }
  return record;
}

std::string to_jsonl(const std::vector<StudentRecord>& records) {
  std::string out;
  for (const auto& record : records) {
    out += to_json(record).dump();
    out += '\n';
  }
  return out;
}

std::vector<StudentRecord> from_jsonl(const std::string& text) {
  std::vector<StudentRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      bad("jsonl", e.what());
    }
    out.push_back(record_from_json(doc));
  }
  return out;
}

}  // namespace dmp::records
