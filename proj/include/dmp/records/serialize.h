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

#include <string>
#include <vector>

#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::records {

using Json = nlohmann::json;

// Field layout shared by the central JSONL store and the JSONL ingest format.
// The token field is omitted when the token is empty.
Json to_json(const StudentRecord& record);

// Throws Error(kInvalidArgument) naming the offending field.
StudentRecord record_from_json(const Json& doc);

// One compact JSON document per line, records in the given order.
std::string to_jsonl(const std::vector<StudentRecord>& records);
std::vector<StudentRecord> from_jsonl(const std::string& text);

}  // namespace dmp::records
