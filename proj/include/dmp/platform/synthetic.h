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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dmp/records/records.h"

namespace dmp::platform {

struct SyntheticDatasetSpec {
  int schools = 4;
  int students_per_school = 125;
  int subjects = 8;
  int terms = 6;
  int electives = 24;
  int cohort_year = 2021;
  std::uint64_t seed = 7;
};

// Throws Error(kInvalidArgument) outside the supported ranges.
void validate_spec(const SyntheticDatasetSpec& spec);

std::vector<records::SchoolId> synthetic_school_ids(const SyntheticDatasetSpec& spec);
std::vector<std::string> synthetic_subjects(const SyntheticDatasetSpec& spec);

// Elective catalog: id -> interest group, and the electives each school
// offers. A quarter of the catalog is exclusive to a single school.
struct ElectiveCatalog {
  std::map<std::string, int> group;
  std::map<records::SchoolId, std::vector<std::string>> offered;
};

ElectiveCatalog synthetic_catalog(const SyntheticDatasetSpec& spec);

// CSV v1 ingest file per school. Pure function of the spec (seed included).
std::map<records::SchoolId, std::string> generate_synthetic(const SyntheticDatasetSpec& spec);

}  // namespace dmp::platform
