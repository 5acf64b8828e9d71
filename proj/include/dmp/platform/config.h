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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmp/ews/alerts.h"
#include "dmp/fed/federation.h"
#include "dmp/predict/models.h"
#include "json.hpp"

namespace dmp::platform {

// Parses the TOML subset used by config files: `[section]` headers,
// `key = value` with strings, numbers, booleans and flat arrays, and `#`
// comments. Returns {section: {key: value}} with top-level keys at the root.
// Throws Error(kInvalidConfig) naming the line.
nlohmann::json parse_toml(std::string_view text);

struct PlatformConfig {
  std::filesystem::path data_dir = "dmp-data";
  std::string listen = "127.0.0.1:8080";
  std::filesystem::path key_file = "dmp-data/pseudonym.key";
  std::filesystem::path resources_dir;  // lexicon, phrase rules, talent weights

  double ridge_lambda = 1.0;
  double logistic_lambda = 0.01;
  std::vector<double> exam_bins = predict::default_exam_bins();
  predict::RiskLabelRule risk_rule{};

  std::optional<ews::AlertConfig> ews_defaults;
  fed::FederationConfig federation = fed::FederationConfig::defaults();

  // Relative paths resolve against `base`. Throws Error(kInvalidConfig).
  static PlatformConfig from_toml(std::string_view text, const std::filesystem::path& base = {});
  static PlatformConfig load(const std::filesystem::path& path);
  // Defaults rooted at data_dir.
  static PlatformConfig for_data_dir(const std::filesystem::path& data_dir);

  // Throws Error(kInvalidConfig) when a parameter breaks a module precondition.
  void validate() const;
};

// Directory holding the checked-in resource files.
std::filesystem::path default_resources_dir();

}  // namespace dmp::platform
