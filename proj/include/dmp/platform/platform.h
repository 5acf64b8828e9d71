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

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dmp/ews/alerts.h"
#include "dmp/fed/federation.h"
#include "dmp/iep/analytics.h"
#include "dmp/platform/config.h"
#include "dmp/platform/store.h"
#include "dmp/predict/models.h"
#include "dmp/privacy/ingest.h"
#include "dmp/records/records.h"
#include "dmp/talent/talent.h"
#include "json.hpp"

namespace dmp::platform {

// IEP and talent resources loaded from the resource directory.
struct Resources {
  iep::PosLexicon lexicon;
  iep::PhraseRules phrase_rules = iep::PhraseRules::defaults();
  std::set<std::string, std::less<>> stopwords;
  talent::TalentWeights talent_weights = talent::TalentWeights::defaults();

  // Missing files fall back to built-in defaults; malformed files throw.
  static Resources load(const std::filesystem::path& dir);
};

// Reads the 64-hex-character key file. Throws Error(kIo) when unreadable.
privacy::PseudonymKey load_key(const std::filesystem::path& path);
// Writes a fresh key; refuses to overwrite. Throws Error(kIo).
privacy::PseudonymKey create_key(const std::filesystem::path& path);

// "<school>-<cohort year>"
std::string class_id(const records::StudentRecord& record);

// Central service state: pseudonymized records, models, alert configs and
// federation runs, persisted as one document per aggregate.
class Platform {
 public:
  explicit Platform(PlatformConfig config);

  const PlatformConfig& config() const { return config_; }

  // Restores persisted state. On Error(kCorruptSnapshot) the in-memory state
  // is left unchanged.
  void load();

  // Parses, pseudonymizes and merges one school file into the central store;
  // the re-identification table goes to the school-local area.
  nlohmann::json ingest(const records::SchoolId& school, std::string_view bytes, privacy::IngestFormat format);

  // kind: inschool | exam | behavior | all. Throws Error(kBusy) while another
  // training run holds the lock and Error(kInvalidArgument) ("no records")
  // on an empty store.
  nlohmann::json train(std::string_view kind);

  // Throws Error(kNotFound) for unknown tokens.
  nlohmann::json predictions(const std::string& token) const;
  ews::AlertFeed student_alerts(const std::string& token, const std::string& teacher) const;
  ews::AlertFeed class_alerts(const std::string& class_id, const std::string& teacher) const;
  ews::AlertFeed all_alerts(const std::string& teacher) const;

  // Returns the new snapshot id; throws Error(kInvalidConfig).
  std::string update_thresholds(const ews::AlertConfig& cfg);

  nlohmann::json wordcloud(std::size_t top_n) const;
  nlohmann::json heatmap() const;
  nlohmann::json talents(std::string_view category, std::size_t k, double min_score) const;

  // Falls back to cold start when the student has no training interactions.
  // Throws Error(kNotFound) for unknown tokens or when no federation ran.
  nlohmann::json recommendations(const std::string& token, std::size_t k) const;

  // Config overrides use the federation config keys. Throws Error(kBusy).
  nlohmann::json run_federation(const nlohmann::json& overrides = nlohmann::json::object());
  nlohmann::json federation_history(const std::string& run_id) const;

  std::vector<records::StudentRecord> records() const;
  std::size_t record_count() const;
  // Start of the term after the latest data, as ISO-8601 UTC.
  std::string generated_at() const;

  const DocumentStore& store() const { return store_; }

 private:
  struct FedState {
    std::string run_id;
    fed::FederationConfig config;
    std::shared_ptr<fed::FederationResult> result;
  };

  void load_unchecked();
  std::vector<records::StudentRecord> records_locked() const;
  const records::StudentRecord* find_locked(const std::string& token) const;
  std::string generated_at_locked() const;
  void reindex_locked();
  void persist_models_locked() const;
  void persist_configs() const;

  PlatformConfig config_;
  DocumentStore store_;
  Resources resources_;

  mutable std::shared_mutex mu_;
  std::map<records::SchoolId, std::vector<records::StudentRecord>> records_;
  std::map<std::string, std::pair<records::SchoolId, std::size_t>> index_;
  predict::ModelSet models_;
  nlohmann::json model_manifest_ = nlohmann::json::object();
  int model_version_ = 0;
  ews::AlertConfigStore configs_;
  std::optional<FedState> fed_;
  int run_counter_ = 0;

  std::mutex ingest_mu_;
  std::mutex train_mu_;
  std::mutex fed_mu_;
};

}  // namespace dmp::platform
