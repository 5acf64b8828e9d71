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

#include "dmp/platform/platform.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "dmp/common/error.h"
#include "dmp/common/files.h"
#include "dmp/predict/datasets.h"
#include "dmp/predict/features.h"
#include "dmp/privacy/pseudonym.h"
#include "dmp/records/serialize.h"

namespace dmp::platform {

namespace {

using records::StudentRecord;

std::string read_optional(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return files::read_all(path);
}

// Students whose token starts with c-f form the metrics holdout.
bool in_metrics_holdout(const StudentRecord& r) {
  char c = r.token.str().empty() ? '0' : r.token.str().front();
  return c >= 'c' && c <= 'f';
}

nlohmann::json metrics_json(const predict::RegressionMetrics& m) { return {{"rmse", m.rmse}, {"mae", m.mae}}; }

nlohmann::json metrics_json(const predict::ClassificationMetrics& m) {
  return {{"accuracy", m.accuracy}, {"auc", m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr)}};
}

std::string iso_date(const records::Date& d) { return records::format_date(d) + "T00:00:00Z"; }

std::vector<std::string> all_subjects(std::span<const StudentRecord> records) {
  std::set<std::string> subjects;
  for (const auto& r : records) {
    for (const auto& s : r.scores) subjects.insert(s.subject);
  }
  return {subjects.begin(), subjects.end()};
}

}  // namespace

Resources Resources::load(const std::filesystem::path& dir) {
  Resources r;
  auto lexicon = read_optional(dir / "iep" / "lexicon.tsv");
  auto suffixes = read_optional(dir / "iep" / "suffixes.tsv");
  r.lexicon = iep::PosLexicon::from_tsv(lexicon, suffixes);
  if (auto rules = read_optional(dir / "iep" / "phrase_rules.json"); !rules.empty()) {
    r.phrase_rules = iep::PhraseRules::from_json(nlohmann::json::parse(rules));
  }
  auto stop = read_optional(dir / "iep" / "stopwords.txt");
  std::size_t start = 0;
  while (start < stop.size()) {
    auto end = stop.find('\n', start);
    if (end == std::string::npos) end = stop.size();
    std::string word = stop.substr(start, end - start);
    if (!word.empty() && word.back() == '\r') word.pop_back();
    if (!word.empty() && word.front() != '#') r.stopwords.insert(word);
    start = end + 1;
  }
  if (auto weights = read_optional(dir / "talent" / "weights.json"); !weights.empty()) {
    r.talent_weights = talent::TalentWeights::from_json(nlohmann::json::parse(weights));
  }
  return r;
}

privacy::PseudonymKey load_key(const std::filesystem::path& path) {
  auto text = files::read_all(path);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  try {
    return privacy::PseudonymKey::from_hex(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kIo, "key file " + path.string() + " is malformed: " + e.what());
  }
}

privacy::PseudonymKey create_key(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) throw Error(ErrorCode::kIo, "refusing to overwrite " + path.string());
  auto key = privacy::PseudonymKey::generate();
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  files::write_atomic(path, key.hex() + "\n");
  return key;
}

std::string class_id(const StudentRecord& record) {
  return record.school + "-" + std::to_string(record.cohort_year);
}

Platform::Platform(PlatformConfig config)
    : config_(std::move(config)), store_(config_.data_dir), resources_(Resources::load(config_.resources_dir)) {
  config_.validate();
  models_.exam_bins = config_.exam_bins;
  if (config_.ews_defaults) {
    auto cfg = *config_.ews_defaults;
    cfg.scope = {};
    configs_.update_config(cfg);
  }
}

void Platform::load() {
  try {
    load_unchecked();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptSnapshot, std::string("unreadable snapshot: ") + e.what());
  }
}

void Platform::load_unchecked() {
  // Read and verify everything before touching live state.
  std::map<records::SchoolId, std::vector<StudentRecord>> records;
  for (const auto& name : store_.list("records")) {
    auto school = std::filesystem::path(name).stem().string();
    records[school] = records::from_jsonl(store_.get(name));
  }
  predict::ModelSet models;
  models.exam_bins = config_.exam_bins;
  nlohmann::json manifest = nlohmann::json::object();
  int model_version = 0;
  if (store_.exists("models/manifest.json")) {
    manifest = nlohmann::json::parse(store_.get("models/manifest.json"));
    model_version = manifest.value("version", 0);
    if (manifest.contains("exam_bins")) models.exam_bins = manifest["exam_bins"].get<std::vector<double>>();
    if (store_.exists("models/inschool.json")) {
      for (const auto& entry : nlohmann::json::parse(store_.get("models/inschool.json"))) {
        models.inschool[{entry.at("school").get<std::string>(), entry.at("subject").get<std::string>()}] =
            predict::linear_model_from_json(entry.at("model"));
      }
    }
    if (store_.exists("models/exam.json")) {
      auto exam = nlohmann::json::parse(store_.get("models/exam.json"));
      for (const auto& [subject, model] : exam.items()) {
        models.exam[subject] = predict::linear_model_from_json(model);
      }
    }
    if (store_.exists("models/behavior.json")) {
      models.behavior = predict::logistic_model_from_json(nlohmann::json::parse(store_.get("models/behavior.json")));
    }
  }
  std::optional<nlohmann::json> configs;
  if (store_.exists("configs/alert_configs.json")) configs = nlohmann::json::parse(store_.get("configs/alert_configs.json"));

  std::optional<FedState> fed;
  int run_counter = 0;
  if (store_.exists("federation/latest.json")) {
    auto latest = nlohmann::json::parse(store_.get("federation/latest.json"));
    run_counter = latest.value("run_counter", 0);
    FedState state;
    state.run_id = latest.at("run_id").get<std::string>();
    state.config = fed::federation_config_from_json(latest.at("config"));
    auto result = std::make_shared<fed::FederationResult>();
    result->factors = fed::item_factors_from_json(latest.at("factors"));
    result->popularity = latest.at("popularity").get<fed::Popularity>();
    result->aborted = latest.value("aborted", false);
    std::vector<StudentRecord> all;
    for (const auto& [school, list] : records) all.insert(all.end(), list.begin(), list.end());
    auto holdout = fed::choose_holdout(all, state.config.seed);
    auto training = fed::without_holdout(all, holdout);
    auto catalogs = fed::offered_catalogs(all);
    for (const auto& school : latest.at("schools").get<std::vector<std::string>>()) {
      fed::SchoolNode node(school, training, catalogs[school], state.config.d, state.config.seed);
      node.restore_private_state(nlohmann::json::parse(store_.get("local/" + school + ".fed.json")));
      result->nodes.push_back(std::move(node));
    }
    auto history = nlohmann::json::parse(store_.get("federation/" + state.run_id + ".json"));
    for (const auto& r : history.at("rounds")) {
      fed::RoundRecord rec{r.at("round").get<int>(), r.at("version").get<int>(), std::nullopt,
                           r.at("factors_digest").get<std::string>()};
      if (!r.at("hit_rate_at_k").is_null()) rec.hit_rate = r.at("hit_rate_at_k").get<double>();
      result->history.push_back(rec);
    }
    state.result = std::move(result);
    fed = std::move(state);
  }

  std::unique_lock lock(mu_);
  if (configs) configs_.restore(*configs);
  records_ = std::move(records);
  models_ = std::move(models);
  model_manifest_ = std::move(manifest);
  model_version_ = model_version;
  fed_ = std::move(fed);
  run_counter_ = run_counter;
  reindex_locked();
}

void Platform::reindex_locked() {
  index_.clear();
  for (const auto& [school, list] : records_) {
    for (std::size_t i = 0; i < list.size(); ++i) index_[list[i].token.str()] = {school, i};
  }
}

const StudentRecord* Platform::find_locked(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return nullptr;
  return &records_.at(it->second.first)[it->second.second];
}

std::vector<StudentRecord> Platform::records_locked() const {
  std::vector<StudentRecord> out;
  for (const auto& [school, list] : records_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

std::vector<StudentRecord> Platform::records() const {
  std::shared_lock lock(mu_);
  return records_locked();
}

std::size_t Platform::record_count() const {
  std::shared_lock lock(mu_);
  return index_.size();
}

std::string Platform::generated_at_locked() const {
  std::optional<records::TermRef> latest;
  for (const auto& [school, list] : records_) {
    for (const auto& r : list) {
      auto t = predict::latest_term(r);
      if (t && (!latest || *latest < *t)) latest = t;
    }
  }
  if (!latest) return "1970-01-01T00:00:00Z";
  return iso_date(records::term_start(latest->next()));
}

std::string Platform::generated_at() const {
  std::shared_lock lock(mu_);
  return generated_at_locked();
}

nlohmann::json Platform::ingest(const records::SchoolId& school, std::string_view bytes,
                                privacy::IngestFormat format) {
  if (school.empty()) throw Error(ErrorCode::kInvalidArgument, "school id required");
  std::lock_guard ingest_lock(ingest_mu_);
  auto key = load_key(config_.key_file);
  auto batch = privacy::parse_batch(bytes, format, school);
  auto split = privacy::split_stores(batch, key);

  // School-local table: merge with what is already there.
  const std::string table_name = "local/" + school + ".dmpl";
  privacy::ReidentificationTable table;
  if (store_.exists(table_name)) {
    auto raw = store_.get_raw(table_name);
    table = privacy::decrypt_table(crypto::as_bytes(raw), key);
  }
  for (const auto& [token, id] : split.local.entries()) {
    auto existing = table.lookup(token);
    if (existing) {
      if (!(*existing == id)) throw Error(ErrorCode::kCollisionDetected, "token already bound to another student");
      continue;
    }
    table.insert(token, id);
  }

  std::vector<StudentRecord> merged;
  {
    std::shared_lock lock(mu_);
    if (auto it = records_.find(school); it != records_.end()) merged = it->second;
  }
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < merged.size(); ++i) pos[merged[i].token.str()] = i;
  for (const auto& r : split.central) {
    auto it = pos.find(r.token.str());
    if (it == pos.end()) {
      pos[r.token.str()] = merged.size();
      merged.push_back(r);
    } else {
      merged[it->second] = records::merge_records(merged[it->second], r);
    }
  }
  std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.token < b.token; });

  auto sealed = privacy::encrypt_table(table, key);
  store_.put_raw(table_name, std::string(sealed.begin(), sealed.end()));
  store_.put("records/" + school + ".jsonl", records::to_jsonl(merged));
  {
    std::unique_lock lock(mu_);
    records_[school] = std::move(merged);
    reindex_locked();
  }
  nlohmann::json rejects = nlohmann::json::array();
  for (const auto& r : batch.rejects) rejects.push_back({{"line", r.line}, {"reason", r.reason}});
  return {{"school", school},
          {"rows_accepted", batch.records.size()},
          {"students", split.central.size()},
          {"rejects", std::move(rejects)}};
}

nlohmann::json Platform::train(std::string_view kind) {
  std::unique_lock train_lock(train_mu_, std::try_to_lock);
  if (!train_lock.owns_lock()) throw Error(ErrorCode::kBusy, "training already in progress");
  bool inschool = kind == "inschool" || kind == "all";
  bool exam = kind == "exam" || kind == "all";
  bool behavior = kind == "behavior" || kind == "all";
  if (!inschool && !exam && !behavior) {
    throw Error(ErrorCode::kInvalidArgument, "kind must be inschool, exam, behavior or all");
  }
  std::map<records::SchoolId, std::vector<StudentRecord>> by_school;
  {
    std::shared_lock lock(mu_);
    by_school = records_;
  }
  std::vector<StudentRecord> all;
  for (const auto& [school, list] : by_school) all.insert(all.end(), list.begin(), list.end());
  if (all.empty()) throw Error(ErrorCode::kInvalidArgument, "no records");

  auto split = [](std::span<const StudentRecord> records) {
    std::pair<std::vector<StudentRecord>, std::vector<StudentRecord>> out;
    for (const auto& r : records) (in_metrics_holdout(r) ? out.second : out.first).push_back(r);
    return out;
  };

  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json warnings = nlohmann::json::array();
  std::map<std::pair<records::SchoolId, std::string>, predict::LinearModel> inschool_models;
  std::map<std::string, predict::LinearModel> exam_models;
  std::optional<predict::LogisticModel> behavior_model;

  if (inschool) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [school, list] : by_school) {
      auto [fit_part, holdout_part] = split(list);
      for (const auto& subject : all_subjects(list)) {
        try {
          auto rows = predict::inschool_rows(list, subject);
          inschool_models[{school, subject}] = predict::fit_ridge(rows, config_.ridge_lambda);
          auto eval_rows = predict::inschool_rows(holdout_part, subject);
          auto fit_rows = predict::inschool_rows(fit_part, subject);
          if (!eval_rows.empty() && fit_rows.size() >= 2) {
            m[school + "/" + subject] =
                metrics_json(predict::evaluate(predict::fit_ridge(fit_rows, config_.ridge_lambda), eval_rows));
          }
        } catch (const Error& e) {
          warnings.push_back("inschool " + school + "/" + subject + ": " + e.what());
        }
      }
    }
    metrics["inschool"] = std::move(m);
  }
  if (exam) {
    nlohmann::json m = nlohmann::json::object();
    auto [fit_part, holdout_part] = split(all);
    for (const auto& subject : all_subjects(all)) {
      try {
        auto rows = predict::exam_rows(all, subject);
        if (rows.size() < 2) {
          warnings.push_back("exam " + subject + ": not enough students with " +
                             std::to_string(predict::kExamMinYears) + " years of scores");
          continue;
        }
        exam_models[subject] = predict::fit_ridge(rows, config_.ridge_lambda);
        auto eval_rows = predict::exam_rows(holdout_part, subject);
        auto fit_rows = predict::exam_rows(fit_part, subject);
        if (!eval_rows.empty() && fit_rows.size() >= 2) {
          m[subject] = metrics_json(predict::evaluate(predict::fit_ridge(fit_rows, config_.ridge_lambda), eval_rows));
        }
      } catch (const Error& e) {
        warnings.push_back("exam " + subject + ": " + e.what());
      }
    }
    metrics["exam"] = std::move(m);
  }
  if (behavior) {
    try {
      auto rows = predict::behavior_rows(all, config_.risk_rule);
      behavior_model = predict::fit_logistic(rows, config_.logistic_lambda);
      auto [fit_part, holdout_part] = split(all);
      auto eval_rows = predict::behavior_rows(holdout_part, config_.risk_rule);
      auto fit_rows = predict::behavior_rows(fit_part, config_.risk_rule);
      if (!eval_rows.empty()) {
        metrics["behavior"] =
            metrics_json(predict::evaluate(predict::fit_logistic(fit_rows, config_.logistic_lambda), eval_rows));
      }
    } catch (const Error& e) {
      warnings.push_back(std::string("behavior: ") + e.what());
    }
  }

  std::unique_lock lock(mu_);
  if (inschool) models_.inschool = std::move(inschool_models);
  if (exam) models_.exam = std::move(exam_models);
  if (behavior && behavior_model) models_.behavior = std::move(behavior_model);
  ++model_version_;
  std::string version = "m-" + std::to_string(model_version_);
  model_manifest_["version"] = model_version_;
  model_manifest_["model_version"] = version;
  model_manifest_["exam_bins"] = models_.exam_bins;
  for (const auto& [k, v] : metrics.items()) model_manifest_["metrics"][k] = v;
  persist_models_locked();
  return {{"model_version", version}, {"kind", std::string(kind)}, {"metrics", metrics}, {"warnings", warnings}};
}

void Platform::persist_models_locked() const {
  nlohmann::json inschool = nlohmann::json::array();
  for (const auto& [key, model] : models_.inschool) {
    inschool.push_back({{"school", key.first}, {"subject", key.second}, {"model", predict::to_json(model)}});
  }
  nlohmann::json exam = nlohmann::json::object();
  for (const auto& [subject, model] : models_.exam) exam[subject] = predict::to_json(model);
  store_.put("models/inschool.json", inschool.dump(1));
  store_.put("models/exam.json", exam.dump(1));
  if (models_.behavior) store_.put("models/behavior.json", predict::to_json(*models_.behavior).dump(1));
  store_.put("models/manifest.json", model_manifest_.dump(1));
}

void Platform::persist_configs() const { store_.put("configs/alert_configs.json", configs_.to_json().dump(1)); }

nlohmann::json Platform::predictions(const std::string& token) const {
  std::shared_lock lock(mu_);
  const auto* record = find_locked(token);
  if (!record) throw Error(ErrorCode::kNotFound, "unknown student token");
  nlohmann::json out = {{"token", token}, {"school", record->school}, {"class_id", class_id(*record)}};
  auto latest = predict::latest_term(*record);
  nlohmann::json inschool = nlohmann::json::array();
  nlohmann::json exam = nlohmann::json::array();
  nlohmann::json warnings = nlohmann::json::array();
  out["behavior_risk"] = nullptr;
  if (latest) {
    auto as_of = latest->next();
    out["as_of"] = {{"year", as_of.year}, {"term", as_of.term}};
    for (const auto& subject : predict::subjects_of(*record)) {
      auto it = models_.inschool.find({record->school, subject});
      if (it == models_.inschool.end()) {
        warnings.push_back("NoTrainedModel: inschool " + subject);
        continue;
      }
      auto features = predict::extract_features(*record, subject, as_of);
      auto baseline = predict::recent_mean(*record, subject, as_of);
      inschool.push_back({{"subject", subject},
                          {"predicted_score", predict::predict_score(it->second, features)},
                          {"baseline", baseline ? nlohmann::json(*baseline) : nlohmann::json(nullptr)}});
    }
    for (const auto& [subject, model] : models_.exam) {
      if (!predict::recent_mean(*record, subject, as_of)) continue;
      auto features = predict::extract_features(*record, subject, as_of);
      auto target = record->target_grades.find(subject);
      exam.push_back({{"subject", subject},
                      {"predicted_grade", predict::predict_exam_grade(model, features, models_.exam_bins)},
                      {"target_grade", target == record->target_grades.end() ? nlohmann::json(nullptr)
                                                                             : nlohmann::json(target->second)}});
    }
    if (models_.behavior) {
      out["behavior_risk"] = predict::predict_behavior_risk(
          *models_.behavior, predict::extract_features(*record, predict::kAllSubjects, as_of));
    } else {
      warnings.push_back("NoTrainedModel: behavior");
    }
  } else {
    out["as_of"] = nullptr;
    warnings.push_back("NoHistory");
  }
  out["inschool"] = std::move(inschool);
  out["exam"] = std::move(exam);
  out["model_version"] = model_manifest_.value("model_version", "");
  out["warnings"] = std::move(warnings);
  return out;
}

ews::AlertFeed Platform::student_alerts(const std::string& token, const std::string& teacher) const {
  std::shared_lock lock(mu_);
  const auto* record = find_locked(token);
  if (!record) throw Error(ErrorCode::kNotFound, "unknown student token");
  return ews::build_alert_feed(std::span(record, 1), models_, configs_, teacher, generated_at_locked());
}

ews::AlertFeed Platform::class_alerts(const std::string& id, const std::string& teacher) const {
  std::shared_lock lock(mu_);
  std::vector<StudentRecord> roster;
  for (const auto& [school, list] : records_) {
    for (const auto& r : list) {
      if (class_id(r) == id) roster.push_back(r);
    }
  }
  if (roster.empty()) throw Error(ErrorCode::kNotFound, "unknown class " + id);
  return ews::build_alert_feed(roster, models_, configs_, teacher, generated_at_locked());
}

ews::AlertFeed Platform::all_alerts(const std::string& teacher) const {
  std::shared_lock lock(mu_);
  auto roster = records_locked();
  return ews::build_alert_feed(roster, models_, configs_, teacher, generated_at_locked());
}

std::string Platform::update_thresholds(const ews::AlertConfig& cfg) {
  auto id = configs_.update_config(cfg);
  persist_configs();
  return id;
}

nlohmann::json Platform::wordcloud(std::size_t top_n) const {
  std::vector<std::string> docs;
  {
    std::shared_lock lock(mu_);
    for (const auto& [school, list] : records_) {
      for (const auto& r : list) {
        for (const auto& e : r.iep) docs.push_back(e.narrative);
      }
    }
  }
  auto entries = iep::wordcloud_counts(docs, resources_.lexicon, resources_.phrase_rules, resources_.stopwords, top_n);
  return iep::wordcloud_payload(entries);
}

nlohmann::json Platform::heatmap() const {
  std::shared_lock lock(mu_);
  auto roster = records_locked();
  auto tables = iep::cooccurrence(roster);
  return iep::heatmap_payload(iep::correlate(tables));
}

nlohmann::json Platform::talents(std::string_view category, std::size_t k, double min_score) const {
  std::shared_lock lock(mu_);
  std::map<std::string, std::vector<StudentRecord>> classes;
  for (const auto& [school, list] : records_) {
    for (const auto& r : list) classes[class_id(r)].push_back(r);
  }
  std::vector<talent::TalentScorecard> cards;
  for (const auto& [id, roster] : classes) {
    auto cohort = talent::build_cohort(roster);
    for (const auto& r : roster) cards.push_back(talent::score_student(r, resources_.talent_weights, cohort));
  }
  auto ranked = talent::rank_category(cards, category, k, min_score);
  auto parsed = talent::parse_category(category);
  return talent::talent_payload(ranked, *parsed);
}

nlohmann::json Platform::recommendations(const std::string& token, std::size_t k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::shared_lock lock(mu_);
  const auto* record = find_locked(token);
  if (!record) throw Error(ErrorCode::kNotFound, "unknown student token");
  if (!fed_ || !fed_->result) throw Error(ErrorCode::kNotFound, "no federation run yet");
  const auto& result = *fed_->result;
  const auto* node = result.node(record->school);
  std::set<std::string> taken;
  for (const auto& e : record->electives) {
    if (e.enrolled) taken.insert(e.elective_id);
  }
  std::vector<fed::Recommendation> recs;
  bool cold = false;
  std::size_t full = result.factors.items.size();
  if (node) {
    try {
      recs = node->recommend(token, result.factors, full);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnknownStudent) throw;
      cold = true;
    }
  } else {
    cold = true;
  }
  if (cold) {
    std::set<std::string> offered = node ? node->offered() : std::set<std::string>{};
    recs = fed::cold_start_recommend(result.factors, result.popularity, offered, full);
  }
  std::erase_if(recs, [&](const auto& r) { return taken.count(r.elective_id) > 0; });
  if (recs.size() > k) recs.resize(k);
  return {{"token", token},
          {"run_id", fed_->run_id},
          {"cold_start", cold},
          {"recommendations", fed::recommendations_payload(recs)}};
}

nlohmann::json Platform::run_federation(const nlohmann::json& overrides) {
  std::unique_lock fed_lock(fed_mu_, std::try_to_lock);
  if (!fed_lock.owns_lock()) throw Error(ErrorCode::kBusy, "federation run already in progress");
  auto cfg_doc = fed::to_json(config_.federation);
  if (overrides.is_object()) {
    for (const auto& [k, v] : overrides.items()) cfg_doc[k] = v;
  }
  auto cfg = fed::federation_config_from_json(cfg_doc);
  auto all = records();
  if (all.empty()) throw Error(ErrorCode::kInvalidArgument, "no records");
  auto holdout = fed::choose_holdout(all, cfg.seed);
  auto training = fed::without_holdout(all, holdout);
  auto result = std::make_shared<fed::FederationResult>(fed::run_federation(training, cfg, &holdout, {}, all));
  auto popularity_baseline = fed::popularity_hit_rate(*result, holdout, cfg.eval_k);

  std::unique_lock lock(mu_);
  std::string run_id = "run-" + std::to_string(++run_counter_);
  auto history = fed::history_json(*result);
  history["run_id"] = run_id;
  history["config"] = fed::to_json(cfg);
  history["popularity_hit_rate_at_k"] =
      popularity_baseline ? nlohmann::json(*popularity_baseline) : nlohmann::json(nullptr);
  store_.put("federation/" + run_id + ".json", history.dump(1));
  std::vector<std::string> schools;
  for (const auto& node : result->nodes) {
    schools.push_back(node.school());
    store_.put("local/" + node.school() + ".fed.json", node.private_state_json().dump());
  }
  nlohmann::json popularity = result->popularity;
  store_.put("federation/latest.json", nlohmann::json{{"run_id", run_id},
                                                      {"run_counter", run_counter_},
                                                      {"config", fed::to_json(cfg)},
                                                      {"schools", schools},
                                                      {"aborted", result->aborted},
                                                      {"factors", fed::to_json(result->factors)},
                                                      {"popularity", popularity}}
                                           .dump());
  fed_ = FedState{run_id, cfg, result};
  return {{"run_id", run_id},
          {"rounds", result->history.size()},
          {"aborted", result->aborted},
          {"abort_reason", result->abort_reason},
          {"final_hit_rate_at_k",
           result->history.empty() || !result->history.back().hit_rate ? nlohmann::json(nullptr)
                                                                       : nlohmann::json(*result->history.back().hit_rate)},
          {"popularity_hit_rate_at_k", history["popularity_hit_rate_at_k"]}};
}

nlohmann::json Platform::federation_history(const std::string& run_id) const {
  std::string name = "federation/" + run_id + ".json";
  if (run_id.empty() || run_id.find('/') != std::string::npos || run_id == "latest" || !store_.exists(name)) {
    throw Error(ErrorCode::kNotFound, "unknown federation run " + run_id);
  }
  return nlohmann::json::parse(store_.get(name));
}

}  // namespace dmp::platform
