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

#include "dmp/fed/federation.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <random>
#include <thread>

#include "dmp/common/crypto.h"
#include "dmp/common/error.h"
#include "dmp/fed/codec.h"

namespace dmp::fed {

double school_weight(long n, double alpha) { return std::pow(static_cast<double>(n), alpha); }

std::vector<std::int64_t> encode_update(const ItemFactors& delta, long n, double alpha) {
  auto flat = delta.flatten();
  long double w = static_cast<long double>(school_weight(n, alpha));
  std::vector<std::int64_t> out;
  out.reserve(flat.size());
  for (double v : flat) out.push_back(FixedPointCodec::encode(w * static_cast<long double>(v)));
  return out;
}

std::vector<double> aggregate_values(std::span<const std::vector<std::int64_t>> masked, std::span<const long> counts,
                                     double alpha) {
  if (masked.size() != counts.size() || masked.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "one count per masked update required");
  }
  long double total = 0.0L;
  for (long n : counts) total += static_cast<long double>(school_weight(n, alpha));
  if (!(total > 0.0L)) throw Error(ErrorCode::kInvalidArgument, "aggregate weight must be positive");
  auto sum = sum_payloads(masked);
  std::vector<double> out(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) out[i] = static_cast<double>(FixedPointCodec::decode(sum[i]) / total);
  return out;
}

ItemFactors aggregate(const ItemFactors& global, std::span<const Envelope> updates,
                      const std::set<SchoolId>& expected, int round, double alpha) {
  std::map<SchoolId, UpdatePayload> by_school;
  for (const auto& env : updates) {
    if (env.type != MessageType::kUpdate) continue;
    if (env.round != round) {
      throw Error(ErrorCode::kVersionMismatch, "update for round " + std::to_string(env.round) + " during round " +
                                                   std::to_string(round));
    }
    if (!expected.count(env.school)) throw Error(ErrorCode::kInvalidArgument, "update from unregistered school");
    if (by_school.count(env.school)) throw Error(ErrorCode::kInvalidArgument, "duplicate update from " + env.school);
    by_school[env.school] = update_from_json(env.payload);
  }
  for (const auto& school : expected) {
    if (!by_school.count(school)) throw Error(ErrorCode::kMissingSchool, "no update from " + school);
  }
  std::vector<std::vector<std::int64_t>> masked;
  std::vector<long> counts;
  for (auto& [school, payload] : by_school) {
    if (payload.values.size() != global.flat_size()) throw Error(ErrorCode::kInvalidArgument, "update shape mismatch");
    masked.push_back(std::move(payload.values));
    counts.push_back(payload.n);
  }
  auto delta = aggregate_values(masked, counts, alpha);
  auto flat = global.flatten();
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] += delta[i];
  auto out = global.with_values(flat);
  out.version = global.version + 1;
  return out;
}

Coordinator::Coordinator(int d, double alpha, std::uint64_t seed, TranscriptRecorder* transcript)
    : d_(d), alpha_(alpha), seed_(seed), transcript_(transcript) {
  if (transcript_) inbox_.set_tap([t = transcript_](std::string_view bytes) { t->record(bytes); });
}

void Coordinator::connect(const SchoolId& school, Channel* node_inbox) { outboxes_[school] = node_inbox; }

void Coordinator::broadcast(const Envelope& envelope) {
  for (const auto& [school, channel] : outboxes_) {
    Envelope copy = envelope;
    copy.school = school;
    auto line = to_wire(copy);
    if (transcript_) transcript_->record(line);
    channel->send_raw(std::move(line));
  }
}

void Coordinator::collect_registrations() {
  std::map<std::string, long> enrollments;
  long students = 0;
  while (auto line = inbox_.try_receive()) {
    auto env = from_wire(*line);
    if (env.type != MessageType::kRegister) throw Error(ErrorCode::kInvalidArgument, "expected Register");
    try {
      schools_.insert(env.school);
      auto& offered = offered_[env.school];
      for (const auto& id : env.payload.at("electives")) offered.insert(id.get<std::string>());
      students += env.payload.at("students").get<long>();
      for (const auto& [id, count] : env.payload.at("enrollments").items()) enrollments[id] += count.get<long>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("malformed Register payload: ") + e.what());
    }
  }
  if (schools_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "federation needs at least two schools");
  std::set<std::string> catalog;
  for (const auto& [school, offered] : offered_) catalog.insert(offered.begin(), offered.end());
  factors_ = ItemFactors::init(catalog, d_, seed_);
  for (const auto& id : catalog) {
    popularity_[id] = students > 0 ? static_cast<double>(enrollments[id]) / static_cast<double>(students) : 0.0;
  }
}

void Coordinator::start_round(int round) {
  round_ = round;
  nlohmann::json popularity = popularity_;
  broadcast({MessageType::kRoundStart, round, "", {{"factors", to_json(factors_)}, {"popularity", popularity}}});
}

void Coordinator::finish_round() {
  std::vector<Envelope> updates;
  while (auto line = inbox_.try_receive()) updates.push_back(from_wire(*line));
  try {
    factors_ = aggregate(factors_, updates, schools_, round_, alpha_);
  } catch (const Error& e) {
    broadcast({MessageType::kAbort, round_, "", {{"reason", error_code_name(e.code())}}});
    throw;
  }
  broadcast({MessageType::kRoundEnd, round_, "", {{"version", factors_.version}}});
}

FederationConfig FederationConfig::defaults() { return {}; }

nlohmann::json to_json(const FederationConfig& config) {
  nlohmann::json doc = {{"d", config.d},
                        {"rounds", config.rounds},
                        {"epochs", config.train.epochs},
                        {"lr", config.train.lr},
                        {"lambda", config.train.lambda},
                        {"alpha", config.alpha},
                        {"seed", config.seed},
                        {"eval_k", config.eval_k}};
  return doc;
}

FederationConfig federation_config_from_json(const nlohmann::json& doc) {
  FederationConfig c;
  try {
    c.d = doc.value("d", c.d);
    c.rounds = doc.value("rounds", c.rounds);
    c.train.epochs = doc.value("epochs", c.train.epochs);
    c.train.lr = doc.value("lr", c.train.lr);
    c.train.lambda = doc.value("lambda", c.train.lambda);
    c.alpha = doc.value("alpha", c.alpha);
    c.seed = doc.value("seed", c.seed);
    c.eval_k = doc.value("eval_k", c.eval_k);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed federation config: ") + e.what());
  }
  if (c.d < 1 || c.rounds < 0 || c.train.epochs < 1 || !(c.train.lr >= 0) || !(c.train.lambda >= 0) ||
      !(c.alpha >= 0) || c.eval_k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "federation parameters out of range");
  }
  return c;
}

Holdout choose_holdout(std::span<const records::StudentRecord> records, std::uint64_t seed) {
  Holdout out;
  for (const auto& r : records) {
    std::set<std::string> enrolled;
    for (const auto& e : r.electives) {
      if (e.enrolled && e.school == r.school) enrolled.insert(e.elective_id);
    }
    if (enrolled.size() < 2) continue;
    std::string label = std::to_string(seed) + "\x1f" + r.school + "\x1f" + r.token.str();
    auto d = crypto::sha256(label);
    std::uint64_t pick = 0;
    for (int i = 0; i < 8; ++i) pick = (pick << 8) | d[i];
    auto it = enrolled.begin();
    std::advance(it, static_cast<long>(pick % enrolled.size()));
    out[{r.school, r.token.str()}] = *it;
  }
  return out;
}

std::vector<records::StudentRecord> without_holdout(std::span<const records::StudentRecord> records,
                                                    const Holdout& holdout) {
  std::vector<records::StudentRecord> out(records.begin(), records.end());
  for (auto& r : out) {
    auto it = holdout.find({r.school, r.token.str()});
    if (it == holdout.end()) continue;
    std::erase_if(r.electives, [&](const auto& e) { return e.enrolled && e.elective_id == it->second; });
  }
  return out;
}

std::map<SchoolId, std::set<std::string>> offered_catalogs(std::span<const records::StudentRecord> records) {
  std::map<SchoolId, std::set<std::string>> out;
  for (const auto& r : records) {
    out[r.school];
    for (const auto& e : r.electives) {
      if (e.enrolled) out[e.school].insert(e.elective_id);
    }
  }
  return out;
}

const SchoolNode* FederationResult::node(const SchoolId& school) const {
  for (const auto& n : nodes) {
    if (n.school() == school) return &n;
  }
  return nullptr;
}

FederationResult run_federation(std::span<const records::StudentRecord> records, const FederationConfig& config,
                                const Holdout* holdout, const Instrumentation& hooks,
                                std::span<const records::StudentRecord> catalog_records) {
  auto catalogs = offered_catalogs(catalog_records.empty() ? records : catalog_records);
  std::set<SchoolId> school_set;
  for (const auto& r : records) school_set.insert(r.school);
  if (school_set.size() < 2) throw Error(ErrorCode::kInvalidArgument, "federation needs at least two schools");
  std::vector<SchoolId> schools(school_set.begin(), school_set.end());

  FederationResult result;
  for (const auto& school : schools) {
    result.nodes.emplace_back(school, records, catalogs[school], config.d, config.seed);
  }
  auto seeds = derive_pair_seeds(schools, config.seed);

  Coordinator coordinator(config.d, config.alpha, config.seed, hooks.transcript);
  std::deque<Channel> inboxes(schools.size());
  for (std::size_t s = 0; s < schools.size(); ++s) coordinator.connect(schools[s], &inboxes[s]);
  for (const auto& node : result.nodes) {
    nlohmann::json enrollments = node.enrollment_counts();
    coordinator.inbox().send({MessageType::kRegister,
                              0,
                              node.school(),
                              {{"electives", node.offered()},
                               {"students", node.student_count()},
                               {"enrollments", std::move(enrollments)}}});
  }
  coordinator.collect_registrations();
  result.popularity = coordinator.popularity();

  for (int round = 1; round <= config.rounds; ++round) {
    coordinator.start_round(round);
    std::vector<std::exception_ptr> failures(schools.size());
    std::vector<std::thread> workers;
    for (std::size_t s = 0; s < schools.size(); ++s) {
      workers.emplace_back([&, s] {
        try {
          auto env = from_wire(inboxes[s].receive());
          auto& node = result.nodes[s];
          auto global = item_factors_from_json(env.payload.at("factors"));
          auto update = node.local_train(global, config.train, env.round, config.seed);
          auto encoded = encode_update(update.delta, update.n, config.alpha);
          if (hooks.on_encoded) hooks.on_encoded(node.school(), env.round, encoded);
          auto masked = mask_update(encoded, node.school(), schools, seeds, env.round);
          if (hooks.on_masked) hooks.on_masked(node.school(), env.round, masked);
          if (config.drop && config.drop->first == node.school() && config.drop->second == env.round) return;
          coordinator.inbox().send(
              {MessageType::kUpdate, env.round, node.school(), to_json(UpdatePayload{std::move(masked), update.n})});
        } catch (...) {
          failures[s] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
    try {
      coordinator.finish_round();
    } catch (const Error& e) {
      result.aborted = true;
      result.abort_reason = std::string(error_code_name(e.code())) + ": " + e.what();
      break;
    }
    for (auto& inbox : inboxes) {
      while (inbox.try_receive()) {
      }
    }
    result.factors = coordinator.factors();
    RoundRecord rec{round, result.factors.version, std::nullopt, digest(result.factors)};
    if (holdout) rec.hit_rate = hit_rate(result, *holdout, config.eval_k);
    result.history.push_back(std::move(rec));
  }
  result.factors = coordinator.factors();
  return result;
}

std::optional<double> hit_rate(const FederationResult& result, const Holdout& holdout, std::size_t k) {
  long hits = 0, total = 0;
  for (const auto& [key, elective] : holdout) {
    const auto* node = result.node(key.first);
    if (!node) continue;
    auto recs = recommend_or_cold_start(*node, key.second, result.factors, result.popularity, k, true);
    ++total;
    if (std::any_of(recs.begin(), recs.end(), [&](const auto& r) { return r.elective_id == elective; })) ++hits;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::optional<double> popularity_hit_rate(const FederationResult& result, const Holdout& holdout, std::size_t k) {
  long hits = 0, total = 0;
  for (const auto& [key, elective] : holdout) {
    const auto* node = result.node(key.first);
    if (!node) continue;
    const auto& taken = node->enrolled(key.second);
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& id : node->offered()) {
      if (taken.count(id)) continue;
      auto it = result.popularity.find(id);
      ranked.emplace_back(it == result.popularity.end() ? 0.0 : it->second, id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (ranked.size() > k) ranked.resize(k);
    ++total;
    if (std::any_of(ranked.begin(), ranked.end(), [&](const auto& r) { return r.second == elective; })) ++hits;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

nlohmann::json history_json(const FederationResult& result) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : result.history) {
    rounds.push_back({{"round", r.round},
                      {"version", r.version},
                      {"hit_rate_at_k", r.hit_rate ? nlohmann::json(*r.hit_rate) : nlohmann::json(nullptr)},
                      {"factors_digest", r.factors_digest}});
  }
  return {{"rounds", std::move(rounds)}, {"aborted", result.aborted}, {"abort_reason", result.abort_reason}};
}

}  // namespace dmp::fed
