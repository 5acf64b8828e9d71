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

#include "dmp/fed/model.h"

#include <algorithm>
#include <cmath>

#include "dmp/common/crypto.h"
#include "dmp/common/error.h"
#include "dmp/common/rng.h"

namespace dmp::fed {

namespace {

std::vector<double> gaussian(Rng& rng, int d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  for (auto& x : v) x = rng.normal(0.0, 0.1);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

const std::set<std::string> kNoElectives;

std::vector<Recommendation> top_k(std::vector<Recommendation> recs, std::size_t k) {
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.elective_id < b.elective_id;
  });
  if (recs.size() > k) recs.resize(k);
  return recs;
}

std::vector<Recommendation> cold_start_over(const ItemFactors& global, const Popularity& popularity,
                                            const std::set<std::string>& school_offered, std::size_t k,
                                            bool local_only) {
  if (global.items.empty()) throw Error(ErrorCode::kEmptyCatalog, "no electives in the catalog");
  // Average ranks for ties, scaled to [0, 1].
  std::vector<std::pair<double, std::string>> by_bias;
  for (const auto& [id, item] : global.items) by_bias.emplace_back(item.b, id);
  std::sort(by_bias.begin(), by_bias.end());
  std::map<std::string, double> rank_norm;
  double denom = by_bias.size() > 1 ? static_cast<double>(by_bias.size() - 1) : 1.0;
  for (std::size_t i = 0; i < by_bias.size();) {
    std::size_t j = i;
    while (j < by_bias.size() && by_bias[j].first == by_bias[i].first) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0;
    for (std::size_t t = i; t < j; ++t) rank_norm[by_bias[t].second] = by_bias.size() > 1 ? avg / denom : 0.5;
    i = j;
  }
  std::vector<Recommendation> recs;
  for (const auto& [id, item] : global.items) {
    bool cross = !school_offered.count(id);
    if (local_only && cross) continue;
    auto pop = popularity.find(id);
    double score = 0.5 * (pop == popularity.end() ? 0.0 : pop->second) + 0.5 * rank_norm[id];
    recs.push_back({id, score, cross});
  }
  return top_k(std::move(recs), k);
}

}  // namespace

ItemFactors ItemFactors::init(const std::set<std::string>& catalog, int d, std::uint64_t seed) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "factor dimension must be >= 1");
  ItemFactors f;
  f.d = d;
  for (const auto& id : catalog) {
    auto rng = Rng::derive(seed, "item\x1f" + id);
    f.items[id] = {gaussian(rng, d), 0.0};
  }
  return f;
}

std::vector<double> ItemFactors::flatten() const {
  std::vector<double> out;
  out.reserve(flat_size());
  for (const auto& [id, item] : items) {
    out.insert(out.end(), item.q.begin(), item.q.end());
    out.push_back(item.b);
  }
  return out;
}

ItemFactors ItemFactors::with_values(std::span<const double> flat) const {
  if (flat.size() != flat_size()) throw Error(ErrorCode::kInvalidArgument, "flat factor length mismatch");
  ItemFactors out = *this;
  std::size_t pos = 0;
  for (auto& [id, item] : out.items) {
    for (auto& x : item.q) x = flat[pos++];
    item.b = flat[pos++];
  }
  return out;
}

bool ItemFactors::finite() const {
  for (const auto& [id, item] : items) {
    if (!std::isfinite(item.b)) return false;
    for (double x : item.q) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

nlohmann::json to_json(const ItemFactors& factors) {
  nlohmann::json items = nlohmann::json::object();
  for (const auto& [id, item] : factors.items) items[id] = {{"q", item.q}, {"b", item.b}};
  return {{"d", factors.d}, {"version", factors.version}, {"items", std::move(items)}};
}

ItemFactors item_factors_from_json(const nlohmann::json& doc) {
  try {
    ItemFactors f;
    f.d = doc.at("d").get<int>();
    f.version = doc.at("version").get<int>();
    for (const auto& [id, item] : doc.at("items").items()) {
      ItemVector v{item.at("q").get<std::vector<double>>(), item.at("b").get<double>()};
      if (static_cast<int>(v.q.size()) != f.d) throw Error(ErrorCode::kInvalidArgument, "item factor width mismatch");
      f.items[id] = std::move(v);
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed item factors: ") + e.what());
  }
}

std::string digest(const ItemFactors& factors) {
  auto d = crypto::sha256(to_json(factors).dump());
  return crypto::to_hex(d);
}

SchoolNode::SchoolNode(SchoolId school, std::span<const records::StudentRecord> records,
                       std::set<std::string> offered, int d, std::uint64_t seed)
    : school_(std::move(school)), d_(d), offered_(std::move(offered)) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "factor dimension must be >= 1");
  for (const auto& record : records) {
    if (record.school != school_) continue;
    const auto& token = record.token.str();
    auto rng = Rng::derive(seed, "user\x1f" + school_ + "\x1f" + token);
    users_[token] = {gaussian(rng, d), 0.0};
    auto& set = enrolled_[token];
    for (const auto& e : record.electives) {
      if (e.enrolled) set.insert(e.elective_id);
    }
  }
  for (const auto& id : offered_) offsets_[id] = std::vector<double>(static_cast<std::size_t>(d), 0.0);
}

long SchoolNode::interaction_count() const {
  long n = 0;
  for (const auto& [token, set] : enrolled_) n += static_cast<long>(set.size());
  return n;
}

std::map<std::string, long> SchoolNode::enrollment_counts() const {
  std::map<std::string, long> counts;
  for (const auto& id : offered_) counts[id] = 0;
  for (const auto& [token, set] : enrolled_) {
    for (const auto& id : set) ++counts[id];
  }
  return counts;
}

const std::set<std::string>& SchoolNode::enrolled(const std::string& token) const {
  auto it = enrolled_.find(token);
  return it == enrolled_.end() ? kNoElectives : it->second;
}

std::vector<Row> SchoolNode::sample_rows(const ItemFactors& global, int round, std::uint64_t seed) const {
  auto rng = Rng::derive(seed, "neg\x1f" + school_ + "\x1f" + std::to_string(round));
  std::vector<Row> rows;
  for (const auto& [token, set] : enrolled_) {
    std::vector<std::string> candidates;
    for (const auto& id : offered_) {
      if (!set.count(id) && global.items.count(id)) candidates.push_back(id);
    }
    for (const auto& id : set) {
      if (!global.items.count(id)) continue;
      rows.push_back({token, id, 1.0});
      if (!candidates.empty()) rows.push_back({token, candidates[rng.below(candidates.size())], 0.0});
    }
  }
  return rows;
}

double SchoolNode::objective(std::span<const Row> rows, const ItemFactors& global, double lambda) const {
  std::vector<double> zero(static_cast<std::size_t>(d_), 0.0);
  double sq = 0.0;
  for (const auto& row : rows) {
    const auto& user = users_.at(row.token);
    const auto& item = global.items.at(row.elective);
    auto off = offsets_.find(row.elective);
    const auto& o = off == offsets_.end() ? zero : off->second;
    double inner = 0.0;
    for (int k = 0; k < d_; ++k) inner += user.p[k] * (item.q[k] + o[k]);
    double e = row.r - (kMu + user.b + item.b + inner);
    sq += e * e;
  }
  double reg = 0.0;
  for (const auto& [t, u] : users_) reg += dot(u.p, u.p);
  for (const auto& [id, item] : global.items) reg += dot(item.q, item.q);
  for (const auto& [id, o] : offsets_) reg += dot(o, o);
  return (rows.empty() ? 0.0 : sq / static_cast<double>(rows.size())) + lambda * reg;
}

LocalUpdate SchoolNode::local_train(const ItemFactors& global, const TrainParams& params, int round,
                                    std::uint64_t seed) {
  if (global.d != d_) throw Error(ErrorCode::kInvalidArgument, "factor dimension mismatch");
  auto rows = sample_rows(global, round, seed);
  if (rows.empty()) throw Error(ErrorCode::kNoInteractions, "school " + school_ + " has no interactions");
  const std::size_t d = static_cast<std::size_t>(d_);

  // Dense working copies.
  std::vector<std::string> item_ids;
  std::map<std::string, std::size_t> item_index;
  std::vector<std::vector<double>> q;
  std::vector<double> bi;
  for (const auto& [id, item] : global.items) {
    item_index[id] = item_ids.size();
    item_ids.push_back(id);
    q.push_back(item.q);
    bi.push_back(item.b);
  }
  std::vector<std::vector<double>> o(item_ids.size(), std::vector<double>(d, 0.0));
  std::vector<bool> has_offset(item_ids.size(), false);
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    if (auto it = offsets_.find(item_ids[i]); it != offsets_.end()) {
      o[i] = it->second;
      has_offset[i] = true;
    }
  }
  std::vector<std::string> user_ids;
  std::map<std::string, std::size_t> user_index;
  std::vector<std::vector<double>> p;
  std::vector<double> bu;
  for (const auto& [token, user] : users_) {
    user_index[token] = user_ids.size();
    user_ids.push_back(token);
    p.push_back(user.p);
    bu.push_back(user.b);
  }
  struct Idx {
    std::size_t u, i;
    double r;
  };
  std::vector<Idx> idx;
  idx.reserve(rows.size());
  for (const auto& row : rows) idx.push_back({user_index.at(row.token), item_index.at(row.elective), row.r});

  const double scale = -2.0 / static_cast<double>(rows.size());
  const double lr = params.lr;
  const double two_lambda = 2.0 * params.lambda;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::vector<std::vector<double>> gq(q.size(), std::vector<double>(d, 0.0));
    std::vector<std::vector<double>> go(q.size(), std::vector<double>(d, 0.0));
    std::vector<double> gbi(q.size(), 0.0);
    std::vector<std::vector<double>> gp(p.size(), std::vector<double>(d, 0.0));
    std::vector<double> gbu(p.size(), 0.0);
    for (const auto& [u, i, r] : idx) {
      double inner = 0.0;
      for (std::size_t k = 0; k < d; ++k) inner += p[u][k] * (q[i][k] + o[i][k]);
      double g = scale * (r - (kMu + bu[u] + bi[i] + inner));
      gbi[i] += g;
      gbu[u] += g;
      for (std::size_t k = 0; k < d; ++k) {
        gq[i][k] += g * p[u][k];
        if (has_offset[i]) go[i][k] += g * p[u][k];
        gp[u][k] += g * (q[i][k] + o[i][k]);
      }
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      bi[i] -= lr * gbi[i];
      for (std::size_t k = 0; k < d; ++k) {
        double step_q = gq[i][k] + two_lambda * q[i][k];
        double step_o = has_offset[i] ? go[i][k] + two_lambda * o[i][k] : 0.0;
        q[i][k] -= lr * step_q;
        o[i][k] -= lr * step_o;
      }
    }
    for (std::size_t u = 0; u < p.size(); ++u) {
      bu[u] -= lr * gbu[u];
      for (std::size_t k = 0; k < d; ++k) p[u][k] -= lr * (gp[u][k] + two_lambda * p[u][k]);
    }
  }

  for (std::size_t u = 0; u < user_ids.size(); ++u) users_[user_ids[u]] = {std::move(p[u]), bu[u]};
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    if (has_offset[i]) offsets_[item_ids[i]] = std::move(o[i]);
  }
  LocalUpdate update{global, static_cast<long>(rows.size())};
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    auto& item = update.delta.items[item_ids[i]];
    const auto& old = global.items.at(item_ids[i]);
    for (std::size_t k = 0; k < d; ++k) item.q[k] = q[i][k] - old.q[k];
    item.b = bi[i] - old.b;
  }
  return update;
}

std::vector<Recommendation> SchoolNode::recommend(const std::string& token, const ItemFactors& global,
                                                  std::size_t k, bool local_only) const {
  auto user_it = users_.find(token);
  auto enrolled_it = enrolled_.find(token);
  if (user_it == users_.end() || enrolled_it == enrolled_.end() || enrolled_it->second.empty()) {
    throw Error(ErrorCode::kUnknownStudent, "no interactions for student");
  }
  const auto& user = user_it->second;
  std::vector<Recommendation> recs;
  for (const auto& [id, item] : global.items) {
    if (enrolled_it->second.count(id)) continue;
    bool cross = !offered_.count(id);
    if (local_only && cross) continue;
    double inner = 0.0;
    auto off = offsets_.find(id);
    for (int j = 0; j < d_; ++j) {
      double offset = (cross || off == offsets_.end()) ? 0.0 : off->second[j];
      inner += user.p[j] * (item.q[j] + offset);
    }
    recs.push_back({id, kMu + user.b + item.b + inner, cross});
  }
  return top_k(std::move(recs), k);
}

nlohmann::json SchoolNode::private_state_json() const {
  nlohmann::json users = nlohmann::json::object();
  for (const auto& [token, u] : users_) users[token] = {{"p", u.p}, {"b", u.b}};
  nlohmann::json offsets = nlohmann::json::object();
  for (const auto& [id, o] : offsets_) offsets[id] = o;
  return {{"school", school_}, {"d", d_}, {"users", std::move(users)}, {"offsets", std::move(offsets)}};
}

void SchoolNode::restore_private_state(const nlohmann::json& doc) {
  try {
    if (doc.at("school").get<std::string>() != school_ || doc.at("d").get<int>() != d_) {
      throw Error(ErrorCode::kInvalidArgument, "private state belongs to another node");
    }
    for (const auto& [token, u] : doc.at("users").items()) {
      users_[token] = {u.at("p").get<std::vector<double>>(), u.at("b").get<double>()};
    }
    for (const auto& [id, o] : doc.at("offsets").items()) offsets_[id] = o.get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed private state: ") + e.what());
  }
}

std::vector<Recommendation> cold_start_recommend(const ItemFactors& global, const Popularity& popularity,
                                                 const std::set<std::string>& school_offered, std::size_t k) {
  return cold_start_over(global, popularity, school_offered, k, false);
}

std::vector<Recommendation> recommend_or_cold_start(const SchoolNode& node, const std::string& token,
                                                    const ItemFactors& global, const Popularity& popularity,
                                                    std::size_t k, bool local_only) {
  try {
    return node.recommend(token, global, k, local_only);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnknownStudent) throw;
    return cold_start_over(global, popularity, node.offered(), k, local_only);
  }
}

nlohmann::json recommendations_payload(std::span<const Recommendation> recs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : recs) {
    out.push_back({{"elective_id", r.elective_id}, {"score", r.score}, {"cross_school", r.cross_school}});
  }
  return out;
}

}  // namespace dmp::fed
