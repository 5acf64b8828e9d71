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

#include "dmp/platform/api.h"

#include <charconv>
#include <regex>

#include "dmp/common/error.h"
#include "httplib.h"

namespace dmp::platform {

namespace {

struct BadRequest {
  std::string message;
};

std::size_t parse_size(const ApiRequest& req, const std::string& key, std::size_t fallback) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return fallback;
  std::size_t v = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw BadRequest{key + " must be a nonnegative integer"};
  return v;
}

double parse_double(const ApiRequest& req, const std::string& key, double fallback) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw BadRequest{key + " must be a number"};
  return v;
}

std::string query_or(const ApiRequest& req, const std::string& key, const std::string& fallback) {
  auto it = req.query.find(key);
  return it == req.query.end() || it->second.empty() ? fallback : it->second;
}

// {"items": page, "total", "offset", "limit"}
nlohmann::json paginate(const nlohmann::json& items, const ApiRequest& req) {
  std::size_t offset = parse_size(req, "offset", 0);
  std::size_t limit = parse_size(req, "limit", items.size());
  nlohmann::json page = nlohmann::json::array();
  for (std::size_t i = offset; i < items.size() && i - offset < limit; ++i) page.push_back(items[i]);
  return {{"items", std::move(page)}, {"total", items.size()}, {"offset", offset}, {"limit", limit}};
}

nlohmann::json feed_json(const ews::AlertFeed& feed, const ApiRequest& req) {
  nlohmann::json alerts = nlohmann::json::array();
  for (const auto& a : feed.alerts) alerts.push_back(ews::to_json(a));
  auto out = paginate(alerts, req);
  out["warnings"] = feed.warnings;
  return out;
}

nlohmann::json error_body(const Error& e) {
  return {{"error", error_code_name(e.code())}, {"message", e.what()}};
}

ApiResponse route(Platform& platform, const ApiRequest& req) {
  static const std::regex kStudent(R"(^/students/([0-9a-f]+)/(predictions|alerts|recommendations)$)");
  static const std::regex kClass(R"(^/classes/([^/]+)/alerts$)");
  static const std::regex kTalent(R"(^/talents/([^/]+)$)");
  static const std::regex kHistory(R"(^/federation/([^/]+)/history$)");
  std::smatch m;
  const auto& path = req.path;
  const auto& method = req.method;
  const std::string teacher = query_or(req, "teacher", "default");

  if (method == "GET" && path == "/health") {
    return {200, {{"status", "ok"}, {"students", platform.record_count()}}};
  }
  if (method == "POST" && path == "/ingest") {
    auto school = req.form.count("school") ? req.form.at("school") : query_or(req, "school", "");
    auto format_name = req.form.count("format") ? req.form.at("format") : query_or(req, "format", "csv");
    auto format = privacy::parse_ingest_format(format_name);
    if (school.empty()) throw BadRequest{"school is required"};
    const std::string& bytes = req.form.count("file") ? req.form.at("file") : req.body;
    return {200, platform.ingest(school, bytes, format)};
  }
  if (method == "POST" && path == "/train") {
    return {200, platform.train(query_or(req, "kind", "all"))};
  }
  if (method == "GET" && std::regex_match(path, m, kStudent)) {
    std::string token = m[1];
    std::string what = m[2];
    if (what == "predictions") return {200, platform.predictions(token)};
    if (what == "alerts") return {200, feed_json(platform.student_alerts(token, teacher), req)};
    auto rec = platform.recommendations(token, parse_size(req, "k", 5));
    auto out = paginate(rec.at("recommendations"), req);
    out["token"] = rec["token"];
    out["run_id"] = rec["run_id"];
    out["cold_start"] = rec["cold_start"];
    return {200, out};
  }
  if (method == "GET" && std::regex_match(path, m, kClass)) {
    return {200, feed_json(platform.class_alerts(m[1], teacher), req)};
  }
  if (method == "GET" && path == "/alerts") {
    return {200, feed_json(platform.all_alerts(teacher), req)};
  }
  if (method == "PUT" && path == "/config/thresholds") {
    auto doc = nlohmann::json::parse(req.body, nullptr, false);
    if (doc.is_discarded()) throw BadRequest{"body must be JSON"};
    auto cfg = ews::alert_config_from_json(doc);
    auto violations = ews::config_violations(cfg);
    if (!violations.empty()) {
      return {400, {{"error", "InvalidConfig"}, {"message", violations.front()}, {"violations", violations}}};
    }
    auto id = platform.update_thresholds(cfg);
    return {200, {{"snapshot_id", id}, {"config", ews::to_json(cfg)}}};
  }
  if (method == "GET" && path == "/iep/wordcloud") {
    return {200, paginate(platform.wordcloud(parse_size(req, "top_n", 50)), req)};
  }
  if (method == "GET" && path == "/iep/heatmap") {
    return {200, paginate(platform.heatmap(), req)};
  }
  if (method == "GET" && std::regex_match(path, m, kTalent)) {
    std::string category = m[1];
    auto out = paginate(platform.talents(category, parse_size(req, "k", 10), parse_double(req, "min_score", 5.0)), req);
    out["category"] = category;
    return {200, out};
  }
  if (method == "POST" && path == "/federation/run") {
    nlohmann::json overrides = nlohmann::json::object();
    if (!req.body.empty()) {
      overrides = nlohmann::json::parse(req.body, nullptr, false);
      if (overrides.is_discarded() || !overrides.is_object()) throw BadRequest{"body must be a JSON object"};
    }
    return {200, platform.run_federation(overrides)};
  }
  if (method == "GET" && std::regex_match(path, m, kHistory)) {
    auto history = platform.federation_history(m[1]);
    auto out = paginate(history.at("rounds"), req);
    for (const auto& [k, v] : history.items()) {
      if (k != "rounds") out[k] = v;
    }
    return {200, out};
  }
  return {404, {{"error", "NotFound"}, {"message", "no route for " + method + " " + path}}};
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownStudent:
      return 404;
    case ErrorCode::kBusy:
      return 409;
    case ErrorCode::kIo:
    case ErrorCode::kCorruptSnapshot:
      return 500;
    default:
      return 400;
  }
}

ApiResponse handle_request(Platform& platform, const ApiRequest& request) {
  try {
    return route(platform, request);
  } catch (const BadRequest& e) {
    return {400, {{"error", "InvalidArgument"}, {"message", e.message}}};
  } catch (const Error& e) {
    return {http_status(e.code()), error_body(e)};
  } catch (const nlohmann::json::exception& e) {
    return {400, {{"error", "InvalidArgument"}, {"message", e.what()}}};
  } catch (const std::exception& e) {
    return {500, {{"error", "Internal"}, {"message", e.what()}}};
  }
}

struct HttpServer::Impl {
  Platform& platform;
  httplib::Server server;
  std::thread thread;

  explicit Impl(Platform& p) : platform(p) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest api{req.method, req.path, {}, req.body, {}};
      for (const auto& [k, v] : req.params) api.query[k] = v;
      for (const auto& [name, file] : req.files) api.form[name] = file.content;
      auto out = handle_request(platform, api);
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json");
    };
    server.Get(R"(/.*)", handler);
    server.Post(R"(/.*)", handler);
    server.Put(R"(/.*)", handler);
  }
};

HttpServer::HttpServer(Platform& platform) : impl_(std::make_unique<Impl>(platform)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::listen_blocking(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace dmp::platform
