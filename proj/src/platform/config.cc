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

#include "dmp/platform/config.h"

#include <cctype>
#include <charconv>

#include "dmp/common/error.h"
#include "dmp/common/files.h"

#ifndef DMP_RESOURCE_DIR
#define DMP_RESOURCE_DIR "data"
#endif

namespace dmp::platform {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, "config line " + std::to_string(line) + ": " + what);
}

// Strips a trailing comment outside quotes.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

nlohmann::json parse_scalar(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.empty()) fail(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        char c = v[++i];
        out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
      } else {
        out.push_back(v[i]);
      }
    }
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
  if (ec == std::errc() && p == v.data() + v.size()) return i;
  double d = 0.0;
  auto [p2, ec2] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec2 == std::errc() && p2 == v.data() + v.size()) return d;
  fail(line, "unrecognised value '" + std::string(v) + "'");
}

nlohmann::json parse_value(std::string_view v, std::size_t line) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    auto body = trim(v.substr(1, v.size() - 2));
    while (!body.empty()) {
      std::size_t end = 0;
      bool quoted = false;
      while (end < body.size() && (quoted || body[end] != ',')) {
        if (body[end] == '"') quoted = !quoted;
        ++end;
      }
      auto item = trim(body.substr(0, end));
      if (!item.empty()) arr.push_back(parse_scalar(item, line));
      body = end < body.size() ? trim(body.substr(end + 1)) : std::string_view{};
    }
    return arr;
  }
  return parse_scalar(v, line);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(strip_comment(text.substr(start, end - start)));
    ++line_no;
    start = end + 1;
    if (!line.empty()) {
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) fail(line_no, "malformed section header");
        std::string name(trim(line.substr(1, line.size() - 2)));
        if (root.contains(name) && !root[name].is_object()) fail(line_no, "section clashes with key");
        if (!root.contains(name)) root[name] = nlohmann::json::object();
        section = &root[name];
      } else {
        auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        std::string key(trim(line.substr(0, eq)));
        if (key.empty()) fail(line_no, "empty key");
        if (section->contains(key)) fail(line_no, "duplicate key '" + key + "'");
        (*section)[key] = parse_value(line.substr(eq + 1), line_no);
      }
    }
    if (end == text.size()) break;
  }
  return root;
}

std::filesystem::path default_resources_dir() { return DMP_RESOURCE_DIR; }

PlatformConfig PlatformConfig::for_data_dir(const std::filesystem::path& data_dir) {
  PlatformConfig c;
  c.data_dir = data_dir;
  c.key_file = data_dir / "pseudonym.key";
  c.resources_dir = default_resources_dir();
  return c;
}

PlatformConfig PlatformConfig::from_toml(std::string_view text, const std::filesystem::path& base) {
  auto doc = parse_toml(text);
  PlatformConfig c;
  c.resources_dir = default_resources_dir();
  try {
    if (doc.contains("data_dir")) c.data_dir = resolve(base, doc["data_dir"].get<std::string>());
    c.key_file = doc.contains("key_file") ? resolve(base, doc["key_file"].get<std::string>())
                                          : c.data_dir / "pseudonym.key";
    c.listen = doc.value("listen", c.listen);
    if (doc.contains("resources_dir")) c.resources_dir = resolve(base, doc["resources_dir"].get<std::string>());
    if (auto it = doc.find("models"); it != doc.end()) {
      c.ridge_lambda = it->value("ridge_lambda", c.ridge_lambda);
      c.logistic_lambda = it->value("logistic_lambda", c.logistic_lambda);
      if (it->contains("exam_bins")) c.exam_bins = it->at("exam_bins").get<std::vector<double>>();
      c.risk_rule.absence_threshold = it->value("absence_threshold", c.risk_rule.absence_threshold);
      c.risk_rule.discipline_threshold = it->value("discipline_threshold", c.risk_rule.discipline_threshold);
    }
    if (auto it = doc.find("ews"); it != doc.end()) c.ews_defaults = ews::alert_config_from_json(*it);
    if (auto it = doc.find("federation"); it != doc.end()) c.federation = fed::federation_config_from_json(*it);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config value has the wrong type: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) throw;
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

PlatformConfig PlatformConfig::load(const std::filesystem::path& path) {
  auto text = files::read_all(path);
  return from_toml(text, path.parent_path());
}

void PlatformConfig::validate() const {
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "ridge_lambda must be >= 0");
  if (!(logistic_lambda >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "logistic_lambda must be >= 0");
  if (risk_rule.absence_threshold < 0 || risk_rule.discipline_threshold < 0) {
    throw Error(ErrorCode::kInvalidConfig, "risk thresholds must be >= 0");
  }
  try {
    predict::validate_bins(exam_bins);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("exam_bins: ") + e.what());
  }
  if (ews_defaults) {
    auto violations = ews::config_violations(*ews_defaults);
    if (!violations.empty()) throw Error(ErrorCode::kInvalidConfig, "ews: " + violations.front());
  }
  if (listen.find(':') == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "listen must be host:port");
}

}  // namespace dmp::platform
