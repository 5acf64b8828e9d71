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

#include <map>
#include <memory>
#include <string>
#include <thread>

#include "dmp/common/error.h"
#include "dmp/platform/platform.h"
#include "json.hpp"

namespace dmp::platform {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  // Multipart form fields and file contents by field name.
  std::map<std::string, std::string> form;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Routes one request. Errors map to 400 (validation), 404 (unknown token,
// class or run), 409 (busy) and 500 (storage).
ApiResponse handle_request(Platform& platform, const ApiRequest& request);

int http_status(ErrorCode code);

// cpp-httplib binding of handle_request.
class HttpServer {
 public:
  explicit HttpServer(Platform& platform);
  ~HttpServer();

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port. Throws Error(kIo) when binding fails.
  int start(const std::string& host, int port);
  // Blocks serving on the calling thread.
  void listen_blocking(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dmp::platform
