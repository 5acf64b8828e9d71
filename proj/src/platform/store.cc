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

#include "dmp/platform/store.h"

#include <algorithm>
#include <charconv>
#include <vector>

#include "dmp/common/crypto.h"
#include "dmp/common/error.h"
#include "dmp/common/files.h"

namespace dmp::platform {

namespace {
constexpr std::string_view kMagic = "DMPDOC 1 ";
}

std::string frame_document(std::string_view body) {
  auto digest = crypto::to_hex(crypto::sha256(body));
  std::string out(kMagic);
  out += digest;
  out += ' ';
  out += std::to_string(body.size());
  out += '\n';
  out.append(body);
  return out;
}

std::string unframe_document(std::string_view bytes) {
  auto newline = bytes.find('\n');
  if (newline == std::string_view::npos || !bytes.starts_with(kMagic)) {
    throw Error(ErrorCode::kCorruptSnapshot, "missing document header");
  }
  auto header = bytes.substr(kMagic.size(), newline - kMagic.size());
  auto space = header.find(' ');
  if (space != 64) throw Error(ErrorCode::kCorruptSnapshot, "malformed document header");
  auto digest = header.substr(0, space);
  std::size_t length = 0;
  auto len_text = header.substr(space + 1);
  auto [p, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
  if (ec != std::errc() || p != len_text.data() + len_text.size()) {
    throw Error(ErrorCode::kCorruptSnapshot, "malformed document length");
  }
  auto body = bytes.substr(newline + 1);
  if (body.size() != length) throw Error(ErrorCode::kCorruptSnapshot, "document length mismatch");
  if (crypto::to_hex(crypto::sha256(body)) != digest) {
    throw Error(ErrorCode::kCorruptSnapshot, "document checksum mismatch");
  }
  return std::string(body);
}

DocumentStore::DocumentStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path DocumentStore::path_of(const std::string& name) const {
  std::filesystem::path rel(name);
  if (rel.is_absolute() || name.find("..") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "document names must be relative");
  }
  return root_ / rel;
}

void DocumentStore::put(const std::string& name, std::string_view body) const {
  put_raw(name, frame_document(body));
}

std::string DocumentStore::get(const std::string& name) const {
  return unframe_document(get_raw(name));
}

bool DocumentStore::exists(const std::string& name) const { return std::filesystem::exists(path_of(name)); }

std::vector<std::string> DocumentStore::list(const std::string& dir) const {
  std::vector<std::string> names;
  auto base = path_of(dir);
  if (!std::filesystem::is_directory(base)) return names;
  for (const auto& entry : std::filesystem::directory_iterator(base)) {
    if (!entry.is_regular_file()) continue;
    auto file = entry.path().filename().string();
    if (file.find(".tmp") != std::string::npos) continue;
    names.push_back(dir + "/" + file);
  }
  std::sort(names.begin(), names.end());
  return names;
}

void DocumentStore::put_raw(const std::string& name, std::string_view bytes) const {
  auto path = path_of(name);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + path.parent_path().string() + ": " + ec.message());
  files::write_atomic(path, bytes);
}

std::string DocumentStore::get_raw(const std::string& name) const {
  auto path = path_of(name);
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kNotFound, "no document " + name);
  return files::read_all(path);
}

}  // namespace dmp::platform
