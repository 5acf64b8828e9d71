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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dmp::platform {

// One file per document: a `DMPDOC 1 <sha256-hex> <length>` header line
// followed by the body. Writes go through an atomic replace.
class DocumentStore {
 public:
  explicit DocumentStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // `name` is a relative path such as "records/sch01.jsonl".
  void put(const std::string& name, std::string_view body) const;
  // Throws Error(kNotFound) when absent and Error(kCorruptSnapshot) on a
  // header, length or checksum mismatch.
  std::string get(const std::string& name) const;
  bool exists(const std::string& name) const;
  // Names under a relative directory, sorted.
  std::vector<std::string> list(const std::string& dir) const;

  // Raw bytes, no header. Used for the encrypted local tables.
  void put_raw(const std::string& name, std::string_view bytes) const;
  std::string get_raw(const std::string& name) const;

 private:
  std::filesystem::path path_of(const std::string& name) const;

  std::filesystem::path root_;
};

std::string frame_document(std::string_view body);
// Throws Error(kCorruptSnapshot).
std::string unframe_document(std::string_view bytes);

}  // namespace dmp::platform
