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

namespace dmp::files {

// Writes to a sibling temp file, fsyncs it, then renames over `path`.
// Readers observe either the old or the new content, never a mix.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Throws Error(kIo) when the file cannot be read.
std::string read_all(const std::filesystem::path& path);

}  // namespace dmp::files
