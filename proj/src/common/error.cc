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

#include "dmp/common/error.h"

namespace dmp {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTokenMismatch: return "TokenMismatch";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kCollisionDetected: return "CollisionDetected";
    case ErrorCode::kAuthenticationFailed: return "AuthenticationFailed";
    case ErrorCode::kNoHistory: return "NoHistory";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kInvalidBins: return "InvalidBins";
    case ErrorCode::kUnknownTerm: return "UnknownTerm";
    case ErrorCode::kEmptyHoldout: return "EmptyHoldout";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kNoInteractions: return "NoInteractions";
    case ErrorCode::kEncodingOverflow: return "EncodingOverflow";
    case ErrorCode::kMissingSchool: return "MissingSchool";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kUnknownStudent: return "UnknownStudent";
    case ErrorCode::kEmptyCatalog: return "EmptyCatalog";
    case ErrorCode::kCorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kBusy: return "Busy";
  }
  return "Unknown";
}

}  // namespace dmp
