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

#include "dmp/fed/codec.h"

#include <cmath>

#include "dmp/common/error.h"

namespace dmp::fed {

std::int64_t FixedPointCodec::encode(long double value) {
  if (!std::isfinite(value) || std::fabs(value) > kMaxAbs) {
    throw Error(ErrorCode::kEncodingOverflow, "value outside the fixed-point range");
  }
  // Integer and fractional parts are scaled separately so the round trip
  // stays exact across the whole range.
  long double whole = std::truncl(value);
  long double frac = value - whole;
  return static_cast<std::int64_t>(whole) * 1000000 + static_cast<std::int64_t>(std::llroundl(frac * kScale));
}

long double FixedPointCodec::decode(std::int64_t encoded) {
  return static_cast<long double>(encoded / 1000000) + static_cast<long double>(encoded % 1000000) / kScale;
}

std::vector<std::int64_t> FixedPointCodec::encode(std::span<const double> values) {
  std::vector<std::int64_t> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(encode(static_cast<long double>(v)));
  return out;
}

std::vector<double> FixedPointCodec::decode(std::span<const std::int64_t> encoded) {
  std::vector<double> out;
  out.reserve(encoded.size());
  for (auto e : encoded) out.push_back(static_cast<double>(decode(e)));
  return out;
}

}  // namespace dmp::fed
