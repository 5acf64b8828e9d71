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

#include <cstdint>
#include <span>
#include <vector>

namespace dmp::fed {

// Fixed-point encoding of reals as signed 64-bit integers.
struct FixedPointCodec {
  static constexpr long double kScale = 1e6L;
  static constexpr long double kMaxAbs = 9e12L;

  // Rounds to nearest. Throws Error(kEncodingOverflow) when |value| > kMaxAbs
  // or value is not finite.
  static std::int64_t encode(long double value);
  static long double decode(std::int64_t encoded);

  static std::vector<std::int64_t> encode(std::span<const double> values);
  static std::vector<double> decode(std::span<const std::int64_t> encoded);
};

}  // namespace dmp::fed
