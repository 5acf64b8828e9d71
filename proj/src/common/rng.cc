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

#include "dmp/common/rng.h"

#include <cmath>
#include <numbers>
#include <string>

#include "dmp/common/crypto.h"

namespace dmp {

Rng Rng::derive(std::uint64_t seed, std::string_view label) {
  std::string msg;
  for (int shift = 56; shift >= 0; shift -= 8) msg.push_back(static_cast<char>(seed >> shift));
  msg.append(label);
  auto d = crypto::sha256(msg);
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s = (s << 8) | d[i];
  return Rng(s);
}

double Rng::normal(double mean, double sd) {
  // Box-Muller, one draw per call.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  double limit = std::exp(-mean);
  double prod = uniform();
  int k = 0;
  while (prod > limit) {
    prod *= uniform();
    ++k;
  }
  return k;
}

}  // namespace dmp
