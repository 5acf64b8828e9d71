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
#include <random>
#include <string_view>

namespace dmp {

// mt19937_64 with portable derived distributions, so generated data does
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Seed derived from SHA-256 over (seed, label).
  static Rng derive(std::uint64_t seed, std::string_view label);

  std::uint64_t next() { return engine_(); }
  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  bool bernoulli(double p) { return uniform() < p; }
  double normal(double mean = 0.0, double sd = 1.0);
  int poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dmp
