// Copyright 2026 The rmtlab Authors.
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

#include <doctest.h>

#include <chrono>
#include <cmath>

#include "rmtlab/lyapunov.hpp"

using namespace rmtlab;

TEST_CASE("frame growth stays finite over a million factors") {
  const auto spec = EnsembleSpec::uniform(16, 4, 1'000'000);
  for (int k : {1, 16}) {
    const auto g = frame_growth(spec, k, RandomSeed{2026});
    CHECK(std::isfinite(g.value));
    CHECK(g.value < 0.0);
  }
}
