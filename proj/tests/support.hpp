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

#pragma once

#include <cmath>
#include <vector>

#include "rmtlab/error.hpp"
#include "rmtlab/stats.hpp"

namespace rmtlab::testing {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se = 0.0;        // standard error of the mean
};

inline MeanVar mean_var(const std::vector<double>& xs) {
  const EmpiricalSample s(xs);
  const double var = xs.size() > 1 ? sample_variance(s) : 0.0;
  return {s.mean(), var, std::sqrt(var / static_cast<double>(xs.size()))};
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace rmtlab::testing
