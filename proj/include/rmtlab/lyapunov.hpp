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

// Lyapunov spectra and fixed-frame growth rates of X = A_N ... A_1 where each
// A_t is a truncated Haar orthogonal matrix.

#include <string_view>
#include <vector>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/random.hpp"

namespace rmtlab {

enum class SpectrumMode {
  kQrAccumulate,  // re-orthonormalize every step, accumulate log|R_ii|
  kSvdRescale,    // log singular values of the product itself (validation, N <= 1e4)
};

SpectrumMode parse_spectrum_mode(std::string_view name);
std::string_view to_string(SpectrumMode mode) noexcept;

inline constexpr int kSvdRescaleMaxFactors = 10000;

struct LyapunovSpectrum {
  EnsembleSpec spec;
  std::vector<double> lambdas;      // descending
  std::vector<double> accumulated;  // per column index, unsorted, already divided by N
  double log_det_accum = 0.0;       // sum over steps of log|det A_t|, computed by LU
};

struct GrowthSample {
  EnsembleSpec spec;
  int k = 1;
  double value = 0.0;  // (1/N) log of the k-volume growth of the canonical frame
};

// Both modes consume the random stream identically, so for a shared seed they
// see the same factors A_1..A_N.
LyapunovSpectrum lyapunov_spectrum(const EnsembleSpec& spec, RandomSeed seed,
                                   SpectrumMode mode = SpectrumMode::kQrAccumulate);

// Exact log singular values of a product given as its factors, computed with a
// graded U D T factorization so the smallest singular values survive even when
// they are far below the largest. Returned descending.
std::vector<double> log_singular_values_of_product(const std::vector<MatrixR>& factors);

GrowthSample frame_growth(const EnsembleSpec& spec, int k, RandomSeed seed);

// (1/2N) sum_i T_i with T_i ~ log Beta(n/2, l_i/2) drawn independently.
double telescoped_growth(const EnsembleSpec& spec, RandomSeed seed);

}  // namespace rmtlab
