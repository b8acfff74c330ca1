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

// Samplers for the Ginibre, Haar orthogonal and truncated orthogonal
// ensembles, plus the log-Beta reference variables.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "rmtlab/random.hpp"

namespace rmtlab {

using MatrixR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorR = Eigen::VectorXd;

// Product ensemble: N factors, factor i is the top n x n block of a Haar
// orthogonal matrix of size n + truncations[i].
struct EnsembleSpec {
  int n = 1;
  std::vector<int> truncations;

  static EnsembleSpec uniform(int n, int l, int factors);

  int factors() const noexcept { return static_cast<int>(truncations.size()); }
  int min_truncation() const;  // l
  int max_truncation() const;  // L

  // Throws invalid-argument unless n >= 1, N >= 1 and every l_i >= 0.
  void validate() const;
};

// k orthonormal vectors in R^n, stored as the columns of an n x k matrix.
struct FrameK {
  int n = 0;
  int k = 0;
  MatrixR columns;
};

MatrixR sample_ginibre(int rows, int cols, RandomSeed seed);
MatrixR sample_ginibre(int rows, int cols, Philox& rng);

// Q factor of the QR decomposition of a Ginibre matrix, with column signs
// chosen so that diag(R) > 0. Plain QR is not Haar distributed.
MatrixR sample_haar_orthogonal(int dim, RandomSeed seed);
MatrixR sample_haar_orthogonal(int dim, Philox& rng);

// First k columns of a Haar orthogonal m x m matrix (m x k). Same law as the
// leading columns of sample_haar_orthogonal(m), at O(m k^2) cost.
MatrixR sample_haar_columns(int m, int k, Philox& rng);

// Top-left n x n block of a Haar orthogonal (n + l) x (n + l) matrix.
MatrixR sample_truncated_orthogonal(int n, int l, RandomSeed seed);
MatrixR sample_truncated_orthogonal(int n, int l, Philox& rng);

// One draw of log Beta(n/2, l/2) as the log of the squared-norm share of the
// first n coordinates of a standard Gaussian (n + l)-vector. l = 0 gives 0.
double sample_log_beta(int n, int l, RandomSeed seed);
double sample_log_beta(int n, int l, Philox& rng);

FrameK canonical_frame(int n, int k);

}  // namespace rmtlab
