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

#include "rmtlab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmtlab/error.hpp"

namespace rmtlab {

EnsembleSpec EnsembleSpec::uniform(int n, int l, int factors) {
  require(factors >= 1, "ensemble needs at least one factor");
  EnsembleSpec spec;
  spec.n = n;
  spec.truncations.assign(static_cast<std::size_t>(factors), l);
  spec.validate();
  return spec;
}

int EnsembleSpec::min_truncation() const {
  validate();
  return *std::min_element(truncations.begin(), truncations.end());
}

int EnsembleSpec::max_truncation() const {
  validate();
  return *std::max_element(truncations.begin(), truncations.end());
}

void EnsembleSpec::validate() const {
  require(n >= 1, "ensemble dimension n must be >= 1");
  require(!truncations.empty(), "ensemble needs at least one factor");
  for (int l : truncations) require(l >= 0, "truncation sizes must be >= 0");
}

MatrixR sample_ginibre(int rows, int cols, Philox& rng) {
  require(rows >= 1 && cols >= 1, "Ginibre dimensions must be positive");
  MatrixR g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  return g;
}

MatrixR sample_ginibre(int rows, int cols, RandomSeed seed) {
  Philox rng(seed);
  return sample_ginibre(rows, cols, rng);
}

namespace {

// Thin Q of a tall Gaussian matrix with the sign convention diag(R) > 0.
MatrixR haar_thin_q(const MatrixR& g) {
  Eigen::HouseholderQR<MatrixR> qr(g);
  const auto rows = g.rows();
  const auto cols = g.cols();
  MatrixR q = qr.householderQ() * MatrixR::Identity(rows, cols);
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

MatrixR sample_haar_orthogonal(int dim, Philox& rng) {
  require(dim >= 1, "Haar dimension must be >= 1");
  return haar_thin_q(sample_ginibre(dim, dim, rng));
}

MatrixR sample_haar_orthogonal(int dim, RandomSeed seed) {
  Philox rng(seed);
  return sample_haar_orthogonal(dim, rng);
}

MatrixR sample_haar_columns(int m, int k, Philox& rng) {
  require(m >= 1 && k >= 1 && k <= m, "Haar columns need 1 <= k <= m");
  return haar_thin_q(sample_ginibre(m, k, rng));
}

MatrixR sample_truncated_orthogonal(int n, int l, Philox& rng) {
  require(n >= 1, "truncated block size n must be >= 1");
  require(l >= 0, "truncation l must be >= 0");
  return sample_haar_columns(n + l, n, rng).topRows(n);
}

MatrixR sample_truncated_orthogonal(int n, int l, RandomSeed seed) {
  Philox rng(seed);
  return sample_truncated_orthogonal(n, l, rng);
}

double sample_log_beta(int n, int l, Philox& rng) {
  require(n >= 1, "log-Beta needs n >= 1");
  require(l >= 0, "log-Beta needs l >= 0");
  if (l == 0) return 0.0;
  double head = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    head += x * x;
  }
  double tail = 0.0;
  for (int i = 0; i < l; ++i) {
    const double x = rng.normal();
    tail += x * x;
  }
  return -std::log1p(tail / head);
}

double sample_log_beta(int n, int l, RandomSeed seed) {
  Philox rng(seed);
  return sample_log_beta(n, l, rng);
}

FrameK canonical_frame(int n, int k) {
  require(n >= 1, "frame ambient dimension must be >= 1");
  require(k >= 1 && k <= n,
          "frame size k=" + std::to_string(k) + " must satisfy 1 <= k <= n=" + std::to_string(n));
  return FrameK{n, k, MatrixR::Identity(n, k)};
}

}  // namespace rmtlab
