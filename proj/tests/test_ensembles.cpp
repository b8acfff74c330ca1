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

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/stats.hpp"
#include "support.hpp"

using namespace rmtlab;

namespace {

double orthogonality_defect(const MatrixR& q) {
  const Eigen::MatrixXd g = q.transpose() * q;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("ginibre sampling is deterministic") {
  CHECK(sample_ginibre(1, 1, RandomSeed{5})(0, 0) == sample_ginibre(1, 1, RandomSeed{5})(0, 0));
  CHECK(sample_ginibre(3, 4, RandomSeed{5}) == sample_ginibre(3, 4, RandomSeed{5}));
  CHECK(sample_ginibre(3, 4, RandomSeed{5}) != sample_ginibre(3, 4, RandomSeed{6}));
}

TEST_CASE("ginibre entries are standard normal") {
  const MatrixR g = sample_ginibre(100, 1000, RandomSeed{11});
  std::vector<double> xs(g.data(), g.data() + g.size());
  const auto mv = testing::mean_var(xs);
  CHECK(std::abs(mv.mean) <= 3.0 / std::sqrt(1e5));
  CHECK(std::abs(mv.variance - 1.0) <= 3.0 * std::sqrt(2.0 / 1e5));
}

TEST_CASE("zero dimensions are rejected") {
  CHECK(testing::error_code_of([] { sample_ginibre(0, 3, RandomSeed{1}); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { sample_ginibre(3, 0, RandomSeed{1}); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { sample_haar_orthogonal(0, RandomSeed{1}); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { sample_truncated_orthogonal(0, 2, RandomSeed{1}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { sample_log_beta(0, 2, RandomSeed{1}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("haar matrices are orthogonal") {
  for (int dim : {1, 2, 3, 8, 17, 32, 64}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const MatrixR q = sample_haar_orthogonal(dim, RandomSeed{s});
      REQUIRE(q.rows() == dim);
      CHECK(orthogonality_defect(q) <= 1e-10);
    }
  }
}

TEST_CASE("haar dimension 1 is a fair sign") {
  int plus = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const double v = sample_haar_orthogonal(1, derive_trial_seed(RandomSeed{2}, s))(0, 0);
    REQUIRE(std::abs(v) == 1.0);
    if (v > 0) ++plus;
  }
  CHECK(std::abs(plus / 1e4 - 0.5) <= 0.02);
}

TEST_CASE("haar dimension 2 has centred first entry") {
  std::vector<double> xs;
  for (std::uint64_t s = 0; s < 10000; ++s) xs.push_back(sample_haar_orthogonal(2, derive_trial_seed(RandomSeed{3}, s))(0, 0));
  const auto mv = testing::mean_var(xs);
  CHECK(std::abs(mv.mean) <= 3.0 * mv.se);
}

TEST_CASE("haar squared entries average to 1/dim") {
  Philox rng(RandomSeed{8});
  std::vector<double> xs;
  for (int t = 0; t < 100000; ++t) {
    const MatrixR q = sample_haar_orthogonal(8, rng);
    xs.push_back(q(0, 0) * q(0, 0));
  }
  const auto mv = testing::mean_var(xs);
  CHECK(std::abs(mv.mean - 0.125) <= 3.0 * mv.se);
}

TEST_CASE("haar columns are orthonormal") {
  Philox rng(RandomSeed{1});
  const MatrixR c = sample_haar_columns(9, 3, rng);
  CHECK(c.rows() == 9);
  CHECK(c.cols() == 3);
  CHECK(orthogonality_defect(c) <= 1e-12);
}

TEST_CASE("untruncated block is orthogonal") {
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(orthogonality_defect(sample_truncated_orthogonal(5, 0, RandomSeed{s})) <= 1e-10);
}

TEST_CASE("truncated blocks are contractions") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const MatrixR a = sample_truncated_orthogonal(4, 3, RandomSeed{s});
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    CHECK(svd.singularValues()(0) <= 1.0 + 1e-10);
  }
}

TEST_CASE("projection norms follow the Beta law") {
  for (auto [n, l] : {std::pair{2, 2}, std::pair{4, 4}, std::pair{4, 2}}) {
    CAPTURE(n);
    CAPTURE(l);
    std::vector<double> blocks;
    std::vector<double> betas;
    Philox rng_a(RandomSeed{100u + static_cast<unsigned>(n * 10 + l)});
    Philox rng_b(RandomSeed{200u + static_cast<unsigned>(n * 10 + l)});
    for (int t = 0; t < 20000; ++t) {
      blocks.push_back(sample_truncated_orthogonal(n, l, rng_a).col(0).squaredNorm());
      betas.push_back(std::exp(sample_log_beta(n, l, rng_b)));
    }
    CHECK(ks_two_sample(EmpiricalSample(blocks), EmpiricalSample(betas)).statistic <= 0.025);
  }
}

TEST_CASE("log-beta is exactly zero without truncation") {
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(sample_log_beta(3, 0, RandomSeed{s}) == 0.0);
}

TEST_CASE("log-beta sample means") {
  Philox rng(RandomSeed{77});
  std::vector<double> a;
  std::vector<double> b;
  for (int t = 0; t < 100000; ++t) {
    a.push_back(sample_log_beta(2, 2, rng));
    b.push_back(sample_log_beta(4, 4, rng));
  }
  const auto ma = testing::mean_var(a);
  const auto mb = testing::mean_var(b);
  CHECK(std::abs(ma.mean + 1.0) <= 3.0 * ma.se);
  CHECK(std::abs(mb.mean + 5.0 / 6.0) <= 3.0 * mb.se);
}

TEST_CASE("canonical frames") {
  const FrameK e1 = canonical_frame(3, 1);
  CHECK(e1.columns.rows() == 3);
  CHECK(e1.columns.cols() == 1);
  CHECK(e1.columns(0, 0) == 1.0);
  CHECK(e1.columns(1, 0) == 0.0);
  CHECK(e1.columns(2, 0) == 0.0);
  CHECK(canonical_frame(3, 3).columns == MatrixR::Identity(3, 3));
  CHECK(testing::error_code_of([] { canonical_frame(2, 3); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("ensemble spec accessors and validation") {
  EnsembleSpec spec{3, {1, 4, 2}};
  CHECK(spec.factors() == 3);
  CHECK(spec.min_truncation() == 1);
  CHECK(spec.max_truncation() == 4);
  CHECK(EnsembleSpec::uniform(4, 2, 5).truncations == std::vector<int>(5, 2));
  CHECK(testing::error_code_of([] { EnsembleSpec{0, {1}}.validate(); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { EnsembleSpec{2, {}}.validate(); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { EnsembleSpec{2, {1, -1}}.validate(); }) == ErrorCode::kInvalidArgument);
}
