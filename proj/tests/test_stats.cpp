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

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "rmtlab/random.hpp"
#include "rmtlab/stats.hpp"
#include "support.hpp"

using namespace rmtlab;

TEST_CASE("compensated summation") {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 2.0);
  CompensatedSum t;
  for (int i = 0; i < 10; ++i) t.add(0.1);
  CHECK(t.value() == 1.0);
}

TEST_CASE("empirical samples keep values and a sorted copy") {
  const EmpiricalSample s({3.0, -1.0, 2.0});
  CHECK(s.count() == 3);
  CHECK(s.values()[0] == 3.0);
  CHECK(std::is_sorted(s.sorted().begin(), s.sorted().end()));
  CHECK(s.mean() == doctest::Approx(4.0 / 3.0));
  CHECK(testing::error_code_of([] { EmpiricalSample(std::vector<double>{}); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { EmpiricalSample({1.0, INFINITY}); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { EmpiricalSample({std::nan("")}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("gaussian cdf") {
  CHECK(gaussian_cdf(0.0) == 0.5);
  CHECK(std::abs(gaussian_cdf(1.959964) - 0.975) <= 1e-6);
  const boost::math::normal_distribution<double> oracle(0.3, 2.0);
  for (double x = -12.0; x <= 12.0; x += 0.37) {
    CHECK(std::abs(gaussian_cdf(x) + gaussian_cdf(-x) - 1.0) <= 1e-12);
    CHECK(std::abs(gaussian_cdf(x, 0.3, 2.0) - boost::math::cdf(oracle, x)) <= 1e-10);
    CHECK(std::abs(gaussian_pdf(x, 0.3, 2.0) - boost::math::pdf(oracle, x)) <= 1e-12);
  }
  CHECK(testing::error_code_of([] { gaussian_cdf(0.0, 0.0, 0.0); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { gaussian_cdf(0.0, 0.0, -1.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("one-sample KS") {
  CHECK(ks_one_sample(EmpiricalSample({0.0})).statistic == doctest::Approx(0.5));
  const boost::math::normal_distribution<double> standard;
  std::vector<double> quantiles;
  for (int i = 1; i <= 100; ++i) quantiles.push_back(boost::math::quantile(standard, (i - 0.5) / 100.0));
  const auto r = ks_one_sample(EmpiricalSample(quantiles));
  CHECK(r.statistic == doctest::Approx(0.005).epsilon(1e-9));
  CHECK(r.sample_sizes == std::vector<std::size_t>{100});
  // Far from the reference law the statistic saturates at 1.
  CHECK(ks_one_sample(EmpiricalSample({100.0, 101.0})).statistic == doctest::Approx(1.0));
  CHECK(testing::error_code_of([] { ks_one_sample(EmpiricalSample({0.0}), 0.0, 0.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("one-sample KS of genuine normal draws is small") {
  int small = 0;
  for (std::uint64_t rep = 0; rep < 3; ++rep) {
    Philox rng(RandomSeed{1000 + rep});
    std::vector<double> xs(10000);
    for (auto& x : xs) x = rng.normal();
    const double d = ks_one_sample(EmpiricalSample(xs)).statistic;
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    if (d <= 0.025) ++small;
  }
  CHECK(small >= 2);
}

TEST_CASE("two-sample KS") {
  const EmpiricalSample a({1.0, 2.0});
  const EmpiricalSample b({1.5});
  CHECK(ks_two_sample(a, b).statistic == doctest::Approx(0.5));
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(EmpiricalSample({1.0, 2.0}), EmpiricalSample({3.0, 4.0, 5.0})).statistic == 1.0);
  // Ties across samples move both empirical CDFs together.
  CHECK(ks_two_sample(EmpiricalSample({1.0, 1.0, 2.0}), EmpiricalSample({1.0, 2.0, 2.0})).statistic ==
        doctest::Approx(1.0 / 3.0));
  const auto r = ks_two_sample(a, b);
  CHECK(r.sample_sizes == std::vector<std::size_t>{2, 1});
}

TEST_CASE("two-sample KS is symmetric and matches a brute-force oracle") {
  Philox rng(RandomSeed{44});
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> xs(17 + rep);
    std::vector<double> ys(5 + 2 * rep);
    for (auto& x : xs) x = std::round(rng.normal() * 4.0) / 4.0;  // plenty of ties
    for (auto& y : ys) y = std::round((rng.normal() + 0.3) * 4.0) / 4.0;
    const EmpiricalSample a(xs);
    const EmpiricalSample b(ys);
    const double d = ks_two_sample(a, b).statistic;
    CHECK(d == ks_two_sample(b, a).statistic);
    double brute = 0.0;
    std::vector<double> points = xs;
    points.insert(points.end(), ys.begin(), ys.end());
    for (double t : points) {
      const double fa = static_cast<double>(std::count_if(xs.begin(), xs.end(), [t](double x) { return x <= t; })) / xs.size();
      const double fb = static_cast<double>(std::count_if(ys.begin(), ys.end(), [t](double y) { return y <= t; })) / ys.size();
      brute = std::max(brute, std::abs(fa - fb));
    }
    CHECK(d == doctest::Approx(brute).epsilon(1e-14));
  }
}

TEST_CASE("central moments") {
  CHECK(central_moment(EmpiricalSample({-1.0, 1.0}), 2) == 1.0);
  CHECK(central_moment(EmpiricalSample({-1.0, 1.0}), 4) == 1.0);
  CHECK(central_moment(EmpiricalSample({-1.0, 1.0}), 3) == 0.0);
  Philox rng(RandomSeed{5});
  std::vector<double> xs(10000);
  for (auto& x : xs) x = 1e3 + rng.normal() * 1e-2;
  const EmpiricalSample s(xs);
  CHECK(std::abs(central_moment(s, 1)) <= 1e-12 * 1e3);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double two_pass = 0.0;
  for (double x : xs) two_pass += (x - mean) * (x - mean);
  two_pass /= xs.size();
  CHECK(central_moment(s, 2) == doctest::Approx(two_pass).epsilon(1e-12));
  CHECK(sample_variance(s) == doctest::Approx(two_pass * xs.size() / (xs.size() - 1.0)).epsilon(1e-12));
  CHECK(sample_variance(EmpiricalSample({4.0})) == 0.0);
  for (int p : {0, 9})
    CHECK(testing::error_code_of([&] { central_moment(s, p); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("conventions parse") {
  CHECK(parse_convention("paper") == Convention::kPaper);
  CHECK(parse_convention("corrected") == Convention::kCorrected);
  CHECK(to_string(Convention::kPaper) == "paper");
  CHECK(testing::error_code_of([] { parse_convention("other"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("lyapunov standardization") {
  const auto spec = EnsembleSpec::uniform(4, 4, 2000);
  const double mu = -5.0 / 6.0;
  const double sigma2 = 13.0 / 36.0 / 2000.0;
  const std::vector<double> values{mu / 2.0, mu / 2.0 + std::sqrt(sigma2 / 4.0), mu};
  const auto z = standardize_lyapunov(values, spec);
  CHECK(z[0] == doctest::Approx(0.0));
  CHECK(z[1] == doctest::Approx(1.0));
  const auto p = standardize_lyapunov(values, spec, Convention::kPaper);
  CHECK(p[2] == doctest::Approx(0.0));
  CHECK(p[0] == doctest::Approx((-mu / 2.0) / sigma2));
  CHECK(testing::error_code_of([&] { standardize_lyapunov(values, EnsembleSpec::uniform(4, 0, 10)); }) ==
        ErrorCode::kDegenerateVariance);
}
