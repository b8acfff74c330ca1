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

#include "rmtlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rmtlab/error.hpp"
#include "rmtlab/moments.hpp"

namespace rmtlab {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
}

EmpiricalSample::EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), "empirical sample must be non-empty");
  CompensatedSum sum;
  for (double v : values_) {
    require(std::isfinite(v), "empirical sample values must be finite");
    sum.add(v);
  }
  mean_ = sum.value() / static_cast<double>(values_.size());
  sorted_ = values_;
  std::sort(sorted_.begin(), sorted_.end());
}

double gaussian_cdf(double x, double mu, double sigma) {
  require(sigma > 0.0, "gaussian_cdf needs sigma > 0");
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

double gaussian_pdf(double x, double mu, double sigma) {
  require(sigma > 0.0, "gaussian_pdf needs sigma > 0");
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

KSResult ks_one_sample(const EmpiricalSample& sample, double mu, double sigma) {
  require(sigma > 0.0, "ks_one_sample needs sigma > 0");
  const auto xs = sample.sorted();
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = gaussian_cdf(xs[i], mu, sigma);
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f), std::abs(static_cast<double>(i) / n - f)});
  }
  return {std::min(worst, 1.0), {xs.size()}};
}

KSResult ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b) {
  const auto xa = a.sorted();
  const auto xb = b.sorted();
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {worst, {xa.size(), xb.size()}};
}

double central_moment(const EmpiricalSample& sample, int p) {
  require(p >= 1 && p <= 8, "central_moment supports 1 <= p <= 8");
  const double mean = sample.mean();
  CompensatedSum sum;
  for (double v : sample.values()) {
    const double d = v - mean;
    double term = d;
    for (int e = 1; e < p; ++e) term *= d;
    sum.add(term);
  }
  return sum.value() / static_cast<double>(sample.count());
}

double sample_variance(const EmpiricalSample& sample) {
  const auto n = sample.count();
  if (n < 2) return 0.0;
  return central_moment(sample, 2) * static_cast<double>(n) / static_cast<double>(n - 1);
}

Convention parse_convention(std::string_view name) {
  if (name == "corrected") return Convention::kCorrected;
  if (name == "paper") return Convention::kPaper;
  fail(ErrorCode::kInvalidArgument, "unknown convention '" + std::string(name) + "'");
}

std::string_view to_string(Convention convention) noexcept {
  return convention == Convention::kCorrected ? "corrected" : "paper";
}

std::vector<double> standardize_lyapunov(std::span<const double> values, const EnsembleSpec& spec,
                                         Convention convention) {
  const auto moments = aggregate_moments(spec);
  if (!(moments.sigma2 > 0.0))
    fail(ErrorCode::kDegenerateVariance, "all truncations are 0: the top exponent has zero variance");
  double center = moments.mu;
  double scale = moments.sigma2;
  if (convention == Convention::kCorrected) {
    center = 0.5 * moments.mu;
    scale = std::sqrt(0.25 * moments.sigma2);
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - center) / scale);
  return out;
}

}  // namespace rmtlab
