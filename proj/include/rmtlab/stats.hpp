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

#include <span>
#include <string_view>
#include <vector>

#include "rmtlab/ensembles.hpp"

namespace rmtlab {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Non-empty sample of finite reals, kept in insertion order and sorted.
class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values);

  std::size_t count() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> sorted() const noexcept { return sorted_; }
  double mean() const noexcept { return mean_; }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
  double mean_ = 0.0;
};

struct KSResult {
  double statistic = 0.0;
  std::vector<std::size_t> sample_sizes;
};

// Phi((x - mu) / sigma); sigma > 0.
double gaussian_cdf(double x, double mu = 0.0, double sigma = 1.0);
double gaussian_pdf(double x, double mu = 0.0, double sigma = 1.0);

// Exact sup distance to N(mu, sigma^2), both one-sided gaps at each order statistic.
KSResult ks_one_sample(const EmpiricalSample& sample, double mu = 0.0, double sigma = 1.0);

// Exact sup |F_a - F_b| by merging the sorted samples; ties advance together.
KSResult ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b);

// (1/n) sum (x_i - mean)^p with compensated summation, 1 <= p <= 8.
double central_moment(const EmpiricalSample& sample, int p);

// Unbiased (n - 1) sample variance; 0 for a single value.
double sample_variance(const EmpiricalSample& sample);

enum class Convention {
  kCorrected,  // (lambda - mu/2) / sqrt(Sigma/4)
  kPaper,      // (lambda - mu) / Sigma, the printed form, kept for comparison runs
};

Convention parse_convention(std::string_view name);
std::string_view to_string(Convention convention) noexcept;

// Throws degenerate-variance when every truncation is 0.
std::vector<double> standardize_lyapunov(std::span<const double> values, const EnsembleSpec& spec,
                                         Convention convention = Convention::kCorrected);

}  // namespace rmtlab
