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

#include "rmtlab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmtlab/error.hpp"

namespace rmtlab {

namespace {

constexpr double kAsymptoticThreshold = 10.0;

void require_positive_argument(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    fail(ErrorCode::kInvalidArgument, std::string(name) + " requires a finite x > 0");
}

}  // namespace

double digamma(double x) {
  require_positive_argument(x, "digamma");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  // ln x - 1/(2x) - sum_k B_2k / (2k x^2k), through x^-12.
  const double series =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760))))));
  return shift + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
  require_positive_argument(x, "trigamma");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1), through x^-13.
  const double series =
      inv * inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66 - inv2 * (691.0 / 2730))))));
  return shift + inv + 0.5 * inv2 + series;
}

BetaLogMoments beta_log_moments(int n, int l) {
  require(n >= 1, "beta_log_moments needs n >= 1");
  require(l >= 0, "beta_log_moments needs l >= 0");
  if (l == 0) return {};
  const double a = 0.5 * n;
  const double b = 0.5 * (n + l);
  return {digamma(a) - digamma(b), trigamma(a) - trigamma(b)};
}

AggregateMoments aggregate_moments(const EnsembleSpec& spec) {
  spec.validate();
  double mean_sum = 0.0;
  double var_sum = 0.0;
  for (int l : spec.truncations) {
    const auto m = beta_log_moments(spec.n, l);
    mean_sum += m.mean;
    var_sum += m.variance;
  }
  const double factors = spec.factors();
  return {mean_sum / factors, var_sum / (factors * factors)};
}

double concentration_rate(int n, int l) {
  require(n >= 1 && l >= 0, "concentration_rate needs n >= 1, l >= 0");
  const double nn = n;
  const double s = n + l;
  return nn * nn * (s + 2.0) / (s * s);
}

ConcentrationParams concentration_params(const EnsembleSpec& spec) {
  spec.validate();
  ConcentrationParams p;
  p.rates.reserve(spec.truncations.size());
  for (int l : spec.truncations) {
    p.rates.push_back(concentration_rate(spec.n, l));
    p.m_hat += 1.0 / p.rates.back();
  }
  p.m_min = concentration_rate(spec.n, spec.max_truncation());
  p.m_last = p.rates.back();
  p.p0 = p.m_last * p.m_last * p.m_hat;
  return p;
}

double latala_moment_bound(double p, const EnsembleSpec& spec, double c_const) {
  require(p >= 1.0, "latala_moment_bound needs p >= 1");
  require(c_const > 0.0, "constant C must be positive");
  const double m = concentration_params(spec).m_min;
  return c_const * (std::sqrt(p * spec.factors() / m) + p / m);
}

double prop4_tail_bound(double s, const EnsembleSpec& spec, double c_const) {
  require(s >= 0.0, "prop4_tail_bound needs s >= 0");
  require(c_const > 0.0, "constant c must be positive");
  const auto params = concentration_params(spec);
  const double exponent = c_const * spec.factors() * std::min(params.m_hat * s * s, params.m_last * s);
  return std::min(2.0, 2.0 * std::exp(-exponent));
}

double theorem1_ks_bound(const EnsembleSpec& spec, double c_const) {
  spec.validate();
  require(c_const > 0.0, "constant C must be positive");
  const int n = spec.n;
  const int factors = spec.factors();
  require(n >= 2, "KS bound needs n >= 2");
  require(factors > n, "KS bound needs N > n");
  const int l = spec.min_truncation();
  if (l == 0) fail(ErrorCode::kUndefinedBound, "KS bound divides by l = min truncation, which is 0");
  const double log_n = std::log(static_cast<double>(n));
  const double log_ratio = std::log(static_cast<double>(factors) / n);
  const double inner = 4.0 * c_const * log_n * log_n * log_ratio * log_ratio * n * static_cast<double>(n + l) /
                       (2.0 * l * static_cast<double>(factors));
  return std::sqrt(inner);
}

SkorskiParams skorski_params(double alpha, double beta) {
  require(alpha > 0.0 && beta > 0.0, "Beta shapes must be positive");
  const double s = alpha + beta;
  return {alpha * beta / (s * s * (s + 1.0)), 2.0 * (beta - alpha) / (s * (s + 2.0))};
}

double skorski_variance_proxy(int n, int l) {
  require(n >= 1 && l >= 0, "variance proxy needs n >= 1, l >= 0");
  return 1.0 / (2.0 * (n + l + 2));
}

double skorski_tail_bound(double alpha, double beta, double eps, TailSide side) {
  require(eps >= 0.0, "tail bound needs eps >= 0");
  const auto [v, c] = skorski_params(alpha, beta);
  const bool refined = side == TailSide::kUpper ? beta >= alpha : alpha >= beta;
  // For the lower tail c is negative in the refined regime; its magnitude
  // enters the Bernstein denominator.
  const double denom = refined ? 2.0 * (v + std::abs(c) * eps / 3.0) : 2.0 * v;
  return std::min(1.0, std::exp(-eps * eps / denom));
}

double frame_deviation_allowance(int n, int k, int factors, double eps) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(k >= 1 && k <= n, "frame size must satisfy 1 <= k <= n");
  require(factors >= 1, "N must be >= 1");
  return static_cast<double>(k) / (2.0 * factors) * std::log(static_cast<double>(n) / (k * eps * eps));
}

DeltaMethodLog delta_method_log(double mean_z, double var_z, double mu4_z) {
  require(mean_z > 0.0, "delta method needs E Z > 0");
  require(var_z >= 0.0 && mu4_z >= 0.0, "delta method needs non-negative central moments");
  const double m2 = mean_z * mean_z;
  DeltaMethodLog out;
  out.mean_log = std::log(mean_z);
  out.var_log = var_z / m2;
  out.mean_log_second_order = out.mean_log - 0.5 * out.var_log;
  out.mu4_log = mu4_z / (m2 * m2);
  return out;
}

}  // namespace rmtlab
