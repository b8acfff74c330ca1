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

// Closed-form moments of log-Beta variables and the concentration bounds
// built on them. Constants the theory leaves unspecified (C, c) are caller
// parameters; only the shape of those bounds is meaningful.

#include <vector>

#include "rmtlab/ensembles.hpp"

namespace rmtlab {

// Absolute error <= 1e-12 for x > 0. Throws invalid-argument for x <= 0.
double digamma(double x);
double trigamma(double x);

struct BetaLogMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean and variance of log Beta(n/2, l/2); (0, 0) when l = 0.
BetaLogMoments beta_log_moments(int n, int l);

struct AggregateMoments {
  double mu = 0.0;      // (1/N) sum of per-factor means
  double sigma2 = 0.0;  // (1/N^2) sum of per-factor variances
};

AggregateMoments aggregate_moments(const EnsembleSpec& spec);

// Sub-Gaussian rate of the centred log-Beta factor i: n^2 (n + l + 2) / (n + l)^2.
double concentration_rate(int n, int l);

struct ConcentrationParams {
  std::vector<double> rates;  // M_i, one per factor
  double m_min = 0.0;         // M evaluated at the largest truncation L
  double m_last = 0.0;        // M_N
  double m_hat = 0.0;         // sum_j 1 / M_j
  double p0 = 0.0;            // M_N^2 * m_hat
};

ConcentrationParams concentration_params(const EnsembleSpec& spec);

// C (sqrt(p N / M) + p / M), p >= 1.
double latala_moment_bound(double p, const EnsembleSpec& spec, double c_const = 1.0);

// 2 exp(-c N min(M_hat s^2, M_N s)), evaluated as printed and capped at 2.
double prop4_tail_bound(double s, const EnsembleSpec& spec, double c_const = 1.0);

// Kolmogorov-Smirnov bound on the standardized top exponent:
//   sqrt(4 C log^2 n log^2(N/n) n (n + l) / (2 l N)),  l = min truncation.
// Requires N > n >= 2; l = 0 is an undefined-bound error.
double theorem1_ks_bound(const EnsembleSpec& spec, double c_const = 1.0);

struct SkorskiParams {
  double v = 0.0;
  double c = 0.0;
};

SkorskiParams skorski_params(double alpha, double beta);

// Loose variance proxy 1 / (2 (n + l + 2)) for Beta(n/2, l/2); dominates the exact v.
double skorski_variance_proxy(int n, int l);

enum class TailSide { kUpper, kLower };

// Bernstein-type bound on P(X > EX + eps) (upper) or P(X < EX - eps) (lower)
// for X ~ Beta(alpha, beta). The refined exponent with the c eps / 3 term is
// used only in its regime (beta >= alpha upper, alpha >= beta lower).
double skorski_tail_bound(double alpha, double beta, double eps, TailSide side);

// Deviation radius (k / 2N) log(n / (k eps^2)) for eps in (0, 1).
double frame_deviation_allowance(int n, int k, int factors, double eps);

struct DeltaMethodLog {
  double mean_log = 0.0;             // log E Z
  double mean_log_second_order = 0.0;  // log E Z - Var Z / (2 (E Z)^2)
  double var_log = 0.0;              // Var Z / (E Z)^2
  double mu4_log = 0.0;              // mu_4(Z) / (E Z)^4
};

DeltaMethodLog delta_method_log(double mean_z, double var_z, double mu4_z);

}  // namespace rmtlab
