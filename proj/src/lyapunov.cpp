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

#include "rmtlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rmtlab/error.hpp"

namespace rmtlab {

SpectrumMode parse_spectrum_mode(std::string_view name) {
  if (name == "qr-accumulate") return SpectrumMode::kQrAccumulate;
  if (name == "svd-rescale") return SpectrumMode::kSvdRescale;
  fail(ErrorCode::kInvalidArgument, "unknown spectrum mode '" + std::string(name) + "'");
}

std::string_view to_string(SpectrumMode mode) noexcept {
  return mode == SpectrumMode::kQrAccumulate ? "qr-accumulate" : "svd-rescale";
}

namespace {

double log_abs_det(const MatrixR& a) {
  Eigen::PartialPivLU<MatrixR> lu(a);
  const auto& packed = lu.matrixLU();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) acc += std::log(std::abs(packed(i, i)));
  return acc;
}

std::vector<int> order_descending(const std::vector<double>& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)]; });
  return order;
}

// QR of M diag(exp(logd)) without ever forming the scaled matrix. Columns are
// pre-sorted by logd so that
//   M D P = Q R D_p = Q D' W,   D' = |diag R| D_p,   W = D'^{-1} R D_p,
// and every entry of W is a ratio exp(logd_j - logd_i) <= 1 times R_ij/|R_ii|.
struct GradedQr {
  MatrixR q;
  std::vector<double> logd;
  MatrixR w;
  std::vector<int> perm;  // column j of M P is column perm[j] of M
};

GradedQr graded_qr(const MatrixR& m, const std::vector<double>& logd) {
  const auto n = m.cols();
  GradedQr out;
  out.perm = order_descending(logd);
  MatrixR permuted(m.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) permuted.col(j) = m.col(out.perm[static_cast<std::size_t>(j)]);
  Eigen::HouseholderQR<MatrixR> qr(permuted);
  const auto& r = qr.matrixQR();
  out.q = qr.householderQ() * MatrixR::Identity(m.rows(), n);
  out.logd.resize(static_cast<std::size_t>(n));
  out.w = MatrixR::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rii = std::abs(r(i, i));
    if (rii == 0.0) fail(ErrorCode::kDegenerateRealization, "rank collapse in graded QR");
    const double logd_i = logd[static_cast<std::size_t>(out.perm[static_cast<std::size_t>(i)])];
    out.logd[static_cast<std::size_t>(i)] = std::log(rii) + logd_i;
    for (Eigen::Index j = i; j < n; ++j) {
      const double logd_j = logd[static_cast<std::size_t>(out.perm[static_cast<std::size_t>(j)])];
      out.w(i, j) = r(i, j) / rii * std::exp(logd_j - logd_i);
    }
  }
  return out;
}

double max_off_diagonal(const MatrixR& w) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (i != j) worst = std::max(worst, std::abs(w(i, j)));
  return worst;
}

// Log singular values of diag(exp(logd)) * t.
std::vector<double> graded_log_singular_values(std::vector<double> logd, MatrixR t) {
  constexpr int kMaxSweeps = 200;
  constexpr double kConverged = 1e-15;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    // s(D T) = s(T^T D); one graded QR of T^T D is a zero-shift QR sweep.
    GradedQr g = graded_qr(t.transpose(), logd);
    logd = std::move(g.logd);
    t = std::move(g.w);
    if (max_off_diagonal(t) <= kConverged) {
      std::sort(logd.begin(), logd.end(), std::greater<>());
      return logd;
    }
  }
  // Nearly degenerate singular values: the remaining grading is mild, so a
  // direct SVD of the rescaled matrix is accurate.
  const double top = *std::max_element(logd.begin(), logd.end());
  MatrixR scaled = t;
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) scaled.row(i) *= std::exp(logd[static_cast<std::size_t>(i)] - top);
  Eigen::JacobiSVD<MatrixR> svd(scaled);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (!(s > 0.0)) fail(ErrorCode::kInternal, "singular value underflow in svd-rescale");
    out.push_back(std::log(s) + top);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// Product state X = U diag(exp(logd)) T.
struct GradedProduct {
  explicit GradedProduct(int n)
      : u(MatrixR::Identity(n, n)), logd(static_cast<std::size_t>(n), 0.0), t(MatrixR::Identity(n, n)) {}

  void multiply_left(const MatrixR& a) {
    GradedQr g = graded_qr(a * u, logd);
    MatrixR permuted_t(t.rows(), t.cols());
    for (Eigen::Index i = 0; i < t.rows(); ++i) permuted_t.row(i) = t.row(g.perm[static_cast<std::size_t>(i)]);
    u = std::move(g.q);
    logd = std::move(g.logd);
    t = g.w * permuted_t;
  }

  std::vector<double> log_singular_values() const { return graded_log_singular_values(logd, t); }

  MatrixR u;
  std::vector<double> logd;
  MatrixR t;
};

}  // namespace

std::vector<double> log_singular_values_of_product(const std::vector<MatrixR>& factors) {
  require(!factors.empty(), "product needs at least one factor");
  const auto n = factors.front().rows();
  GradedProduct product(static_cast<int>(n));
  for (const auto& a : factors) {
    require(a.rows() == n && a.cols() == n, "product factors must be square and equal-sized");
    product.multiply_left(a);
  }
  return product.log_singular_values();
}

LyapunovSpectrum lyapunov_spectrum(const EnsembleSpec& spec, RandomSeed seed, SpectrumMode mode) {
  spec.validate();
  const int n = spec.n;
  const int factors = spec.factors();
  if (mode == SpectrumMode::kSvdRescale && factors > kSvdRescaleMaxFactors)
    fail(ErrorCode::kInvalidArgument,
         "svd-rescale is a validation mode limited to N <= " + std::to_string(kSvdRescaleMaxFactors));

  Philox rng(seed);
  LyapunovSpectrum out;
  out.spec = spec;
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);

  if (mode == SpectrumMode::kQrAccumulate) {
    MatrixR q = MatrixR::Identity(n, n);
    for (int l : spec.truncations) {
      const MatrixR a = sample_truncated_orthogonal(n, l, rng);
      out.log_det_accum += log_abs_det(a);
      Eigen::HouseholderQR<MatrixR> qr(a * q);
      const auto& r = qr.matrixQR();
      for (int i = 0; i < n; ++i) {
        const double rii = std::abs(r(i, i));
        if (rii == 0.0) fail(ErrorCode::kDegenerateRealization, "rank collapse in QR accumulation");
        acc[static_cast<std::size_t>(i)] += std::log(rii);
      }
      q = qr.householderQ() * MatrixR::Identity(n, n);
    }
  } else {
    GradedProduct product(n);
    for (int l : spec.truncations) {
      const MatrixR a = sample_truncated_orthogonal(n, l, rng);
      out.log_det_accum += log_abs_det(a);
      product.multiply_left(a);
    }
    acc = product.log_singular_values();
  }

  for (double& v : acc) {
    v /= factors;
    if (!std::isfinite(v)) fail(ErrorCode::kInternal, "non-finite Lyapunov accumulator");
  }
  out.accumulated = acc;
  out.lambdas = acc;
  std::stable_sort(out.lambdas.begin(), out.lambdas.end(), std::greater<>());
  return out;
}

GrowthSample frame_growth(const EnsembleSpec& spec, int k, RandomSeed seed) {
  spec.validate();
  const int n = spec.n;
  MatrixR q = canonical_frame(n, k).columns;
  Philox rng(seed);
  double acc = 0.0;
  for (int l : spec.truncations) {
    const MatrixR a = sample_truncated_orthogonal(n, l, rng);
    Eigen::HouseholderQR<MatrixR> qr(a * q);
    const auto& r = qr.matrixQR();
    for (int i = 0; i < k; ++i) {
      const double rii = std::abs(r(i, i));
      if (rii == 0.0) fail(ErrorCode::kDegenerateRealization, "frame collapsed to lower rank");
      acc += std::log(rii);
    }
    q = qr.householderQ() * MatrixR::Identity(n, k);
  }
  GrowthSample out{spec, k, acc / spec.factors()};
  if (!std::isfinite(out.value)) fail(ErrorCode::kInternal, "non-finite frame growth");
  return out;
}

double telescoped_growth(const EnsembleSpec& spec, RandomSeed seed) {
  spec.validate();
  Philox rng(seed);
  double acc = 0.0;
  for (int l : spec.truncations) acc += sample_log_beta(spec.n, l, rng);
  return acc / (2.0 * spec.factors());
}

}  // namespace rmtlab
