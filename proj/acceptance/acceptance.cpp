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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   rmtlab_acceptance                 run all criteria
//   rmtlab_acceptance --criterion 4   run a subset (repeatable)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/harness.hpp"
#include "rmtlab/lyapunov.hpp"
#include "rmtlab/moments.hpp"
#include "rmtlab/stats.hpp"
#include "rmtlab/weingarten.hpp"

using namespace rmtlab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  const EmpiricalSample s(xs);
  return {s.mean(), std::sqrt(sample_variance(s) / static_cast<double>(xs.size()))};
}

ExperimentConfig lyapunov_config(ExperimentKind kind, int factors, int trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.kind = kind;
  c.n = 4;
  c.factors = factors;
  c.truncations = {4};
  c.trials = trials;
  c.master_seed = RandomSeed{seed};
  return c;
}

// 1. Haar correctness.
Outcome haar_correctness() {
  double worst = 0.0;
  for (int dim : {2, 8, 32, 64}) {
    for (std::uint64_t t = 0; t < 100; ++t) {
      const MatrixR q = sample_haar_orthogonal(dim, derive_trial_seed(RandomSeed{1001}, t + 1000 * dim));
      const Eigen::MatrixXd g = q.transpose() * q;
      worst = std::max(worst, (g - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff());
    }
  }
  std::vector<double> q11;
  for (std::uint64_t t = 0; t < 10000; ++t) q11.push_back(sample_haar_orthogonal(2, derive_trial_seed(RandomSeed{1011}, t))(0, 0));
  const auto m = mean_se(q11);
  const double dev = std::abs(m.mean) / m.se;
  return {worst <= 1e-10 && dev <= 3.0,
          "max |Q^T Q - I| = " + fmt("%.2e", worst) + ", dim 2 mean Q11 = " + fmt("%.4f", m.mean) + " (" +
              fmt("%.2f", dev) + " SE)"};
}

// 2. Beta law of projections.
Outcome beta_law() {
  bool ok = true;
  std::string detail;
  for (auto [n, l] : {std::pair{2, 2}, std::pair{4, 4}, std::pair{4, 2}}) {
    std::vector<double> blocks;
    std::vector<double> betas;
    const RandomSeed a{2000u + static_cast<unsigned>(10 * n + l)};
    const RandomSeed b{2100u + static_cast<unsigned>(10 * n + l)};
    for (std::uint64_t t = 0; t < 20000; ++t) {
      blocks.push_back(sample_truncated_orthogonal(n, l, derive_trial_seed(a, t)).col(0).squaredNorm());
      betas.push_back(std::exp(sample_log_beta(n, l, derive_trial_seed(b, t))));
    }
    const double ks = ks_two_sample(EmpiricalSample(blocks), EmpiricalSample(betas)).statistic;
    ok = ok && ks <= 0.025;
    detail += "(" + std::to_string(n) + "," + std::to_string(l) + ") KS " + fmt("%.4f", ks) + "  ";
  }
  return {ok, detail + "threshold 0.025"};
}

// 3. Telescoping identity.
Outcome telescoping() {
  ExperimentConfig c = lyapunov_config(ExperimentKind::kIdentityCheck, 100, 10000, 3001);
  const auto r = run_experiment(c);
  const double ks = *r.summary_value("ks_statistic");
  return {ks <= 0.03, "two-sample KS " + fmt("%.4f", ks) + " (threshold 0.03)"};
}

// Shared by criteria 4 and 5.
const ExperimentResult& criterion4_run() {
  static const ExperimentResult r = run_experiment(lyapunov_config(ExperimentKind::kClt, 2000, 2000, 4001));
  return r;
}

// 4. Closed-form moments.
Outcome closed_form_moments() {
  const auto& r = criterion4_run();
  std::vector<double> values;
  for (const auto& t : r.trials) values.push_back(t.value);
  const EmpiricalSample s(values);
  const double trials = static_cast<double>(values.size());
  const double mean_target = -5.0 / 12.0;
  const double var_target = (13.0 / 36.0) / (4.0 * 2000.0);
  const double var = sample_variance(s);
  const double se_mean = std::sqrt(var / trials);
  const double se_var = std::sqrt((central_moment(s, 4) - var * var) / trials);
  const double dev_mean = std::abs(s.mean() - mean_target) / se_mean;
  const double dev_var = std::abs(var - var_target) / se_var;
  return {dev_mean <= 3.0 && dev_var <= 3.0,
          "mean " + fmt("%.6f", s.mean()) + " (" + fmt("%.2f", dev_mean) + " SE from -5/12), variance " +
              fmt("%.4e", var) + " (" + fmt("%.2f", dev_var) + " SE from " + fmt("%.4e", var_target) + ")"};
}

// 5. CLT shape.
Outcome clt_shape() {
  const double ks_main = *criterion4_run().summary_value("ks_statistic");
  std::vector<double> ks;
  std::string detail = "KS at N=2000: " + fmt("%.4f", ks_main) + "; KS over N=250,1000,4000:";
  for (int factors : {250, 1000, 4000}) {
    const auto r = run_experiment(lyapunov_config(ExperimentKind::kClt, factors, 2000, 5001));
    ks.push_back(*r.summary_value("ks_statistic"));
    detail += " " + fmt("%.4f", ks.back());
  }
  const bool decreasing = ks[0] > ks[1] && ks[1] > ks[2];
  detail += decreasing ? " (strictly decreasing)" : " (not strictly decreasing)";
  return {ks_main <= 0.06 && decreasing, detail};
}

// 6. Top-k normality.
Outcome topk_normality() {
  ExperimentConfig c = lyapunov_config(ExperimentKind::kCltTopK, 2000, 1000, 6001);
  c.k = 2;
  const double ks = *run_experiment(c).summary_value("ks_statistic");
  return {ks <= 0.06, "moment-matched KS of lambda1+lambda2 " + fmt("%.4f", ks) + " (threshold 0.06)"};
}

// 7. Weingarten exactness.
Outcome weingarten_exactness() {
  double residual = 0.0;
  for (int k = 1; k <= 4; ++k) {
    for (int m = 2 * k; m <= 16; ++m) {
      const auto t = weingarten_table(k, m);
      const auto size = t.gram.rows();
      residual = std::max(residual, (t.values * t.gram - Eigen::MatrixXd::Identity(size, size)).cwiseAbs().maxCoeff());
    }
  }
  int checked = 0;
  int within = 0;
  double worst = 0.0;
  for (int m : {4, 6, 8}) {
    for (int order : {2, 4, 6}) {
      const auto queries = moment_patterns(order);
      const auto mc = orthogonal_moment_mc(queries, m, 100000, RandomSeed{7000u + static_cast<unsigned>(10 * m + order)});
      for (std::size_t q = 0; q < queries.size(); ++q) {
        const double dev = std::abs(mc[q].mean - orthogonal_moment(queries[q], m)) / mc[q].standard_error;
        ++checked;
        within += dev <= 3.0;
        worst = std::max(worst, dev);
      }
    }
  }
  const auto t6 = weingarten_table(2, 6);
  const auto exact6 = weingarten_table_exact(2, 6);
  const double err = std::max(std::abs(t6.values(0, 0) - 7.0 / 240.0), std::abs(t6.values(0, 1) + 1.0 / 240.0));
  const bool exact_ok = exact6.values[0][0] == "7/240" && exact6.values[0][1] == "-1/240";
  return {residual <= 1e-10 && within == checked && err <= 1e-12 && exact_ok,
          "max |Wg G - I| = " + fmt("%.2e", residual) + ", " + std::to_string(within) + "/" + std::to_string(checked) +
              " patterns within 3 SE (worst " + fmt("%.2f", worst) + "), 7/240 and -1/240 error " + fmt("%.1e", err)};
}

// 8. Determinant pipeline.
Outcome determinant_pipeline() {
  double untruncated = 0.0;
  for (int k = 1; k <= 2; ++k)
    for (int n = k; n <= 8; ++n)
      for (int p = 1; p <= 2; ++p) untruncated = std::max(untruncated, std::abs(det_gram_moment_exact(k, n, n, p) - 1.0));
  const double ez = det_gram_moment_exact(2, 6, 8, 1);
  const auto mc = det_gram_moment_mc(2, 6, 2, 100000, RandomSeed{8001});
  const double dev = std::abs(mc.mean - ez) / mc.se_mean;
  std::vector<double> scaled;
  for (int n : {8, 16, 32}) {
    const double mean = det_gram_moment_exact(2, n, n + 2, 1);
    scaled.push_back(n * (det_gram_moment_exact(2, n, n + 2, 2) - mean * mean));
  }
  const double hi = std::max({scaled[0], scaled[1], scaled[2]});
  const double lo = std::min({scaled[0], scaled[1], scaled[2]});
  return {untruncated <= 1e-12 && std::abs(ez - 15.0 / 28.0) <= 1e-10 && dev <= 3.0 && hi <= 2.0 * lo,
          "max |E Z^p - 1| at m=n: " + fmt("%.1e", untruncated) + ", E Z(2,6,8) - 15/28 = " +
              fmt("%.1e", ez - 15.0 / 28.0) + ", MC " + fmt("%.2f", dev) + " SE, n Var Z at n=8,16,32: " +
              fmt("%.4f", scaled[0]) + " " + fmt("%.4f", scaled[1]) + " " + fmt("%.4f", scaled[2]) + " (ratio " +
              fmt("%.3f", hi / lo) + ")"};
}

// 9. Weingarten asymptotics.
Outcome weingarten_asymptotics() {
  bool ok = true;
  std::string detail = "|exact - 3-term| * m^6:";
  for (int m : {16, 32, 64}) {
    const double scaled = std::abs(weingarten_value({}, 2, m) - wg_asymptotic({}, 2, m)) * std::pow(m, 6);
    ok = ok && scaled <= 5.0;
    detail += " m=" + std::to_string(m) + ": " + fmt("%.4f", scaled);
  }
  return {ok, detail + " (allowed 5)"};
}

// 10. Beta tails.
Outcome beta_tails() {
  bool ok = true;
  std::string detail;
  for (auto [alpha, beta] : {std::pair{1.0, 1.0}, std::pair{2.0, 2.0}, std::pair{1.0, 3.0}}) {
    ExperimentConfig c;
    c.kind = ExperimentKind::kTails;
    c.alpha = alpha;
    c.beta = beta;
    c.trials = 100000;
    c.eps = {0.1, 0.2, 0.3};
    c.master_seed = RandomSeed{10000u + static_cast<unsigned>(10 * alpha + beta)};
    const auto r = run_experiment(c);
    ok = ok && *r.summary_value("tails_within_bound") == 1.0;
    detail += "Beta(" + fmt("%g", alpha) + "," + fmt("%g", beta) + ") worst excess " +
              fmt("%.4f", *r.summary_value("max_tail_excess")) + "  ";
  }
  return {ok, detail + "(must be <= 0)"};
}

// 11. Reproducibility across worker counts.
Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("rmtlab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::vector<ExperimentConfig> configs;
  configs.push_back(lyapunov_config(ExperimentKind::kClt, 200, 400, 11001));
  configs.push_back(lyapunov_config(ExperimentKind::kIdentityCheck, 100, 400, 11002));
  ExperimentConfig tails;
  tails.kind = ExperimentKind::kTails;
  tails.trials = 5000;
  tails.master_seed = RandomSeed{11003};
  configs.push_back(tails);
  bool ok = true;
  int compared = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::vector<std::string> bytes;
    for (int workers : {1, 4}) {
      auto c = configs[i];
      c.workers = workers;
      const auto stem = dir / ("run" + std::to_string(i) + "_w" + std::to_string(workers));
      emit_results(run_experiment(c), OutputFormat::kCsv, stem);
      std::ifstream in(stem.string() + ".trials.csv", std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      bytes.push_back(s.str());
    }
    ok = ok && !bytes[0].empty() && bytes[0] == bytes[1];
    ++compared;
  }
  fs::remove_all(dir);
  return {ok, std::to_string(compared) + " experiments, per-trial CSVs " + (ok ? "identical" : "differ") +
                  " at 1 and 4 workers"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmtlab acceptance suite"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number (1-11); repeatable")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Haar correctness", haar_correctness},
      {"Beta law of projections", beta_law},
      {"telescoping identity", telescoping},
      {"closed-form moments", closed_form_moments},
      {"CLT shape", clt_shape},
      {"top-k normality", topk_normality},
      {"Weingarten exactness", weingarten_exactness},
      {"determinant pipeline", determinant_pipeline},
      {"Weingarten asymptotics", weingarten_asymptotics},
      {"Beta tails", beta_tails},
      {"reproducibility", reproducibility},
  };
  const std::set<int> wanted(selected.begin(), selected.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s: %s [%.1f s]\n", outcome.passed ? "PASS" : "FAIL", number,
                criteria[i].first.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !outcome.passed;
  }
  return failures == 0 ? 0 : 1;
}
