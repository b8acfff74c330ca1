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

// Experiment configuration, parallel trial execution and result files.
//
// Every trial draws from its own seed, derive_trial_seed(master, index), and
// results are stored by trial index, so output never depends on how many
// workers ran the trials.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/lyapunov.hpp"
#include "rmtlab/random.hpp"
#include "rmtlab/stats.hpp"

namespace rmtlab {

enum class ExperimentKind { kClt, kCltTopK, kTails, kWeingartenVerify, kIdentityCheck, kLyapunov };

ExperimentKind parse_experiment_kind(std::string_view name);
std::string_view to_string(ExperimentKind kind) noexcept;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kClt;
  int n = 4;
  int factors = 100;  // N
  int k = 1;
  std::vector<int> truncations{4};  // one entry broadcasts to all N factors
  int trials = 1000;
  RandomSeed master_seed{1};
  Convention convention = Convention::kCorrected;
  SpectrumMode mode = SpectrumMode::kQrAccumulate;
  std::map<std::string, double> constants{{"C", 1.0}, {"c", 1.0}};
  std::string output_path;
  int workers = 0;  // 0: RMTLAB_WORKERS, else hardware concurrency

  // weingarten-verify: ambient dimension (block is (m - l) x k)
  int m = 0;
  // tails: Beta(alpha, beta) with alpha, beta positive half-integers
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<double> eps{0.1, 0.2, 0.3};

  // Throws a usage error on inconsistent settings.
  void validate() const;
  EnsembleSpec ensemble() const;
  double constant(const std::string& name) const;
};

// JSON document <-> config. Unknown keys are rejected.
ExperimentConfig config_from_json(std::string_view json_text);
std::string config_to_json(const ExperimentConfig& config);

int resolve_worker_count(int requested);

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  double standardized = 0.0;
  std::optional<double> reference;  // second sample of a two-sample experiment
};

struct Manifest {
  std::string code_version;
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;
  int workers = 1;
};

using Summary = std::vector<std::pair<std::string, double>>;

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;  // sorted by trial index
  Summary summary;
  Manifest manifest;

  std::optional<double> summary_value(std::string_view name) const;
};

// Summary entries that are pure functions of the per-trial records.
Summary sample_summary(ExperimentKind kind, const std::vector<TrialRecord>& trials);

ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_clt_experiment(const ExperimentConfig& config);
ExperimentResult run_identity_check(const ExperimentConfig& config);
ExperimentResult run_weingarten_verification(const ExperimentConfig& config);
ExperimentResult run_tails_experiment(const ExperimentConfig& config);
ExperimentResult run_lyapunov_experiment(const ExperimentConfig& config);

enum class OutputFormat { kCsv, kJsonl };
OutputFormat parse_output_format(std::string_view name);

// Writes <stem>.trials.csv, <stem>.summary.csv, <stem>.hist.csv (and
// <stem>.reference.csv for two-sample runs) or <stem>.jsonl, plus
// <stem>.manifest.json. Returns the paths written. Throws an io error.
std::vector<std::filesystem::path> emit_results(const ExperimentResult& result, OutputFormat format,
                                                const std::filesystem::path& stem);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
  double gaussian_density = 0.0;
};

// Equal-width bins over the standardized values; counts sum to the trial count.
std::vector<HistogramBin> histogram(const std::vector<TrialRecord>& trials, int bins = 40);

std::vector<TrialRecord> read_trials_csv(const std::filesystem::path& path);
Summary read_summary_csv(const std::filesystem::path& path);
ExperimentResult read_results_jsonl(const std::filesystem::path& path);

struct CheckOutcome {
  std::string expression;
  std::string statistic;
  double value = 0.0;
  bool passed = false;
};

// Comma-separated "name<=x" / "name>=x" / "name<x" / "name>x". "ks" is an
// alias for ks_statistic. Unknown statistics are usage errors.
std::vector<CheckOutcome> evaluate_checks(const ExperimentResult& result, std::string_view checks);

std::string format_number(double v);

}  // namespace rmtlab
