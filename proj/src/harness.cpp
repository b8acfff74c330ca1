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

#include "rmtlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rmtlab/error.hpp"
#include "rmtlab/moments.hpp"
#include "rmtlab/weingarten.hpp"

namespace rmtlab {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void usage_error(const std::string& what) { fail(ErrorCode::kUsage, what); }

void usage_require(bool condition, const std::string& what) {
  if (!condition) usage_error(what);
}

bool is_half_integer(double x) { return x > 0.0 && std::abs(2.0 * x - std::round(2.0 * x)) < 1e-12; }

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "clt") return ExperimentKind::kClt;
  if (name == "clt-topk") return ExperimentKind::kCltTopK;
  if (name == "tails") return ExperimentKind::kTails;
  if (name == "weingarten-verify") return ExperimentKind::kWeingartenVerify;
  if (name == "identity-check") return ExperimentKind::kIdentityCheck;
  if (name == "lyapunov") return ExperimentKind::kLyapunov;
  usage_error("unknown experiment kind '" + std::string(name) + "'");
}

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::kClt: return "clt";
    case ExperimentKind::kCltTopK: return "clt-topk";
    case ExperimentKind::kTails: return "tails";
    case ExperimentKind::kWeingartenVerify: return "weingarten-verify";
    case ExperimentKind::kIdentityCheck: return "identity-check";
    case ExperimentKind::kLyapunov: return "lyapunov";
  }
  return "unknown";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "jsonl") return OutputFormat::kJsonl;
  usage_error("unknown output format '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  usage_require(trials >= 1, "trials must be >= 1");
  usage_require(!truncations.empty(), "truncations must not be empty");
  for (int l : truncations) usage_require(l >= 0, "truncations must be >= 0");
  usage_require(workers >= 0, "workers must be >= 0");
  for (const auto& [name, value] : constants)
    usage_require(value > 0.0, "constant " + name + " must be positive");

  if (kind == ExperimentKind::kWeingartenVerify) {
    const int l = truncations.front();
    usage_require(truncations.size() == 1, "weingarten-verify takes a single truncation l");
    usage_require(m >= 2 && m <= kMaxDetGramDimension, "weingarten-verify needs 2 <= m <= 64");
    usage_require(k >= 1 && k <= 3, "weingarten-verify supports 1 <= k <= 3");
    usage_require(m - l >= k, "weingarten-verify needs m - l >= k");
    return;
  }
  if (kind == ExperimentKind::kTails) {
    usage_require(is_half_integer(alpha) && is_half_integer(beta),
                  "tails needs alpha and beta to be positive multiples of 1/2");
    usage_require(!eps.empty(), "tails needs at least one eps");
    for (double e : eps) usage_require(e >= 0.0, "eps values must be >= 0");
    return;
  }
  usage_require(n >= 1, "n must be >= 1");
  usage_require(factors >= 1, "N must be >= 1");
  usage_require(truncations.size() == 1 || truncations.size() == static_cast<std::size_t>(factors),
                "a truncation list must have length N");
  usage_require(k >= 1 && k <= n, "k must satisfy 1 <= k <= n");
  if (mode == SpectrumMode::kSvdRescale)
    usage_require(factors <= kSvdRescaleMaxFactors, "svd-rescale is limited to N <= 10000");
}

EnsembleSpec ExperimentConfig::ensemble() const {
  EnsembleSpec spec;
  spec.n = n;
  if (truncations.size() == 1)
    spec.truncations.assign(static_cast<std::size_t>(factors), truncations.front());
  else
    spec.truncations = truncations;
  spec.validate();
  return spec;
}

double ExperimentConfig::constant(const std::string& name) const {
  const auto it = constants.find(name);
  return it == constants.end() ? 1.0 : it->second;
}

ExperimentConfig config_from_json(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    usage_error(std::string("config is not valid JSON: ") + e.what());
  }
  usage_require(doc.is_object(), "config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "kind") c.kind = parse_experiment_kind(value.get<std::string>());
      else if (key == "n") c.n = value.get<int>();
      else if (key == "N") c.factors = value.get<int>();
      else if (key == "k") c.k = value.get<int>();
      else if (key == "truncations") {
        if (value.is_array()) c.truncations = value.get<std::vector<int>>();
        else c.truncations = {value.get<int>()};
      } else if (key == "trials") c.trials = value.get<int>();
      else if (key == "master_seed") c.master_seed = RandomSeed{value.get<std::uint64_t>()};
      else if (key == "convention") c.convention = parse_convention(value.get<std::string>());
      else if (key == "mode") c.mode = parse_spectrum_mode(value.get<std::string>());
      else if (key == "constants") {
        for (const auto& [name, v] : value.items()) c.constants[name] = v.get<double>();
      } else if (key == "output_path") c.output_path = value.get<std::string>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "m") c.m = value.get<int>();
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "eps") {
        if (value.is_array()) c.eps = value.get<std::vector<double>>();
        else c.eps = {value.get<double>()};
      } else usage_error("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    usage_error(std::string("config has a field of the wrong type: ") + e.what());
  } catch (const Error& e) {
    usage_error(e.what());
  }
  c.validate();
  return c;
}

namespace {

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json doc;
  doc["kind"] = std::string(to_string(c.kind));
  doc["n"] = c.n;
  doc["N"] = c.factors;
  doc["k"] = c.k;
  if (c.truncations.size() == 1) doc["truncations"] = c.truncations.front();
  else doc["truncations"] = c.truncations;
  doc["trials"] = c.trials;
  doc["master_seed"] = c.master_seed.value;
  doc["convention"] = std::string(to_string(c.convention));
  doc["mode"] = std::string(to_string(c.mode));
  doc["constants"] = ordered_json::object();
  for (const auto& [name, v] : c.constants) doc["constants"][name] = v;
  doc["output_path"] = c.output_path;
  if (c.kind == ExperimentKind::kWeingartenVerify) doc["m"] = c.m;
  if (c.kind == ExperimentKind::kTails) {
    doc["alpha"] = c.alpha;
    doc["beta"] = c.beta;
    doc["eps"] = c.eps;
  }
  return doc;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(); }

int resolve_worker_count(int requested) {
  const int hardware = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RMTLAB_WORKERS")) {
    const int cap = std::atoi(env);
    if (cap > 0) return std::min(cap, hardware);
  }
  return hardware;
}

std::optional<double> ExperimentResult::summary_value(std::string_view name) const {
  for (const auto& [key, value] : summary)
    if (key == name) return value;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trial execution

namespace {

template <class Body>
std::vector<TrialRecord> run_trials(const ExperimentConfig& config, int workers, Body&& body) {
  const auto count = static_cast<std::size_t>(config.trials);
  std::vector<TrialRecord> out(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        const RandomSeed seed = derive_trial_seed(config.master_seed, i);
        TrialRecord record = body(i, seed);
        record.trial = i;
        record.seed = seed.value;
        out[i] = record;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<double> values_of(const std::vector<TrialRecord>& trials) {
  std::vector<double> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.value);
  return out;
}

std::vector<double> standardized_of(const std::vector<TrialRecord>& trials) {
  std::vector<double> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.standardized);
  return out;
}

ExperimentResult start_result(const ExperimentConfig& config, int workers) {
  ExperimentResult r;
  r.config = config;
  r.manifest.code_version = RMTLAB_VERSION_STRING;
  r.manifest.seed = config.master_seed.value;
  r.manifest.workers = workers;
  return r;
}

void finish_result(ExperimentResult& r, std::chrono::steady_clock::time_point start) {
  r.manifest.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double deviation_in_se(double estimate, double target, double se) {
  const double diff = std::abs(estimate - target);
  if (se > 0.0) return diff / se;
  return diff <= 1e-12 * std::max(1.0, std::abs(target)) ? 0.0 : 1e300;
}

}  // namespace

Summary sample_summary(ExperimentKind kind, const std::vector<TrialRecord>& trials) {
  const EmpiricalSample values(values_of(trials));
  const EmpiricalSample standardized(standardized_of(trials));
  Summary s;
  s.emplace_back("trials", static_cast<double>(trials.size()));
  s.emplace_back("sample_mean", values.mean());
  s.emplace_back("sample_variance", sample_variance(values));
  s.emplace_back("standardized_mean", standardized.mean());
  s.emplace_back("standardized_variance", sample_variance(standardized));
  switch (kind) {
    case ExperimentKind::kClt:
    case ExperimentKind::kCltTopK:
    case ExperimentKind::kLyapunov:
      s.emplace_back("ks_statistic", ks_one_sample(standardized).statistic);
      break;
    case ExperimentKind::kIdentityCheck: {
      std::vector<double> refs;
      for (const auto& t : trials) refs.push_back(t.reference.value_or(0.0));
      const EmpiricalSample reference(refs);
      s.emplace_back("reference_mean", reference.mean());
      s.emplace_back("reference_variance", sample_variance(reference));
      s.emplace_back("ks_statistic", ks_two_sample(values, reference).statistic);
      break;
    }
    case ExperimentKind::kTails:
    case ExperimentKind::kWeingartenVerify:
      break;
  }
  return s;
}

ExperimentResult run_clt_experiment(const ExperimentConfig& config) {
  config.validate();
  usage_require(config.kind == ExperimentKind::kClt || config.kind == ExperimentKind::kCltTopK,
                "run_clt_experiment needs kind clt or clt-topk");
  const auto start = std::chrono::steady_clock::now();
  const EnsembleSpec spec = config.ensemble();
  const int workers = resolve_worker_count(config.workers);
  const bool topk = config.kind == ExperimentKind::kCltTopK;
  const int k = topk ? config.k : 1;

  // Fail before spending the trials if the standardization is undefined.
  const auto moments = aggregate_moments(spec);
  if (!(moments.sigma2 > 0.0))
    fail(ErrorCode::kDegenerateVariance, "all truncations are 0: the Lyapunov exponents are identically 0");

  ExperimentResult r = start_result(config, workers);
  r.trials = run_trials(config, workers, [&](std::size_t, RandomSeed seed) {
    const auto spectrum = lyapunov_spectrum(spec, seed, config.mode);
    double v = 0.0;
    for (int i = 0; i < k; ++i) v += spectrum.lambdas[static_cast<std::size_t>(i)];
    return TrialRecord{0, 0, v, 0.0, std::nullopt};
  });

  const auto values = values_of(r.trials);
  std::vector<double> standardized;
  if (topk) {
    const EmpiricalSample sample(values);
    const double sd = std::sqrt(sample_variance(sample));
    if (!(sd > 0.0)) fail(ErrorCode::kDegenerateVariance, "top-k sums have zero sample variance");
    for (double v : values) standardized.push_back((v - sample.mean()) / sd);
  } else {
    standardized = standardize_lyapunov(values, spec, config.convention);
  }
  for (std::size_t i = 0; i < r.trials.size(); ++i) r.trials[i].standardized = standardized[i];

  r.summary = sample_summary(config.kind, r.trials);
  if (!topk) {
    const double expected_mean = 0.5 * moments.mu;
    const double expected_variance = 0.25 * moments.sigma2;
    const double trials = config.trials;
    const double mean = *r.summary_value("sample_mean");
    const double var = *r.summary_value("sample_variance");
    r.summary.emplace_back("expected_mean", expected_mean);
    r.summary.emplace_back("expected_variance", expected_variance);
    r.summary.emplace_back("mean_dev_se", deviation_in_se(mean, expected_mean, std::sqrt(expected_variance / trials)));
    r.summary.emplace_back("variance_dev_se",
                           deviation_in_se(var, expected_variance, expected_variance * std::sqrt(2.0 / (trials - 1.0 + 1e-300))));
  }
  const int l = spec.min_truncation();
  if (l >= 1 && spec.factors() > spec.n && spec.n >= 2)
    r.summary.emplace_back("theorem1_ks_bound", theorem1_ks_bound(spec, config.constant("C")));
  r.summary.emplace_back("concentration_p0", concentration_params(spec).p0);
  finish_result(r, start);
  return r;
}

ExperimentResult run_identity_check(const ExperimentConfig& config) {
  config.validate();
  usage_require(config.kind == ExperimentKind::kIdentityCheck, "run_identity_check needs kind identity-check");
  const auto start = std::chrono::steady_clock::now();
  const EnsembleSpec spec = config.ensemble();
  const int workers = resolve_worker_count(config.workers);
  const auto moments = aggregate_moments(spec);
  const double scale = config.convention == Convention::kPaper ? 2.0 : 1.0;

  ExperimentResult r = start_result(config, workers);
  r.trials = run_trials(config, workers, [&](std::size_t, RandomSeed seed) {
    const double growth = frame_growth(spec, 1, derive_trial_seed(seed, 0)).value;
    const double telescoped = scale * telescoped_growth(spec, derive_trial_seed(seed, 1));
    double standardized = 0.0;
    if (moments.sigma2 > 0.0) standardized = (growth - 0.5 * moments.mu) / std::sqrt(0.25 * moments.sigma2);
    return TrialRecord{0, 0, growth, standardized, telescoped};
  });
  r.summary = sample_summary(config.kind, r.trials);
  r.summary.emplace_back("expected_mean", 0.5 * scale * moments.mu);
  finish_result(r, start);
  return r;
}

ExperimentResult run_weingarten_verification(const ExperimentConfig& config) {
  config.validate();
  usage_require(config.kind == ExperimentKind::kWeingartenVerify,
                "run_weingarten_verification needs kind weingarten-verify");
  const auto start = std::chrono::steady_clock::now();
  const int workers = resolve_worker_count(config.workers);
  const int k = config.k;
  const int m = config.m;
  const int l = config.truncations.front();
  const int n = m - l;

  const double exact_mean = det_gram_moment_exact(k, n, m, 1);
  std::optional<double> exact_var;
  if (k <= 2) exact_var = std::max(0.0, det_gram_moment_exact(k, n, m, 2) - exact_mean * exact_mean);

  ExperimentResult r = start_result(config, workers);
  r.trials = run_trials(config, workers, [&](std::size_t, RandomSeed seed) {
    Philox rng(seed);
    const double z = sample_det_gram(k, n, l, rng);
    double standardized = 0.0;
    if (exact_var && *exact_var > 0.0) standardized = (z - exact_mean) / std::sqrt(*exact_var);
    return TrialRecord{0, 0, z, standardized, std::nullopt};
  });
  r.summary = sample_summary(config.kind, r.trials);

  const EmpiricalSample z(values_of(r.trials));
  const double mc_var = central_moment(z, 2);
  const double mc_mu4 = central_moment(z, 4);
  const double se = std::sqrt(sample_variance(z) / config.trials);
  r.summary.emplace_back("n", n);
  r.summary.emplace_back("exact_mean_z", exact_mean);
  r.summary.emplace_back("mean_z_dev_se", deviation_in_se(z.mean(), exact_mean, se));
  if (exact_var) r.summary.emplace_back("exact_var_z", *exact_var);
  r.summary.emplace_back("mc_var_z", mc_var);
  r.summary.emplace_back("mc_mu4_z", mc_mu4);
  if (z.mean() > 0.0) {
    const auto delta = delta_method_log(z.mean(), mc_var, mc_mu4);
    r.summary.emplace_back("delta_mean_log", delta.mean_log);
    r.summary.emplace_back("delta_mean_log_second_order", delta.mean_log_second_order);
    r.summary.emplace_back("delta_var_log", delta.var_log);
    r.summary.emplace_back("delta_mu4_log", delta.mu4_log);
  }

  // Exact moment patterns against Haar Monte Carlo.
  int checked = 0;
  int within = 0;
  double worst = 0.0;
  for (int order = 2; order <= std::min(2 * k, 6); order += 2) {
    const auto queries = moment_patterns(order);
    const auto table = weingarten_table(order / 2, m, m >= order / 2 ? GramInverse::kStrict : GramInverse::kPseudo);
    const auto mc = orthogonal_moment_mc(queries, m, config.trials,
                                         derive_trial_seed(config.master_seed, (1ull << 63) + static_cast<std::uint64_t>(order)));
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const double dev = deviation_in_se(mc[q].mean, orthogonal_moment(queries[q], table), mc[q].standard_error);
      ++checked;
      if (dev <= 3.0) ++within;
      worst = std::max(worst, dev);
    }
  }
  r.summary.emplace_back("patterns_checked", checked);
  r.summary.emplace_back("patterns_within_3se", within);
  r.summary.emplace_back("max_pattern_dev_se", worst);

  if (m >= k) {
    const double exact = weingarten_value({}, k, m);
    const double asym = wg_asymptotic({}, k, m);
    r.summary.emplace_back("wg_identity_exact", exact);
    r.summary.emplace_back("wg_identity_asymptotic", asym);
    r.summary.emplace_back("wg_identity_remainder_scaled", std::abs(exact - asym) * std::pow(m, k + 4));
  }

  if (k <= 2) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int size : {8, 16, 32}) {
      const double ez = det_gram_moment_exact(k, size, size + l, 1);
      const double var = std::max(0.0, det_gram_moment_exact(k, size, size + l, 2) - ez * ez);
      const double scaled = size * var;
      r.summary.emplace_back("n_var_z_at_" + std::to_string(size), scaled);
      lo = first ? scaled : std::min(lo, scaled);
      hi = first ? scaled : std::max(hi, scaled);
      first = false;
    }
    r.summary.emplace_back("var_scaling_ratio", lo > 0.0 ? hi / lo : 1.0);
  }
  finish_result(r, start);
  return r;
}

ExperimentResult run_tails_experiment(const ExperimentConfig& config) {
  config.validate();
  usage_require(config.kind == ExperimentKind::kTails, "run_tails_experiment needs kind tails");
  const auto start = std::chrono::steady_clock::now();
  const int workers = resolve_worker_count(config.workers);
  const int n = static_cast<int>(std::lround(2.0 * config.alpha));
  const int l = static_cast<int>(std::lround(2.0 * config.beta));
  const auto [v, c] = skorski_params(config.alpha, config.beta);
  const double mean = config.alpha / (config.alpha + config.beta);

  ExperimentResult r = start_result(config, workers);
  r.trials = run_trials(config, workers, [&](std::size_t, RandomSeed seed) {
    const double x = std::exp(sample_log_beta(n, l, seed));
    return TrialRecord{0, 0, x, (x - mean) / std::sqrt(v), std::nullopt};
  });
  r.summary = sample_summary(config.kind, r.trials);
  r.summary.emplace_back("exact_mean", mean);
  r.summary.emplace_back("skorski_v", v);
  r.summary.emplace_back("skorski_c", c);

  const double trials = config.trials;
  bool all_within = true;
  double worst_excess = -1e300;
  for (double e : config.eps) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%g", e);
    std::size_t upper = 0, lower = 0;
    for (const auto& t : r.trials) {
      if (t.value > mean + e) ++upper;
      if (t.value < mean - e) ++lower;
    }
    for (const auto side : {TailSide::kUpper, TailSide::kLower}) {
      const bool is_upper = side == TailSide::kUpper;
      const double p = static_cast<double>(is_upper ? upper : lower) / trials;
      const double bound = skorski_tail_bound(config.alpha, config.beta, e, side);
      const double se = std::sqrt(p * (1.0 - p) / trials);
      const std::string name = std::string(is_upper ? "upper" : "lower") + "_eps_" + tag;
      r.summary.emplace_back(name + "_empirical", p);
      r.summary.emplace_back(name + "_bound", bound);
      all_within = all_within && p <= bound + 3.0 * se;
      worst_excess = std::max(worst_excess, p - bound - 3.0 * se);
    }
  }
  r.summary.emplace_back("max_tail_excess", worst_excess);
  r.summary.emplace_back("tails_within_bound", all_within ? 1.0 : 0.0);
  finish_result(r, start);
  return r;
}

ExperimentResult run_lyapunov_experiment(const ExperimentConfig& config) {
  config.validate();
  usage_require(config.kind == ExperimentKind::kLyapunov, "run_lyapunov_experiment needs kind lyapunov");
  const auto start = std::chrono::steady_clock::now();
  const EnsembleSpec spec = config.ensemble();
  const int workers = resolve_worker_count(config.workers);
  const auto moments = aggregate_moments(spec);
  std::vector<std::vector<double>> spectra(static_cast<std::size_t>(config.trials));
  std::vector<double> trace_residual(static_cast<std::size_t>(config.trials));

  ExperimentResult r = start_result(config, workers);
  r.trials = run_trials(config, workers, [&](std::size_t i, RandomSeed seed) {
    const auto spectrum = lyapunov_spectrum(spec, seed, config.mode);
    spectra[i] = spectrum.lambdas;
    double sum = 0.0;
    for (double lambda : spectrum.lambdas) sum += lambda;
    trace_residual[i] = std::abs(sum * spec.factors() - spectrum.log_det_accum) /
                        std::max(1.0, std::abs(spectrum.log_det_accum));
    const double v = spectrum.lambdas.front();
    double standardized = 0.0;
    if (moments.sigma2 > 0.0) standardized = (v - 0.5 * moments.mu) / std::sqrt(0.25 * moments.sigma2);
    return TrialRecord{0, 0, v, standardized, std::nullopt};
  });
  r.summary = sample_summary(config.kind, r.trials);
  r.summary.emplace_back("expected_lambda1", 0.5 * moments.mu);
  for (int i = 0; i < spec.n; ++i) {
    CompensatedSum sum;
    for (const auto& s : spectra) sum.add(s[static_cast<std::size_t>(i)]);
    r.summary.emplace_back("lambda_mean_" + std::to_string(i + 1), sum.value() / config.trials);
  }
  r.summary.emplace_back("max_trace_residual", *std::max_element(trace_residual.begin(), trace_residual.end()));
  finish_result(r, start);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kClt:
    case ExperimentKind::kCltTopK: return run_clt_experiment(config);
    case ExperimentKind::kIdentityCheck: return run_identity_check(config);
    case ExperimentKind::kWeingartenVerify: return run_weingarten_verification(config);
    case ExperimentKind::kTails: return run_tails_experiment(config);
    case ExperimentKind::kLyapunov: return run_lyapunov_experiment(config);
  }
  fail(ErrorCode::kInternal, "unhandled experiment kind");
}

// ---------------------------------------------------------------------------
// Persistence

std::vector<HistogramBin> histogram(const std::vector<TrialRecord>& trials, int bins) {
  require(!trials.empty(), "histogram needs at least one trial");
  require(bins >= 1, "histogram needs at least one bin");
  double lo = trials.front().standardized;
  double hi = lo;
  for (const auto& t : trials) {
    lo = std::min(lo, t.standardized);
    hi = std::max(hi, t.standardized);
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    auto& bin = out[static_cast<std::size_t>(b)];
    bin.left = lo + b * width;
    bin.right = b + 1 == bins ? hi : lo + (b + 1) * width;
    bin.gaussian_density = gaussian_pdf(0.5 * (bin.left + bin.right));
  }
  for (const auto& t : trials) {
    auto b = static_cast<int>((t.standardized - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const std::string& suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

void write_trials_csv(const std::vector<TrialRecord>& trials, const std::filesystem::path& path, bool reference) {
  auto out = open_output(path);
  out << "trial,seed,value,standardized\n";
  for (const auto& t : trials) {
    const double value = reference ? t.reference.value_or(0.0) : t.value;
    out << t.trial << ',' << t.seed << ',' << format_number(value) << ',' << format_number(t.standardized) << '\n';
  }
  close_output(out, path);
}

ordered_json summary_json(const Summary& summary) {
  ordered_json doc = ordered_json::object();
  for (const auto& [name, value] : summary) doc[name] = value;
  return doc;
}

ordered_json trial_json(const TrialRecord& t) {
  ordered_json doc;
  doc["trial"] = t.trial;
  doc["seed"] = t.seed;
  doc["value"] = t.value;
  doc["standardized"] = t.standardized;
  if (t.reference) doc["reference"] = *t.reference;
  return doc;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  out.push_back(current);
  return out;
}

double parse_double(const std::string& text, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') fail(ErrorCode::kIo, "malformed number '" + text + "' in " + path.string());
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::vector<std::filesystem::path> emit_results(const ExperimentResult& result, OutputFormat format,
                                                const std::filesystem::path& stem) {
  if (result.trials.empty()) fail(ErrorCode::kUsage, "refusing to emit an experiment without trials");
  std::error_code ec;
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path(), ec);
  if (ec) fail(ErrorCode::kIo, "cannot create directory '" + stem.parent_path().string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  const bool two_sample = std::any_of(result.trials.begin(), result.trials.end(),
                                      [](const TrialRecord& t) { return t.reference.has_value(); });
  if (format == OutputFormat::kCsv) {
    const auto trials_path = with_suffix(stem, ".trials.csv");
    write_trials_csv(result.trials, trials_path, false);
    written.push_back(trials_path);
    if (two_sample) {
      const auto ref_path = with_suffix(stem, ".reference.csv");
      write_trials_csv(result.trials, ref_path, true);
      written.push_back(ref_path);
    }

    const auto summary_path = with_suffix(stem, ".summary.csv");
    auto summary = open_output(summary_path);
    summary << "statistic,value\n";
    for (const auto& [name, value] : result.summary) summary << name << ',' << format_number(value) << '\n';
    close_output(summary, summary_path);
    written.push_back(summary_path);

    const auto hist_path = with_suffix(stem, ".hist.csv");
    auto hist = open_output(hist_path);
    hist << "bin_left,bin_right,count,gaussian_density\n";
    for (const auto& bin : histogram(result.trials))
      hist << format_number(bin.left) << ',' << format_number(bin.right) << ',' << bin.count << ','
           << format_number(bin.gaussian_density) << '\n';
    close_output(hist, hist_path);
    written.push_back(hist_path);
  } else {
    const auto path = with_suffix(stem, ".jsonl");
    auto out = open_output(path);
    ordered_json head;
    head["config"] = config_json(result.config);
    head["summary"] = summary_json(result.summary);
    out << head.dump() << '\n';
    for (const auto& t : result.trials) out << trial_json(t).dump() << '\n';
    close_output(out, path);
    written.push_back(path);
  }

  const auto manifest_path = with_suffix(stem, ".manifest.json");
  auto manifest = open_output(manifest_path);
  ordered_json doc;
  doc["code_version"] = result.manifest.code_version;
  doc["seed"] = result.manifest.seed;
  doc["wall_time_seconds"] = result.manifest.wall_time_seconds;
  doc["workers"] = result.manifest.workers;
  manifest << doc.dump(2) << '\n';
  close_output(manifest, manifest_path);
  written.push_back(manifest_path);
  return written;
}

std::vector<TrialRecord> read_trials_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "trial,seed,value,standardized")
    fail(ErrorCode::kIo, "unexpected header in " + path.string());
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) fail(ErrorCode::kIo, "malformed row in " + path.string());
    TrialRecord t;
    t.trial = std::stoull(fields[0]);
    t.seed = std::stoull(fields[1]);
    t.value = parse_double(fields[2], path);
    t.standardized = parse_double(fields[3], path);
    out.push_back(t);
  }
  return out;
}

Summary read_summary_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "statistic,value") fail(ErrorCode::kIo, "unexpected header in " + path.string());
  Summary out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) fail(ErrorCode::kIo, "malformed row in " + path.string());
    out.emplace_back(line.substr(0, comma), parse_double(line.substr(comma + 1), path));
  }
  return out;
}

ExperimentResult read_results_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kIo, "empty results file " + path.string());
  ExperimentResult r;
  try {
    const auto head = ordered_json::parse(line);
    r.config = config_from_json(head.at("config").dump());
    for (const auto& [name, value] : head.at("summary").items()) r.summary.emplace_back(name, value.get<double>());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto doc = ordered_json::parse(line);
      TrialRecord t;
      t.trial = doc.at("trial").get<std::uint64_t>();
      t.seed = doc.at("seed").get<std::uint64_t>();
      t.value = doc.at("value").get<double>();
      t.standardized = doc.at("standardized").get<double>();
      if (doc.contains("reference")) t.reference = doc.at("reference").get<double>();
      r.trials.push_back(t);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, "malformed results file " + path.string() + ": " + e.what());
  }
  return r;
}

std::vector<CheckOutcome> evaluate_checks(const ExperimentResult& result, std::string_view checks) {
  std::vector<CheckOutcome> out;
  for (auto expr : split(checks, ',')) {
    expr.erase(std::remove(expr.begin(), expr.end(), ' '), expr.end());
    if (expr.empty()) continue;
    std::string op;
    std::size_t pos = std::string::npos;
    for (const char* candidate : {"<=", ">=", "<", ">"}) {
      pos = expr.find(candidate);
      if (pos != std::string::npos) {
        op = candidate;
        break;
      }
    }
    usage_require(pos != std::string::npos && pos > 0, "malformed check '" + expr + "'");
    std::string name = expr.substr(0, pos);
    if (name == "ks") name = "ks_statistic";
    const std::string threshold_text = expr.substr(pos + op.size());
    char* end = nullptr;
    const double threshold = std::strtod(threshold_text.c_str(), &end);
    usage_require(!threshold_text.empty() && *end == '\0', "malformed threshold in check '" + expr + "'");
    const auto value = result.summary_value(name);
    usage_require(value.has_value(), "check refers to unknown statistic '" + name + "'");
    bool passed = false;
    if (op == "<=") passed = *value <= threshold;
    else if (op == ">=") passed = *value >= threshold;
    else if (op == "<") passed = *value < threshold;
    else passed = *value > threshold;
    out.push_back({expr, name, *value, passed});
  }
  usage_require(!out.empty(), "no checks given");
  return out;
}

}  // namespace rmtlab
