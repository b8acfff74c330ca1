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

// rmtlab command line. Talks to the library only through the C interface.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmtlab/rmtlab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitIo = 3;

int exit_code_for(rmtlab_status status) {
  if (status == RMTLAB_OK) return kExitOk;
  if (status == RMTLAB_IO) return kExitIo;
  return kExitUsage;
}

int report_failure(rmtlab_status status) {
  std::cerr << "rmtlab: " << rmtlab_status_name(status) << ": " << rmtlab_last_error() << '\n';
  return exit_code_for(status);
}

struct OutputOptions {
  std::string out;
  std::string format = "csv";
  std::string check;
  bool quiet = false;
};

void add_output_options(CLI::App* cmd, OutputOptions& o) {
  cmd->add_option("--out", o.out, "Write results under this path stem");
  cmd->add_option("--format", o.format, "Result format")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--check", o.check, "Comma-separated thresholds, e.g. ks<=0.06");
  cmd->add_flag("--quiet", o.quiet, "Do not print the summary");
}

std::string stem_or(const OutputOptions& o, const nlohmann::json& config) {
  if (!o.out.empty()) return o.out;
  if (config.contains("output_path")) return config["output_path"].get<std::string>();
  return {};
}

int run_and_report(const nlohmann::json& config, const OutputOptions& o) {
  rmtlab_result* result = nullptr;
  rmtlab_status status = rmtlab_run_json(config.dump().c_str(), &result);
  if (status != RMTLAB_OK) return report_failure(status);
  std::unique_ptr<rmtlab_result, void (*)(rmtlab_result*)> guard(result, rmtlab_result_free);

  if (!o.quiet) {
    size_t count = 0;
    rmtlab_result_summary_count(result, &count);
    for (size_t i = 0; i < count; ++i) {
      const char* name = nullptr;
      double value = 0.0;
      rmtlab_result_summary_entry(result, i, &name, &value);
      std::printf("%s %.17g\n", name, value);
    }
  }

  const std::string stem = stem_or(o, config);
  if (!stem.empty()) {
    status = rmtlab_result_write(result, o.format.c_str(), stem.c_str());
    if (status != RMTLAB_OK) return report_failure(status);
  }

  if (!o.check.empty()) {
    int passed = 0;
    const char* report = nullptr;
    status = rmtlab_result_check(result, o.check.c_str(), &passed, &report);
    if (status != RMTLAB_OK) return report_failure(status);
    std::fputs(report, stdout);
    if (!passed) return kExitCheckFailed;
  }
  return kExitOk;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw CLI::ValidationError("--eps", "'" + item + "' is not a number");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmtlab: verification lab for Lyapunov exponents of truncated orthogonal products"};
  app.set_version_flag("--version", rmtlab_version());
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int workers = 0;
  std::string convention = "corrected";
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--workers", workers, "Worker threads (0: RMTLAB_WORKERS or all cores)")->check(CLI::NonNegativeNumber);
  };

  // clt
  OutputOptions clt_out;
  std::string config_path;
  auto* clt = app.add_subcommand("clt", "Run an experiment described by a JSON config");
  clt->add_option("--config", config_path, "Experiment config (JSON)")->required();
  clt->add_option("--workers", workers, "Worker threads (overrides the config)")->check(CLI::NonNegativeNumber);
  add_output_options(clt, clt_out);

  // identity
  OutputOptions id_out;
  int n = 4, l = 4, factors = 100, trials = 1000;
  auto* identity = app.add_subcommand("identity", "Frame growth against the telescoped Beta sum");
  identity->add_option("--n", n, "Block size")->capture_default_str();
  identity->add_option("--l", l, "Truncation")->capture_default_str();
  identity->add_option("--N", factors, "Number of factors")->capture_default_str();
  identity->add_option("--trials", trials, "Trials")->capture_default_str();
  identity->add_option("--convention", convention, "Scaling convention")->check(CLI::IsMember({"corrected", "paper"}));
  add_common(identity);
  add_output_options(identity, id_out);

  // weingarten
  auto* wg = app.add_subcommand("weingarten", "Weingarten tables and moment checks");
  wg->require_subcommand(1);
  int k = 2, m = 6, wl = -1;
  std::string table_out;
  bool pseudo = false;
  auto* wg_table = wg->add_subcommand("table", "Write the Weingarten table as CSV");
  wg_table->add_option("--k", k, "Half the moment order")->required();
  wg_table->add_option("--m", m, "Dimension")->required();
  wg_table->add_option("--out", table_out, "CSV path")->required();
  wg_table->add_flag("--pseudo", pseudo, "Use the pseudo-inverse when the Gram matrix is singular");
  OutputOptions wgv_out;
  int wg_trials = 10000;
  auto* wg_verify = wg->add_subcommand("verify", "Exact moments against Haar Monte Carlo");
  wg_verify->add_option("--k", k, "Frame size")->required();
  wg_verify->add_option("--m", m, "Ambient dimension")->required();
  wg_verify->add_option("--l", wl, "Truncation (default: 2 when m - 2 >= k, else 0)");
  wg_verify->add_option("--trials", wg_trials, "Trials")->capture_default_str();
  add_common(wg_verify);
  add_output_options(wg_verify, wgv_out);

  // tails
  OutputOptions tails_out;
  double alpha = 2.0, beta = 2.0;
  std::string eps = "0.1,0.2,0.3";
  int tail_trials = 100000;
  auto* tails = app.add_subcommand("tails", "Empirical Beta tails against the sub-Gamma bound");
  tails->add_option("--alpha", alpha, "Beta alpha (multiple of 1/2)")->capture_default_str();
  tails->add_option("--beta", beta, "Beta beta (multiple of 1/2)")->capture_default_str();
  tails->add_option("--trials", tail_trials, "Draws")->capture_default_str();
  tails->add_option("--eps", eps, "Comma-separated deviations")->capture_default_str();
  add_common(tails);
  add_output_options(tails, tails_out);

  // lyapunov
  OutputOptions ly_out;
  std::string mode = "qr-accumulate";
  auto* lyapunov = app.add_subcommand("lyapunov", "Lyapunov spectra of truncated orthogonal products");
  lyapunov->add_option("--n", n, "Block size")->capture_default_str();
  lyapunov->add_option("--l", l, "Truncation")->capture_default_str();
  lyapunov->add_option("--N", factors, "Number of factors")->capture_default_str();
  lyapunov->add_option("--trials", trials, "Trials")->capture_default_str();
  lyapunov->add_option("--mode", mode, "Spectrum algorithm")->check(CLI::IsMember({"qr-accumulate", "svd-rescale"}));
  add_common(lyapunov);
  add_output_options(lyapunov, ly_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  nlohmann::json config;
  try {
    if (clt->parsed()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "rmtlab: io: cannot open '" << config_path << "'\n";
        return kExitIo;
      }
      try {
        config = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "rmtlab: usage: " << config_path << ": " << e.what() << '\n';
        return kExitUsage;
      }
      if (clt->count("--workers") && config.is_object()) config["workers"] = workers;
      if (config.is_object() && !config.contains("kind")) config["kind"] = "clt";
      return run_and_report(config, clt_out);
    }
    if (identity->parsed()) {
      config = {{"kind", "identity-check"}, {"n", n}, {"truncations", l}, {"N", factors}, {"trials", trials},
                {"master_seed", seed}, {"convention", convention}, {"workers", workers}};
      return run_and_report(config, id_out);
    }
    if (wg_table->parsed()) {
      rmtlab_wg_table* table = nullptr;
      rmtlab_status status = rmtlab_wg_table_create(k, m, pseudo ? 1 : 0, &table);
      if (status != RMTLAB_OK) return report_failure(status);
      status = rmtlab_wg_table_write_csv(table, table_out.c_str());
      rmtlab_wg_table_free(table);
      if (status != RMTLAB_OK) return report_failure(status);
      return kExitOk;
    }
    if (wg_verify->parsed()) {
      if (wl < 0) wl = m - 2 >= k ? 2 : 0;
      config = {{"kind", "weingarten-verify"}, {"k", k}, {"m", m}, {"truncations", wl}, {"trials", wg_trials},
                {"master_seed", seed}, {"workers", workers}};
      return run_and_report(config, wgv_out);
    }
    if (tails->parsed()) {
      config = {{"kind", "tails"}, {"alpha", alpha}, {"beta", beta}, {"eps", parse_list(eps)},
                {"trials", tail_trials}, {"master_seed", seed}, {"workers", workers}};
      return run_and_report(config, tails_out);
    }
    if (lyapunov->parsed()) {
      config = {{"kind", "lyapunov"}, {"n", n}, {"truncations", l}, {"N", factors}, {"trials", trials},
                {"master_seed", seed}, {"mode", mode}, {"workers", workers}};
      return run_and_report(config, ly_out);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "rmtlab: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "rmtlab: usage: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
