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

#include "rmtlab/rmtlab.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "rmtlab/error.hpp"
#include "rmtlab/harness.hpp"
#include "rmtlab/moments.hpp"
#include "rmtlab/weingarten.hpp"

struct rmtlab_result {
  rmtlab::ExperimentResult result;
  std::string config_json;
  std::string report;
};

struct rmtlab_wg_table {
  rmtlab::WeingartenTable table;
  std::vector<std::string> labels;
};

namespace {

thread_local std::string last_error;

rmtlab_status set_error(rmtlab_status status, const std::string& what) {
  last_error = what;
  return status;
}

template <class F>
rmtlab_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return RMTLAB_OK;
  } catch (const rmtlab::Error& e) {
    return set_error(static_cast<rmtlab_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RMTLAB_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RMTLAB_INTERNAL, e.what());
  } catch (...) {
    return set_error(RMTLAB_INTERNAL, "unknown failure");
  }
}

void require_pointer(const void* p, const char* name) {
  if (p == nullptr) rmtlab::fail(rmtlab::ErrorCode::kInvalidArgument, std::string(name) + " must not be null");
}

}  // namespace

extern "C" {

const char* rmtlab_version(void) { return RMTLAB_VERSION_STRING; }

const char* rmtlab_status_name(rmtlab_status status) {
  if (status == RMTLAB_OK) return "ok";
  if (status < RMTLAB_OK || status > RMTLAB_INTERNAL) return "unknown";
  return rmtlab::to_string(static_cast<rmtlab::ErrorCode>(static_cast<int>(status)));
}

const char* rmtlab_last_error(void) { return last_error.c_str(); }

rmtlab_status rmtlab_run_json(const char* config_json, rmtlab_result** out) {
  return guarded([&] {
    require_pointer(config_json, "config_json");
    require_pointer(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<rmtlab_result>();
    handle->result = rmtlab::run_experiment(rmtlab::config_from_json(config_json));
    handle->config_json = rmtlab::config_to_json(handle->result.config);
    *out = handle.release();
  });
}

void rmtlab_result_free(rmtlab_result* result) { delete result; }

rmtlab_status rmtlab_result_config_json(const rmtlab_result* result, const char** out) {
  return guarded([&] {
    require_pointer(result, "result");
    require_pointer(out, "out");
    *out = result->config_json.c_str();
  });
}

rmtlab_status rmtlab_result_trial_count(const rmtlab_result* result, size_t* out) {
  return guarded([&] {
    require_pointer(result, "result");
    require_pointer(out, "out");
    *out = result->result.trials.size();
  });
}

rmtlab_status rmtlab_result_trial(const rmtlab_result* result, size_t index, uint64_t* seed, double* value,
                                  double* standardized) {
  return guarded([&] {
    require_pointer(result, "result");
    rmtlab::require(index < result->result.trials.size(), "trial index out of range");
    const auto& t = result->result.trials[index];
    if (seed) *seed = t.seed;
    if (value) *value = t.value;
    if (standardized) *standardized = t.standardized;
  });
}

rmtlab_status rmtlab_result_summary_count(const rmtlab_result* result, size_t* out) {
  return guarded([&] {
    require_pointer(result, "result");
    require_pointer(out, "out");
    *out = result->result.summary.size();
  });
}

rmtlab_status rmtlab_result_summary_entry(const rmtlab_result* result, size_t index, const char** name,
                                          double* value) {
  return guarded([&] {
    require_pointer(result, "result");
    rmtlab::require(index < result->result.summary.size(), "summary index out of range");
    const auto& entry = result->result.summary[index];
    if (name) *name = entry.first.c_str();
    if (value) *value = entry.second;
  });
}

rmtlab_status rmtlab_result_summary_get(const rmtlab_result* result, const char* name, double* value) {
  return guarded([&] {
    require_pointer(result, "result");
    require_pointer(name, "name");
    require_pointer(value, "value");
    const auto v = result->result.summary_value(name);
    rmtlab::require(v.has_value(), std::string("no summary statistic named '") + name + "'");
    *value = *v;
  });
}

rmtlab_status rmtlab_result_wall_time(const rmtlab_result* result, double* seconds) {
  return guarded([&] {
    require_pointer(result, "result");
    require_pointer(seconds, "seconds");
    *seconds = result->result.manifest.wall_time_seconds;
  });
}

rmtlab_status rmtlab_result_write(const rmtlab_result* result, const char* format, const char* stem) {
  return guarded([&] {
    require_pointer(result, "result");
    require_pointer(format, "format");
    require_pointer(stem, "stem");
    rmtlab::emit_results(result->result, rmtlab::parse_output_format(format), stem);
  });
}

rmtlab_status rmtlab_result_check(rmtlab_result* result, const char* checks, int* all_passed, const char** report) {
  return guarded([&] {
    require_pointer(result, "result");
    require_pointer(checks, "checks");
    require_pointer(all_passed, "all_passed");
    const auto outcomes = rmtlab::evaluate_checks(result->result, checks);
    std::ostringstream text;
    bool ok = true;
    for (const auto& o : outcomes) {
      text << (o.passed ? "PASS " : "FAIL ") << o.expression << " (" << o.statistic << " = "
           << rmtlab::format_number(o.value) << ")\n";
      ok = ok && o.passed;
    }
    result->report = text.str();
    *all_passed = ok ? 1 : 0;
    if (report) *report = result->report.c_str();
  });
}

rmtlab_status rmtlab_wg_table_create(int k, int m, int pseudo, rmtlab_wg_table** out) {
  return guarded([&] {
    require_pointer(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<rmtlab_wg_table>();
    handle->table = rmtlab::weingarten_table(k, m, pseudo ? rmtlab::GramInverse::kPseudo : rmtlab::GramInverse::kStrict);
    for (const auto& matching : handle->table.matchings) handle->labels.push_back(matching.to_string());
    *out = handle.release();
  });
}

void rmtlab_wg_table_free(rmtlab_wg_table* table) { delete table; }

rmtlab_status rmtlab_wg_table_size(const rmtlab_wg_table* table, size_t* out) {
  return guarded([&] {
    require_pointer(table, "table");
    require_pointer(out, "out");
    *out = table->labels.size();
  });
}

rmtlab_status rmtlab_wg_table_matching(const rmtlab_wg_table* table, size_t index, const char** out) {
  return guarded([&] {
    require_pointer(table, "table");
    require_pointer(out, "out");
    rmtlab::require(index < table->labels.size(), "matching index out of range");
    *out = table->labels[index].c_str();
  });
}

rmtlab_status rmtlab_wg_table_value(const rmtlab_wg_table* table, size_t a, size_t b, double* out) {
  return guarded([&] {
    require_pointer(table, "table");
    require_pointer(out, "out");
    rmtlab::require(a < table->labels.size() && b < table->labels.size(), "matching index out of range");
    *out = table->table.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  });
}

rmtlab_status rmtlab_wg_table_write_csv(const rmtlab_wg_table* table, const char* path) {
  return guarded([&] {
    require_pointer(table, "table");
    require_pointer(path, "path");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) rmtlab::fail(rmtlab::ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
    rmtlab::write_table_csv(table->table, out);
    out.flush();
    if (!out) rmtlab::fail(rmtlab::ErrorCode::kIo, std::string("write to '") + path + "' failed");
  });
}

rmtlab_status rmtlab_digamma(double x, double* out) {
  return guarded([&] {
    require_pointer(out, "out");
    *out = rmtlab::digamma(x);
  });
}

rmtlab_status rmtlab_trigamma(double x, double* out) {
  return guarded([&] {
    require_pointer(out, "out");
    *out = rmtlab::trigamma(x);
  });
}

rmtlab_status rmtlab_beta_log_moments(int n, int l, double* mean, double* variance) {
  return guarded([&] {
    const auto m = rmtlab::beta_log_moments(n, l);
    if (mean) *mean = m.mean;
    if (variance) *variance = m.variance;
  });
}

rmtlab_status rmtlab_theorem1_ks_bound(int n, int l, int factors, double c_const, double* out) {
  return guarded([&] {
    require_pointer(out, "out");
    rmtlab::require(factors >= 1, "N must be >= 1");
    *out = rmtlab::theorem1_ks_bound(rmtlab::EnsembleSpec::uniform(n, l, factors), c_const);
  });
}

rmtlab_status rmtlab_skorski_tail_bound(double alpha, double beta, double eps, int upper, double* out) {
  return guarded([&] {
    require_pointer(out, "out");
    *out = rmtlab::skorski_tail_bound(alpha, beta, eps, upper ? rmtlab::TailSide::kUpper : rmtlab::TailSide::kLower);
  });
}

rmtlab_status rmtlab_det_gram_moment_exact(int k, int n, int m, int p, double* out) {
  return guarded([&] {
    require_pointer(out, "out");
    *out = rmtlab::det_gram_moment_exact(k, n, m, p);
  });
}

rmtlab_status rmtlab_orthogonal_moment(const int* i_indices, const int* j_indices, size_t order, int m,
                                       double* out) {
  return guarded([&] {
    require_pointer(out, "out");
    if (order > 0) {
      require_pointer(i_indices, "i_indices");
      require_pointer(j_indices, "j_indices");
    }
    rmtlab::MomentQuery q;
    if (order > 0) {
      q.i_indices.assign(i_indices, i_indices + order);
      q.j_indices.assign(j_indices, j_indices + order);
    }
    *out = rmtlab::orthogonal_moment(q, m);
  });
}

uint64_t rmtlab_derive_trial_seed(uint64_t master, uint64_t index) {
  return rmtlab::derive_trial_seed(rmtlab::RandomSeed{master}, index).value;
}

}  // extern "C"
