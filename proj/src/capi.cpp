#include "lrdh/lrdh.h"

#include <algorithm>
#include <map>
#include <memory>
#include <string>

#include "lrdh/error.hpp"
#include "lrdh/experiments.hpp"
#include "lrdh/fbm.hpp"
#include "lrdh/randfield.hpp"
#include "lrdh/stats.hpp"
#include "lrdh/young.hpp"

namespace ex = lrdh::experiments;

struct lrdh_config {
  std::string experiment;
  ex::Preset preset = ex::Preset::kFull;
  std::map<std::string, std::string> overrides;
  std::string rendered;
};

struct lrdh_report {
  ex::ExperimentReport report;
  std::string summary;
};

namespace {

thread_local std::string last_error;

template <class F>
lrdh_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return LRDH_OK;
  } catch (const lrdh::Error& e) {
    last_error = e.what();
    return static_cast<lrdh_status>(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return LRDH_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return LRDH_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  lrdh::require(p != nullptr, std::string(what) + " must not be null");
}

ex::Preset to_preset(lrdh_preset p) {
  lrdh::require(p == LRDH_PRESET_SMOKE || p == LRDH_PRESET_FULL, "unknown preset");
  return p == LRDH_PRESET_SMOKE ? ex::Preset::kSmoke : ex::Preset::kFull;
}

}  // namespace

extern "C" {

const char* lrdh_last_error(void) { return last_error.c_str(); }

const char* lrdh_status_name(lrdh_status status) {
  if (status == LRDH_OK) return "Ok";
  return lrdh::error_code_name(static_cast<lrdh::ErrorCode>(status));
}

const char* lrdh_version(void) { return ex::kCodeVersion; }

size_t lrdh_experiment_count(void) { return ex::experiment_names().size(); }

const char* lrdh_experiment_name(size_t index) {
  const auto& names = ex::experiment_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

lrdh_status lrdh_config_create(const char* experiment, lrdh_preset preset, lrdh_config** out) {
  return guarded([&] {
    need(experiment, "experiment");
    need(out, "out");
    *out = nullptr;
    auto cfg = std::make_unique<lrdh_config>();
    cfg->experiment = experiment;
    cfg->preset = to_preset(preset);
    ex::make_config(cfg->experiment, cfg->preset, {});
    *out = cfg.release();
  });
}

lrdh_status lrdh_config_load_file(lrdh_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    auto merged = cfg->overrides;
    for (const auto& [k, v] : ex::read_config_file(path)) merged[k] = v;
    ex::make_config(cfg->experiment, cfg->preset, merged);
    cfg->overrides = std::move(merged);
  });
}

lrdh_status lrdh_config_file_preset(const char* path, lrdh_preset* out, int* found) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    need(found, "found");
    const auto kv = ex::read_config_file(path);
    const auto it = kv.find("preset");
    *found = it != kv.end();
    if (*found)
      *out = ex::parse_preset(it->second) == ex::Preset::kSmoke ? LRDH_PRESET_SMOKE
                                                                : LRDH_PRESET_FULL;
  });
}

lrdh_status lrdh_config_set(lrdh_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    auto merged = cfg->overrides;
    merged[key] = value;
    ex::make_config(cfg->experiment, cfg->preset, merged);
    cfg->overrides = std::move(merged);
  });
}

const char* lrdh_config_render(lrdh_config* cfg) {
  if (!cfg) return nullptr;
  const auto st = guarded([&] {
    cfg->rendered = ex::render_config(ex::make_config(cfg->experiment, cfg->preset, cfg->overrides));
  });
  return st == LRDH_OK ? cfg->rendered.c_str() : nullptr;
}

void lrdh_config_destroy(lrdh_config* cfg) { delete cfg; }

lrdh_status lrdh_run_experiment(const lrdh_config* cfg, int threads, lrdh_report** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = nullptr;
    const auto c = ex::make_config(cfg->experiment, cfg->preset, cfg->overrides);
    auto r = std::make_unique<lrdh_report>();
    r->report = ex::run_experiment(c, threads);
    *out = r.release();
  });
}

int lrdh_report_all_passed(const lrdh_report* report) {
  return report && report->report.all_passed() ? 1 : 0;
}

size_t lrdh_report_gate_count(const lrdh_report* report) {
  return report ? report->report.gates.size() : 0;
}

lrdh_status lrdh_report_gate(const lrdh_report* report, size_t index, const char** criterion,
                             const char** description, double* value, double* target,
                             double* tolerance, int* passed) {
  return guarded([&] {
    need(report, "report");
    lrdh::require(index < report->report.gates.size(), "gate index out of range");
    const auto& g = report->report.gates[index];
    if (criterion) *criterion = g.criterion.c_str();
    if (description) *description = g.description.c_str();
    if (value) *value = g.value;
    if (target) *target = g.target;
    if (tolerance) *tolerance = g.tolerance;
    if (passed) *passed = g.pass ? 1 : 0;
  });
}

const char* lrdh_report_summary_csv(lrdh_report* report) {
  if (!report) return nullptr;
  report->summary = ex::summary_csv(report->report);
  return report->summary.c_str();
}

lrdh_status lrdh_report_write(const lrdh_report* report, const char* dir) {
  return guarded([&] {
    need(report, "report");
    need(dir, "dir");
    ex::write_report(report->report, dir);
  });
}

void lrdh_report_destroy(lrdh_report* report) { delete report; }

lrdh_status lrdh_covariance_value(lrdh_covariance_model model, double alpha, double x,
                                  double* out) {
  return guarded([&] {
    need(out, "out");
    lrdh::require(model == LRDH_COVARIANCE_CAUCHY || model == LRDH_COVARIANCE_FGN_INCREMENT,
                  "unknown covariance model");
    const lrdh::randfield::CovarianceSpec spec{
        alpha, model == LRDH_COVARIANCE_CAUCHY ? lrdh::randfield::CovarianceModel::kCauchy
                                               : lrdh::randfield::CovarianceModel::kFgnIncrement};
    *out = lrdh::randfield::covariance_value(spec, x);
  });
}

lrdh_status lrdh_fbm_covariance(double hurst, double s, double t, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = lrdh::fbm::fbm_covariance(hurst, s, t);
  });
}

lrdh_status lrdh_sample_fbm(double hurst, double start, double step, size_t count,
                            uint64_t seed, int use_cholesky, double* out) {
  return guarded([&] {
    need(out, "out");
    const lrdh::GridSpec grid{start, step, count};
    const auto path = use_cholesky ? lrdh::fbm::sample_fbm_cholesky(hurst, grid, seed)
                                   : lrdh::fbm::sample_fbm_fast(hurst, grid, seed);
    std::copy(path.values.begin(), path.values.end(), out);
  });
}

lrdh_status lrdh_young_integral(const double* f, const double* g, size_t count, double start,
                                double step, double* out) {
  return guarded([&] {
    need(f, "f");
    need(g, "g");
    need(out, "out");
    const lrdh::GridSpec grid{start, step, count};
    const lrdh::young::SampledFunction ff{grid, std::vector<double>(f, f + count)};
    const lrdh::young::SampledFunction gg{grid, std::vector<double>(g, g + count)};
    *out = lrdh::young::young_integral(ff, gg);
  });
}

lrdh_status lrdh_wasserstein2(const double* a, size_t na, const double* b, size_t nb,
                              uint64_t seed, double* out) {
  return guarded([&] {
    need(out, "out");
    lrdh::require(na == 0 || a != nullptr, "a must not be null");
    lrdh::require(nb == 0 || b != nullptr, "b must not be null");
    *out = lrdh::stats::wasserstein2({a, na}, {b, nb}, seed);
  });
}

}  // extern "C"
