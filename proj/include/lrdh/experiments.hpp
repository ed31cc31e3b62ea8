#pragma once

// Config-driven verification experiments and their reports.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lrdh::experiments {

enum class Preset { kSmoke, kFull };

/// Plain-text config: `key = value` lines, `#` comments, comma lists.
struct ExperimentConfig {
  std::string experiment;
  Preset preset = Preset::kFull;
  double alpha = 0.5;
  std::vector<double> epsilon_list;
  std::vector<double> t_list;
  double x = 0.0;
  std::string phi;
  std::string covariance = "fgn-increment";
  std::string transform = "identity";
  std::size_t n_env = 0;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  int bins = 0;
  std::uint64_t master_seed = 20240601;
  std::string output;
};

const std::vector<std::string>& experiment_names();

/// Defaults for the experiment and preset; keys present in `overrides`
/// replace them. Unknown keys throw ConfigError.
ExperimentConfig make_config(const std::string& experiment, Preset preset,
                             const std::map<std::string, std::string>& overrides);

std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);
Preset parse_preset(const std::string& name);

/// Canonical `key = value` rendering; reparsing it reproduces the config.
std::string render_config(const ExperimentConfig& cfg);

struct Row {
  std::string statistic;
  double epsilon = 0.0;  // NaN when not applicable
  double t = 0.0;
  double x = 0.0;
  double value = 0.0;
  double se = 0.0;
};

struct Gate {
  std::string criterion;  // acceptance-criterion id, e.g. "AC4.cov"
  std::string description;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RawSeries {
  std::string name;
  double epsilon = 0.0;
  double t = 0.0;
  std::vector<double> values;
};

struct ExperimentReport {
  std::string experiment;
  std::string provenance;  // render_config output plus code version
  std::vector<Row> rows;
  std::vector<Gate> gates;
  std::vector<RawSeries> raw;
  std::vector<std::string> notes;

  bool all_passed() const;
  void add_row(std::string statistic, double eps, double t, double x,
               double value, double se);
  void add_gate(std::string criterion, std::string description, double value,
                double target, double tolerance, bool pass);
};

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads);

ExperimentReport run_field_diagnostics(const ExperimentConfig& cfg, int threads);
ExperimentReport run_identity_checks(const ExperimentConfig& cfg, int threads);
ExperimentReport run_functional_convergence(const ExperimentConfig& cfg,
                                            int threads);
ExperimentReport run_chaos_negligibility(const ExperimentConfig& cfg,
                                         int threads);
ExperimentReport run_homogenization_rate(const ExperimentConfig& cfg,
                                         int threads);
ExperimentReport run_fluctuation_clt(const ExperimentConfig& cfg, int threads);
ExperimentReport run_msd_scaling(const ExperimentConfig& cfg, int threads);

/// Summary CSV: `#` provenance lines, then
/// statistic,epsilon,t,x,value,se rows and gate rows, 17 significant digits.
std::string summary_csv(const ExperimentReport& report);
/// Raw CSV: series,epsilon,t,index,value.
std::string raw_csv(const ExperimentReport& report);

/// Writes <dir>/<experiment>_summary.csv, _raw.csv and _config.txt.
void write_report(const ExperimentReport& report, const std::string& dir);

inline constexpr const char* kCodeVersion = "lrdh 0.1.0";

}  // namespace lrdh::experiments
