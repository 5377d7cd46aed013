#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "olod/eig.hpp"
#include "olod/online.hpp"

namespace olod {

enum class ExperimentKind { SweepP, ConvH, CompareS };
std::string to_string(ExperimentKind k);

// What lambda_ref is measured against: a fine FEM eigensolve (the full
// discretization-plus-recombination error) or the directly assembled
// PG-MLOD coarse problem (isolates the recombination error).
enum class ReferenceMode { FineFEM, MLOD };
std::string to_string(ReferenceMode m);

// ---------------------------------------------------------------------------
// Experiment description. JSON configs mirror these fields; unknown keys
// are rejected so typos fail loudly (ConfigError).
// ---------------------------------------------------------------------------
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SweepP;
  int d = 1;
  std::vector<int> nHs = {64};  // conv-h sweeps this list; others use front()
  int nEps = 128;
  int nh = 256;
  int k = 3;
  DefectModel model = DefectModel::Checkerboard;
  double alpha = 0.1;
  double beta = 1.0;
  int inclusionPeriod = 2;  // erasure model only
  std::vector<double> ps = {0.01, 0.02, 0.05, 0.1};
  int samples = 20;
  std::uint64_t seed = 1;
  std::vector<MuStrategy> strategies = {MuStrategy::SumOne};
  InterpVariant variant = InterpVariant::Quasi;
  ReferenceMode reference = ReferenceMode::FineFEM;
  int eigCount = 2;  // eigenvalues averaged into the tracked quantity
  std::string outDir;  // empty: no CSV/SVG emitted by the CLI
};

// Throws ConfigError when values are inconsistent.
void validate(const ExperimentConfig& config);

// JSON <-> config. `overrides` entries look like "samples=10" or
// "p=0.01,0.05" and replace the corresponding field.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig preset_config(const std::string& name);
void apply_override(ExperimentConfig& config, const std::string& keyValue);
std::vector<std::string> preset_names();

PeriodicPattern pattern_of(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// One CSV row. Per-sample rows carry lambda/relErr/wall; aggregate rows
// (sample < 0) carry the RMSE of their group and, for conv-h, the observed
// order (EOC) against the previous coarser mesh of the same group.
// ---------------------------------------------------------------------------
struct ExperimentRecord {
  std::string experiment, strategy, model;
  int d = 1;
  double H = 0, eps = 0, h = 0;
  int k = 0;
  double p = 0;
  int sample = -1;
  double lambdaRef = nan(), lambdaMethod = nan(), relErr = nan();
  double rmse = nan(), eoc = nan();
  double wallMs = nan();

  static double nan();
};

std::string csv_header();
void write_csv(const std::vector<ExperimentRecord>& records,
               const std::string& path);
std::vector<ExperimentRecord> read_csv(const std::string& path);

// Root mean square of relative errors.
double rmse_of(const std::vector<double>& relErrs);

// Runs the experiment; when log is non-null, one progress line per sample.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config,
                                             std::ostream* log = nullptr);

// Writes rmse_vs_p.svg / rmse_vs_H.svg (by experiment kind) into outDir.
void write_charts(const ExperimentConfig& config,
                  const std::vector<ExperimentRecord>& records);

// ---------------------------------------------------------------------------
// Diagnostics for one realization (CLI `diagnose`).
// ---------------------------------------------------------------------------
struct DiagnoseReport {
  std::vector<std::pair<int, double>> correctorDecay;  // (k, relative tail)
  double eta = 0;        // consistency error of the recombined form
  double maxIndicator = 0;  // max_T E_T
  int defectCount = 0;
};
DiagnoseReport diagnose(const ExperimentConfig& config, double p,
                        std::uint64_t sample, MuStrategy strategy);

}  // namespace olod
