// Experiment runners, snapshot dumps and convergence sweeps.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sipx/harness/config.hpp"
#include "sipx/harness/manifest.hpp"

namespace sipx {

struct RunOptions {
  /// Recorded in the manifest.
  std::string command = "run";
  /// Replaces config.output_dir when non-empty.
  std::filesystem::path out_dir;
  /// 0 defers to SIPX_THREADS, then the hardware.
  int threads = 0;
  bool force = false;
};

/// Runs the configured experiment over the n-ladder and writes CSVs plus manifest.json.
/// Verdicts are always computed and stored in the manifest; callers decide whether they gate.
RunManifest run(const ExperimentConfig& config, const RunOptions& options);

/// Writes snapshots_n<n>.csv: one row per (replica, snapshot) holding d, n, M, t and the flat occupancy array.
RunManifest dump_snapshots(const ExperimentConfig& config, const RunOptions& options);

struct SweepColumn {
  std::string name;
  /// "decreasing" (strictly, zero counts as converged), "scaling" (successive ratios within
  /// [0.7, 1.4] times (n'/n)^d) or "report".
  std::string rule;
  std::vector<double> values;
  /// values[i] / values[i+1].
  std::vector<double> ratios;
  bool pass = true;
};

struct ConvergenceTable {
  std::vector<int> ns;
  std::vector<SweepColumn> columns;

  bool pass() const;
  std::string to_csv() const;
};

/// Builds the per-n table from run metrics. Throws ConfigError with fewer than two ladder points
/// or when a column misses a ladder point.
ConvergenceTable sweep_report(const std::vector<Metric>& metrics, int dim);
ConvergenceTable sweep_report(const std::vector<RunManifest>& manifests);

/// Column rule from the metric name prefix.
std::string sweep_rule(const std::string& metric);

}  // namespace sipx
