#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cdsmooth/iterate.hpp"
#include "cdsmooth/metrics.hpp"
#include "cdsmooth/model.hpp"

namespace cdsmooth {

/// Run configuration, read from a flat JSON object.
struct ExperimentConfig {
  std::string model = "linear";  ///< linear | reentry | coordturn
  DiffusionKind kind = DiffusionKind::First;
  SmootherType smoother = SmootherType::TypeIII;
  ApproximatorKind approximator = ApproximatorKind::Cubature;
  int iterations = 4;
  double tol = 1e-6;
  std::optional<double> dt_integration;  ///< smoother step; rounded to whole substeps
  std::optional<int> substeps;           ///< overrides dt_integration
  int mc_runs = 1;
  std::uint64_t seed = 0;
  std::optional<double> sim_dt;
  std::optional<double> radar_x;
  std::optional<double> radar_y;
  std::optional<double> psi_prior_var;  ///< coordturn only
  std::string out_dir = "out";
  int threads = 0;  ///< 0: hardware concurrency

  /// Throws InvalidArgument on unknown keys or bad values.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  std::string to_json_text() const;
  void validate() const;
};

/// Everything a trial needs besides the random streams.
struct ExperimentSetup {
  ModelSpec model;
  std::vector<double> measurement_times;
  int substeps = 1;
  double sim_dt = 1e-3;
  std::vector<int> pos_block;
  std::vector<int> vel_block;
  std::vector<int> par_block;
  IterationConfig iteration;
};

ExperimentSetup make_setup(const ExperimentConfig& cfg);

struct IterationMetrics {
  int iteration = 0;
  double rmse_pos = 0.0;
  double rmse_vel = 0.0;
  double rmse_par = 0.0;
  double chi2_avg = 0.0;
  std::vector<double> nees;  ///< per measurement node
};

struct TrialReport {
  int trial = 0;
  /// Iterations 0..max_iters. A trial that converges early repeats its last
  /// iterate so all trials share the same rows.
  std::vector<IterationMetrics> iterations;
  int converged_at = -1;  ///< first j with delta < tol, or −1
  double wall_seconds = 0.0;
};

struct TrialFailure {
  int trial = 0;
  std::string message;
};

struct SummaryRow {
  int iteration = 0;
  double rmse_pos = 0.0;
  double rmse_vel = 0.0;
  double rmse_par = 0.0;
  double chi2_avg = 0.0;
};

struct Chi2Row {
  double time = 0.0;
  int iteration = 0;
  double chi2_mean = 0.0;
  Chi2Band band;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<double> measurement_times;
  std::vector<TrialReport> trials;  ///< successful trials, by trial index
  std::vector<TrialFailure> failures;
  std::vector<SummaryRow> summary;
  std::vector<Chi2Row> chi2;
  double wall_seconds = 0.0;
};

/// Simulates, filters, smooths and iterates every trial.
TrialReport run_trial(const ExperimentSetup& setup, std::uint64_t seed, int trial);

/// Runs all trials in a worker pool. Failed trials are excluded; throws Error
/// if more than 10% of the trials fail.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes trials.csv, chi2_timeseries.csv, summary.csv and metadata.json.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir);

}  // namespace cdsmooth
