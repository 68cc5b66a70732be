#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixprobit/config.hpp"
#include "mixprobit/simgen.hpp"

namespace mixprobit {

struct ReplicationResult {
  int replication = 0;
  bool ok = false;
  std::string error;
  double askld_mixture = 0.0;
  double askld_single = 0.0;
  double ase_mixture = 0.0;
  double ase_single = 0.0;
  std::vector<double> model_probs;  // mixture fit, length R
  Eigen::VectorXi hits_mixture;
  Eigen::VectorXi hits_single;

  // Positive values favour the mixture.
  double askld_difference() const { return askld_single - askld_mixture; }
};

struct StudyResult {
  Benchmark function = Benchmark::kSin;
  Eigen::MatrixXd covariates;  // shared design across replications
  Eigen::VectorXd truth;
  std::vector<ReplicationResult> replications;
  int max_components = 3;
  double level = 0.9;

  std::vector<double> mean_model_probs() const;
  double median_askld_difference() const;
  double median_askld_mixture() const;
  double pct_delta_aecp_mixture() const;
  double pct_delta_aecp_single() const;
  int succeeded() const;
};

// Simulation study: every replication redraws responses on a fixed covariate
// design, fits the mixture (R from config) and a single spline (R = 1), and
// records ASKLD, coverage and posterior model probabilities. Replications run
// on `jobs` threads with independent substreams.
StudyResult run_study(const RunConfig& config, int jobs);

// One row per replication plus a summary row of column means.
void write_study_csv(const std::string& path, const StudyResult& study);
// Per-point coverage over replications.
void write_coverage_csv(const std::string& path, const StudyResult& study);

}  // namespace mixprobit
