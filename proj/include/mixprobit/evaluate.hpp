#pragma once

#include <string>

#include "mixprobit/metrics.hpp"

namespace mixprobit {

struct Evaluation {
  double askld = 0.0;
  double ase = 0.0;
  double coverage = 0.0;
  double pct_delta_aecp = 0.0;
  double auc;            // NaN without responses
  double pct_delta_ase;  // NaN without a baseline
  RocCurve roc_curve;
};

// Compares an estimate file (prob, low, high) against a truth file holding
// true_prob and optionally the responses w. The baseline, when non-empty, is
// a second estimate file used for %dASE.
Evaluation evaluate_files(const std::string& truth_path, const std::string& estimate_path,
                          const std::string& baseline_path, double level);

void write_evaluation_csv(const std::string& path, const Evaluation& evaluation);
void write_roc_csv(const std::string& path, const RocCurve& curve);

}  // namespace mixprobit
