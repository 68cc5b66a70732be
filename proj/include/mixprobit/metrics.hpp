#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mixprobit {

// Average symmetric Kullback-Leibler divergence between two Bernoulli
// probability vectors. Nonnegative; zero iff equal after clamping to
// [1e-12, 1 - 1e-12]. Smaller is better.
double askld(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate);

double ase(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate);
// (ase_other - ase_self) / ase_self * 100.
double pct_delta_ase(double ase_other, double ase_self);

// 1 where [low, high] contains the truth.
Eigen::VectorXi ecp_hits(const Eigen::VectorXd& truth, const Eigen::VectorXd& low,
                         const Eigen::VectorXd& high);
// Per-point coverage over the rows (replications) of a hit matrix.
Eigen::VectorXd ecp(const Eigen::MatrixXi& hits);
double pct_delta_aecp(const Eigen::MatrixXi& hits, double nominal = 0.9);

struct RocCurve {
  std::vector<double> thresholds;  // descending; first is +inf
  std::vector<double> tpr;
  std::vector<double> fpr;
  double auc = 0.0;
};

RocCurve roc(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores);

}  // namespace mixprobit
