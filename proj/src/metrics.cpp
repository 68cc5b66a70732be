#include "mixprobit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixprobit/error.hpp"

namespace mixprobit {

namespace {
constexpr double kClamp = 1e-12;

void check_lengths(Eigen::Index a, Eigen::Index b) {
  if (a != b)
    throw DataError("metric inputs differ in length (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
  if (a == 0) throw DataError("metric inputs are empty");
}
}  // namespace

double askld(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) {
  check_lengths(truth.size(), estimate.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const double h1 = std::clamp(truth[i], kClamp, 1.0 - kClamp);
    const double e1 = std::clamp(estimate[i], kClamp, 1.0 - kClamp);
    const double h0 = 1.0 - h1;
    const double e0 = 1.0 - e1;
    // I(H, E) + I(E, H) collapses to sum_k (E_k - H_k) log(E_k / H_k).
    total += (e0 - h0) * std::log(e0 / h0) + (e1 - h1) * std::log(e1 / h1);
  }
  return total / static_cast<double>(truth.size());
}

double ase(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) {
  check_lengths(truth.size(), estimate.size());
  return (truth - estimate).squaredNorm() / static_cast<double>(truth.size());
}

double pct_delta_ase(double ase_other, double ase_self) {
  if (!(ase_self > 0.0)) throw DataError("percentage change needs a positive reference ASE");
  return (ase_other - ase_self) / ase_self * 100.0;
}

Eigen::VectorXi ecp_hits(const Eigen::VectorXd& truth, const Eigen::VectorXd& low,
                         const Eigen::VectorXd& high) {
  check_lengths(truth.size(), low.size());
  check_lengths(truth.size(), high.size());
  Eigen::VectorXi hits(truth.size());
  for (Eigen::Index i = 0; i < truth.size(); ++i)
    hits[i] = (low[i] <= truth[i] && truth[i] <= high[i]) ? 1 : 0;
  return hits;
}

Eigen::VectorXd ecp(const Eigen::MatrixXi& hits) {
  if (hits.rows() == 0) throw DataError("coverage needs at least one replication");
  return hits.cast<double>().colwise().mean().transpose();
}

double pct_delta_aecp(const Eigen::MatrixXi& hits, double nominal) {
  if (!(nominal > 0.0 && nominal < 1.0)) throw UsageError("nominal level must lie in (0, 1)");
  return 100.0 * (ecp(hits).mean() - nominal) / nominal;
}

RocCurve roc(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores) {
  check_lengths(labels.size(), scores.size());
  const Eigen::Index n = labels.size();
  double positives = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("ROC labels must be 0 or 1");
    positives += labels[i];
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0)
    throw DataError("ROC needs at least one positive and one negative label");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.tpr.push_back(0.0);
  curve.fpr.push_back(0.0);
  double tp = 0.0, fp = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double threshold = scores[order[k]];
    // Tied scores enter at a single threshold.
    while (k < order.size() && scores[order[k]] == threshold) {
      (labels[order[k]] ? tp : fp) += 1.0;
      ++k;
    }
    const double tpr = tp / positives;
    const double fpr = fp / negatives;
    curve.auc += 0.5 * (fpr - curve.fpr.back()) * (tpr + curve.tpr.back());
    curve.thresholds.push_back(threshold);
    curve.tpr.push_back(tpr);
    curve.fpr.push_back(fpr);
  }
  return curve;
}

}  // namespace mixprobit
