#include "mixprobit/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "mixprobit/dataset.hpp"
#include "mixprobit/error.hpp"
#include "mixprobit/format.hpp"

namespace mixprobit {

namespace {

Eigen::VectorXd required_column(const CsvTable& table, const std::string& name,
                                const std::string& path) {
  const int col = table.column(name);
  if (col < 0) throw DataError("'" + path + "' has no column '" + name + "'");
  return table.values.col(col);
}

}  // namespace

Evaluation evaluate_files(const std::string& truth_path, const std::string& estimate_path,
                          const std::string& baseline_path, double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  const CsvTable truth_table = read_csv(truth_path);
  const CsvTable est_table = read_csv(estimate_path);
  const Eigen::VectorXd truth = required_column(truth_table, "true_prob", truth_path);
  const Eigen::VectorXd prob = required_column(est_table, "prob", estimate_path);
  if (prob.size() != truth.size())
    throw DataError("estimate has " + std::to_string(prob.size()) + " rows but truth has " +
                    std::to_string(truth.size()));

  Evaluation out;
  out.askld = askld(truth, prob);
  out.ase = ase(truth, prob);
  out.auc = std::numeric_limits<double>::quiet_NaN();
  out.pct_delta_ase = std::numeric_limits<double>::quiet_NaN();

  const int low_col = est_table.column("low");
  const int high_col = est_table.column("high");
  if (low_col >= 0 && high_col >= 0) {
    const Eigen::VectorXi hits =
        ecp_hits(truth, est_table.values.col(low_col), est_table.values.col(high_col));
    out.coverage = hits.cast<double>().mean();
    out.pct_delta_aecp = pct_delta_aecp(hits.transpose(), level);
  } else {
    out.coverage = std::numeric_limits<double>::quiet_NaN();
    out.pct_delta_aecp = std::numeric_limits<double>::quiet_NaN();
  }

  const int w_col = truth_table.column("w");
  if (w_col >= 0) {
    const Eigen::VectorXi labels = truth_table.values.col(w_col).array().round().cast<int>();
    if (labels.minCoeff() != labels.maxCoeff()) {
      out.roc_curve = roc(labels, prob);
      out.auc = out.roc_curve.auc;
    }
  }

  if (!baseline_path.empty()) {
    const CsvTable base_table = read_csv(baseline_path);
    const Eigen::VectorXd base = required_column(base_table, "prob", baseline_path);
    if (base.size() != truth.size())
      throw DataError("baseline has " + std::to_string(base.size()) + " rows but truth has " +
                      std::to_string(truth.size()));
    out.pct_delta_ase = pct_delta_ase(ase(truth, base), out.ase);
  }
  return out;
}

void write_evaluation_csv(const std::string& path, const Evaluation& e) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "metric,value\n";
  out << "askld," << format_double(e.askld) << '\n';
  out << "ase," << format_double(e.ase) << '\n';
  if (!std::isnan(e.coverage)) {
    out << "coverage," << format_double(e.coverage) << '\n';
    out << "pct_delta_aecp," << format_double(e.pct_delta_aecp) << '\n';
  }
  if (!std::isnan(e.auc)) out << "auc," << format_double(e.auc) << '\n';
  if (!std::isnan(e.pct_delta_ase)) out << "pct_delta_ase," << format_double(e.pct_delta_ase) << '\n';
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.tpr.size(); ++i)
    out << format_double(curve.thresholds[i]) << ',' << format_double(curve.fpr[i]) << ','
        << format_double(curve.tpr[i]) << '\n';
}

}  // namespace mixprobit
