#include "mixprobit/inference.hpp"

#include <algorithm>
#include <cmath>

#include "mixprobit/error.hpp"

namespace mixprobit {

double sorted_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Prediction summarize_surfaces(const Eigen::MatrixXd& surfaces, double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("interval level must lie in (0, 1)");
  if (surfaces.rows() == 0) throw UsageError("no posterior draws to summarize");
  const double tail = 0.5 * (1.0 - level);
  const Eigen::Index m = surfaces.cols();
  Prediction out{surfaces.colwise().mean().transpose(), Eigen::VectorXd(m), Eigen::VectorXd(m)};
  std::vector<double> column(static_cast<std::size_t>(surfaces.rows()));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index t = 0; t < surfaces.rows(); ++t)
      column[static_cast<std::size_t>(t)] = surfaces(t, i);
    std::sort(column.begin(), column.end());
    out.low[i] = sorted_quantile(column, tail);
    out.high[i] = sorted_quantile(column, 1.0 - tail);
    // The mean can sit outside the band by rounding when the band collapses.
    out.low[i] = std::min(out.low[i], out.mean[i]);
    out.high[i] = std::max(out.high[i], out.mean[i]);
  }
  return out;
}

FitResult summarize(const ChainTrace& trace, const Dataset& data,
                    const BasisExpansion& expansion, int max_components, double level) {
  if (trace.draws.empty()) throw UsageError("cannot summarize an empty trace");
  const Eigen::MatrixXd z = data.linear_design();
  const Eigen::Index n = data.size();
  Eigen::MatrixXd surfaces(static_cast<Eigen::Index>(trace.draws.size()), n);
  for (std::size_t t = 0; t < trace.draws.size(); ++t)
    surfaces.row(static_cast<Eigen::Index>(t)) =
        mixture_probabilities(trace.draws[t].params, z, expansion.design).transpose();

  FitResult result;
  const Prediction p = summarize_surfaces(surfaces, level);
  result.fitted_probs = p.mean;
  result.interval_low = p.low;
  result.interval_high = p.high;
  result.level = level;
  result.draw_count = static_cast<long>(trace.draws.size());
  result.model_probs = trace.model_frequencies(max_components);
  result.archive.bounds = data.normalization();
  result.archive.basis = expansion;
  result.archive.basis.design.resize(0, expansion.rank());
  result.archive.max_components = max_components;
  for (const auto& d : trace.draws) result.archive.draws.push_back(d.params);
  return result;
}

Eigen::MatrixXd draw_surfaces(const ModelArchive& archive, const Eigen::MatrixXd& points) {
  if (points.cols() != archive.bounds.dimension())
    throw DataError("points have " + std::to_string(points.cols()) +
                    " covariates; the model was fitted with " +
                    std::to_string(archive.bounds.dimension()));
  const Eigen::Index m = points.rows();
  const Eigen::MatrixXd normalized = archive.bounds.apply(points);
  Eigen::MatrixXd z(m, normalized.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(normalized.cols()) = normalized;
  Eigen::MatrixXd x(m, archive.basis.rank());
  for (Eigen::Index i = 0; i < m; ++i)
    x.row(i) = archive.basis.row_normalized(normalized.row(i).transpose());
  Eigen::MatrixXd surfaces(static_cast<Eigen::Index>(archive.draws.size()), m);
  for (std::size_t t = 0; t < archive.draws.size(); ++t)
    surfaces.row(static_cast<Eigen::Index>(t)) =
        mixture_probabilities(archive.draws[t], z, x).transpose();
  return surfaces;
}

Prediction predict(const FitResult& result, const Eigen::MatrixXd& points) {
  if (result.archive.draws.empty()) throw UsageError("model archive holds no draws");
  return summarize_surfaces(draw_surfaces(result.archive, points), result.level);
}

}  // namespace mixprobit
