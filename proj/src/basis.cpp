#include "mixprobit/basis.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "mixprobit/error.hpp"

namespace mixprobit {

namespace {

double radial(double dist, int exponent) {
  if (dist == 0.0) return 0.0;
  return std::pow(dist, exponent) * std::log(dist);
}

}  // namespace

Eigen::MatrixXd select_knots(const Eigen::MatrixXd& normalized, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw UsageError("knot cell width must lie in (0, 1]");
  const Eigen::Index n = normalized.rows();
  const Eigen::Index p = normalized.cols();
  const auto cells_per_axis = static_cast<long>(std::ceil(1.0 / epsilon - 1e-12));

  // Cells are half-open [k eps, (k+1) eps); the last cell is closed at 1.
  std::map<std::vector<long>, std::pair<Eigen::VectorXd, long>> cells;
  std::vector<long> key(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) {
      long c = static_cast<long>(std::floor(normalized(i, k) / epsilon));
      if (c >= cells_per_axis) c = cells_per_axis - 1;
      if (c < 0) c = 0;
      key[static_cast<std::size_t>(k)] = c;
    }
    auto [it, inserted] = cells.try_emplace(key, Eigen::VectorXd::Zero(p), 0L);
    it->second.first += normalized.row(i).transpose();
    it->second.second += 1;
  }

  Eigen::MatrixXd knots(static_cast<Eigen::Index>(cells.size()), p);
  Eigen::Index j = 0;
  for (const auto& [cell, acc] : cells) {
    knots.row(j++) = (acc.first / static_cast<double>(acc.second)).transpose();
  }
  return knots;
}

Eigen::MatrixXd rbf_matrix(const Eigen::MatrixXd& normalized, const Eigen::MatrixXd& knots,
                           int exponent) {
  if (normalized.cols() != knots.cols())
    throw UsageError("points and knots differ in dimension");
  Eigen::MatrixXd phi(normalized.rows(), knots.rows());
  for (Eigen::Index j = 0; j < knots.rows(); ++j)
    for (Eigen::Index i = 0; i < normalized.rows(); ++i)
      phi(i, j) = radial((normalized.row(i) - knots.row(j)).norm(), exponent);
  return phi;
}

BasisExpansion truncate_svd(const Eigen::MatrixXd& phi, int max_rank) {
  if (max_rank < 1) throw UsageError("basis rank cap must be at least 1");
  if (!phi.allFinite()) throw NumericalError("radial basis matrix has non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "SVD of the " << phi.rows() << "x" << phi.cols()
        << " radial basis matrix failed to converge (Frobenius norm " << phi.norm() << ")";
    throw NumericalError(msg.str());
  }

  BasisExpansion out;
  out.singular_values = svd.singularValues();
  const Eigen::VectorXd& s = out.singular_values;
  const double tol = s.size() ? s[0] * static_cast<double>(std::max(phi.rows(), phi.cols())) *
                                    std::numeric_limits<double>::epsilon()
                              : 0.0;
  Eigen::Index numerical_rank = 0;
  while (numerical_rank < s.size() && s[numerical_rank] > tol) ++numerical_rank;
  const Eigen::Index l = std::min<Eigen::Index>(max_rank, numerical_rank);

  out.design = svd.matrixU().leftCols(l) * s.head(l).asDiagonal();
  out.right_factor = svd.matrixV().leftCols(l);
  const double total = s.squaredNorm();
  out.energy_ratio = total > 0.0 ? std::max(0.0, 1.0 - s.head(l).squaredNorm() / total) : 0.0;
  return out;
}

BasisExpansion build_basis(const Dataset& data, const BasisOptions& options) {
  const Eigen::MatrixXd normalized = data.normalized();
  const Eigen::MatrixXd knots = select_knots(normalized, options.epsilon);
  const int a = tps_exponent(static_cast<int>(data.dimension()));
  BasisExpansion out = truncate_svd(rbf_matrix(normalized, knots, a), options.max_rank);
  out.knots = knots;
  out.exponent = a;
  out.epsilon = options.epsilon;
  std::ostringstream msg;
  msg << "basis: " << knots.rows() << " knots, rank " << out.rank()
      << ", discarded energy " << out.energy_ratio;
  log_info(msg.str());
  return out;
}

Eigen::RowVectorXd BasisExpansion::row_normalized(const Eigen::VectorXd& point) const {
  if (point.size() != knots.cols())
    throw DataError("point dimension does not match the basis");
  Eigen::RowVectorXd phi(knots.rows());
  for (Eigen::Index j = 0; j < knots.rows(); ++j)
    phi[j] = radial((point.transpose() - knots.row(j)).norm(), exponent);
  return phi * right_factor;
}

Eigen::RowVectorXd basis_row(const BasisExpansion& expansion, const Normalization& bounds,
                             const Eigen::VectorXd& raw_point) {
  return expansion.row_normalized(bounds.apply_point(raw_point));
}

BasisExpansion empty_basis(Eigen::Index n, Eigen::Index p) {
  BasisExpansion out;
  out.knots.resize(0, p);
  out.right_factor.resize(0, 0);
  out.design.resize(n, 0);
  return out;
}

}  // namespace mixprobit
