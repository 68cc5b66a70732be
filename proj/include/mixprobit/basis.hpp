#pragma once

#include <Eigen/Dense>

#include "mixprobit/dataset.hpp"

namespace mixprobit {

struct BasisOptions {
  double epsilon = 0.05;  // knot cell width in normalized units
  int max_rank = 25;      // cap on the retained SVD rank
};

// Low-rank partial thin-plate-spline design built from a dataset.
//
// The radial matrix Phi (n x m) is factorized as U * Lambda * V'; the design
// keeps the leading columns of U * Lambda, whose columns are orthogonal, and
// the matching columns of V so that new rows can be formed as phi_new * V.
struct BasisExpansion {
  Eigen::MatrixXd knots;            // m x p, normalized coordinates
  int exponent = 1;                 // radial power a
  Eigen::MatrixXd right_factor;     // m x l
  Eigen::VectorXd singular_values;  // all min(n, m), nonincreasing
  Eigen::MatrixXd design;           // n x l
  double epsilon = 0.05;
  double energy_ratio = 0.0;

  Eigen::Index rank() const { return design.cols(); }
  Eigen::Index knot_count() const { return knots.rows(); }
  // Diagonal of design' * design (the squared retained singular values).
  Eigen::VectorXd gram_diagonal() const { return design.colwise().squaredNorm().transpose(); }

  // Design row for a point already mapped to normalized coordinates.
  Eigen::RowVectorXd row_normalized(const Eigen::VectorXd& normalized_point) const;
};

Eigen::MatrixXd select_knots(const Eigen::MatrixXd& normalized, double epsilon);

constexpr int tps_exponent(int p) {
  // 2 * ceil(p/2 + 0.1) - p, in integer arithmetic: ceil(p/2 + 0.1) = p/2 + 1.
  return 2 * (p / 2 + 1) - p;
}

Eigen::MatrixXd rbf_matrix(const Eigen::MatrixXd& normalized, const Eigen::MatrixXd& knots,
                           int exponent);

// Truncates the SVD of phi. The retained rank is the smaller of max_rank and
// the numerical rank of phi.
BasisExpansion truncate_svd(const Eigen::MatrixXd& phi, int max_rank);

BasisExpansion build_basis(const Dataset& data, const BasisOptions& options = {});

// Design row for a raw-unit point using the stored normalization bounds.
Eigen::RowVectorXd basis_row(const BasisExpansion& expansion, const Normalization& bounds,
                             const Eigen::VectorXd& raw_point);

// An expansion with no spline columns: fits reduce to linear probit experts.
BasisExpansion empty_basis(Eigen::Index n, Eigen::Index p);

}  // namespace mixprobit
