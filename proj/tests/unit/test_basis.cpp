#include <gtest/gtest.h>

#include <cmath>

#include "mixprobit/basis.hpp"
#include "mixprobit/error.hpp"
#include "mixprobit/simgen.hpp"

using namespace mixprobit;

namespace {

Dataset column_data(const Eigen::MatrixXd& x) {
  Eigen::VectorXi w(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) w[i] = static_cast<int>(i % 2);
  return Dataset(x, w);
}

double max_offdiag_relative(const Eigen::MatrixXd& g) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (i != j)
        worst = std::max(worst, std::abs(g(i, j)) / std::sqrt(g(i, i) * g(j, j)));
  return worst;
}

}  // namespace

TEST(Normalize, AffineEndpoints) {
  Eigen::MatrixXd x(3, 1);
  x << 2, 4, 6;
  const Eigen::MatrixXd u = normalize_covariates(column_data(x));
  EXPECT_DOUBLE_EQ(u(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(u(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(u(2, 0), 1.0);
}

TEST(Normalize, UnitColumnUnchanged) {
  Eigen::MatrixXd x(4, 1);
  x << 0, 0.3, 0.7, 1;
  const Eigen::MatrixXd u = normalize_covariates(column_data(x));
  EXPECT_LT((u - x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Normalize, TwoCovariatePoint) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 10, 1, 20;
  const Dataset d = column_data(x);
  const Eigen::VectorXd z = d.normalization().apply_point(Eigen::Vector2d(0.5, 15));
  EXPECT_DOUBLE_EQ(z[0], 0.5);
  EXPECT_DOUBLE_EQ(z[1], 0.5);
}

TEST(Normalize, ConstantColumnNamed) {
  Eigen::MatrixXd x(3, 2);
  x << 0, 5, 1, 5, 2, 5;
  Eigen::VectorXi w(3);
  w << 0, 1, 0;
  try {
    Dataset d(x, w, {"dose", "height"});
    FAIL() << "constant column accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("height"), std::string::npos);
  }
}

TEST(SelectKnots, SingleCellMean) {
  Eigen::MatrixXd u(2, 1);
  u << 0.01, 0.02;
  const Eigen::MatrixXd k = select_knots(u, 0.05);
  ASSERT_EQ(k.rows(), 1);
  EXPECT_NEAR(k(0, 0), 0.015, 1e-15);
}

TEST(SelectKnots, TwoCells) {
  Eigen::MatrixXd u(3, 1);
  u << 0.01, 0.02, 0.90;
  Eigen::MatrixXd k = select_knots(u, 0.05);
  ASSERT_EQ(k.rows(), 2);
  std::vector<double> v{k(0, 0), k(1, 0)};
  std::sort(v.begin(), v.end());
  EXPECT_NEAR(v[0], 0.015, 1e-15);
  EXPECT_NEAR(v[1], 0.90, 1e-15);
}

TEST(SelectKnots, OnePointPerCellKeepsEveryPoint) {
  Eigen::MatrixXd u(20, 1);
  for (int i = 0; i < 20; ++i) u(i, 0) = 0.025 + 0.05 * i;
  Eigen::MatrixXd k = select_knots(u, 0.05);
  ASSERT_EQ(k.rows(), 20);
  std::vector<double> v(k.data(), k.data() + 20);
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(v[static_cast<std::size_t>(i)], u(i, 0), 1e-15);
}

TEST(TpsExponent, Values) {
  EXPECT_EQ(tps_exponent(1), 1);
  EXPECT_EQ(tps_exponent(2), 2);
  EXPECT_EQ(tps_exponent(3), 1);
  for (int p = 1; p <= 12; ++p) EXPECT_EQ((tps_exponent(p) + p) % 2, 0) << p;
}

TEST(RbfMatrix, Entries) {
  Eigen::MatrixXd x(3, 1), k(1, 1);
  x << 0.5, 1.25, 0.25;
  k << 0.25;
  const Eigen::MatrixXd phi = rbf_matrix(x, k, 1);
  EXPECT_NEAR(phi(0, 0), 0.25 * std::log(0.25), 1e-15);
  EXPECT_NEAR(phi(0, 0), -0.3466, 1e-4);
  EXPECT_EQ(phi(1, 0), 0.0);  // unit distance
  EXPECT_EQ(phi(2, 0), 0.0);  // coincident
  const Eigen::MatrixXd phi2 = rbf_matrix(x, k, 2);
  EXPECT_EQ(phi2(1, 0), 0.0);
}

TEST(RbfMatrix, MatchesLoopOracle) {
  RngStream rng(3);
  Eigen::MatrixXd x(7, 2), k(4, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = rng.uniform();
  const Eigen::MatrixXd phi = rbf_matrix(x, k, 2);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j) {
      const double d = std::hypot(x(i, 0) - k(j, 0), x(i, 1) - k(j, 1));
      EXPECT_NEAR(phi(i, j), d * d * std::log(d), 1e-14);
    }
}

TEST(TruncateSvd, ExactLowRank) {
  RngStream rng(5);
  Eigen::MatrixXd a(30, 3), b(3, 12);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  const Eigen::MatrixXd phi = a * b;
  const BasisExpansion e = truncate_svd(phi, 25);
  EXPECT_EQ(e.rank(), 3);
  const Eigen::MatrixXd rebuilt = e.design * e.right_factor.transpose();
  EXPECT_LT((rebuilt - phi).norm() / phi.norm(), 1e-12);
  EXPECT_LT(e.energy_ratio, 1e-20);
}

TEST(TruncateSvd, CapsRankAndKeepsSingularValues) {
  RngStream rng(6);
  Eigen::MatrixXd phi(40, 30);
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = rng.normal();
  const BasisExpansion e = truncate_svd(phi, 10);
  EXPECT_EQ(e.rank(), 10);
  EXPECT_EQ(e.singular_values.size(), 30);
  for (Eigen::Index i = 1; i < e.singular_values.size(); ++i)
    EXPECT_LE(e.singular_values[i], e.singular_values[i - 1]);
  EXPECT_GT(e.energy_ratio, 0.0);
}

class SinBasis : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    RngStream rng(42);
    data_ = new Dataset(generate(Benchmark::kSin, 1000, rng));
    basis_ = new BasisExpansion(build_basis(*data_));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete basis_;
  }
  static Dataset* data_;
  static BasisExpansion* basis_;
};
Dataset* SinBasis::data_ = nullptr;
BasisExpansion* SinBasis::basis_ = nullptr;

TEST_F(SinBasis, ShapeAndEnergy) {
  EXPECT_EQ(basis_->knot_count(), 20);
  EXPECT_LE(basis_->rank(), 25);
  EXPECT_EQ(basis_->design.rows(), 1000);
  EXPECT_LT(basis_->energy_ratio, 1e-6);
}

TEST_F(SinBasis, DesignColumnsOrthogonal) {
  const Eigen::MatrixXd g = basis_->design.transpose() * basis_->design;
  EXPECT_LT(max_offdiag_relative(g), 1e-8);
  EXPECT_LT((g.diagonal() - basis_->gram_diagonal()).cwiseAbs().maxCoeff(),
            1e-8 * g.diagonal().maxCoeff());
}

TEST_F(SinBasis, TrainingRowIdentity) {
  for (Eigen::Index i : {0, 17, 500, 999}) {
    const Eigen::RowVectorXd row =
        basis_row(*basis_, data_->normalization(), data_->covariates().row(i).transpose());
    EXPECT_LT((row - basis_->design.row(i)).cwiseAbs().maxCoeff(), 1e-8) << i;
  }
}

TEST_F(SinBasis, RowAtKnotAndDeterminism) {
  const Eigen::VectorXd knot = basis_->knots.row(0).transpose();
  const Eigen::RowVectorXd phi = rbf_matrix(knot.transpose(), basis_->knots, 1);
  EXPECT_EQ(phi(0, 0), 0.0);
  const Eigen::RowVectorXd a = basis_->row_normalized(knot);
  EXPECT_LT((a - phi * basis_->right_factor).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.3141);
  EXPECT_EQ(basis_row(*basis_, data_->normalization(), x),
            basis_row(*basis_, data_->normalization(), x));
}

TEST(Basis, TwoDimensionalOrthogonality) {
  RngStream rng(8);
  const Dataset d = generate(Benchmark::kCylinder, 600, rng);
  const BasisExpansion e = build_basis(d);
  EXPECT_EQ(e.exponent, 2);
  EXPECT_EQ(e.rank(), 25);
  const Eigen::MatrixXd g = e.design.transpose() * e.design;
  EXPECT_LT(max_offdiag_relative(g), 1e-8);
  const Eigen::RowVectorXd row =
      basis_row(e, d.normalization(), d.covariates().row(123).transpose());
  EXPECT_LT((row - e.design.row(123)).cwiseAbs().maxCoeff(), 1e-8);
}
