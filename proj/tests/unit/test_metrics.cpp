#include <gtest/gtest.h>

#include <cmath>

#include "mixprobit/error.hpp"
#include "mixprobit/metrics.hpp"
#include "mixprobit/rng.hpp"

using namespace mixprobit;

namespace {

// Mann-Whitney U / (n1 n0), ties counted as one half.
double mann_whitney(const Eigen::VectorXi& y, const Eigen::VectorXd& s) {
  double u = 0.0, pairs = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    for (Eigen::Index j = 0; j < y.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        u += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return u / pairs;
}

}  // namespace

TEST(Askld, IdentityAndHandValue) {
  const Eigen::Vector3d h(0.1, 0.5, 0.93);
  EXPECT_EQ(askld(h, h), 0.0);
  Eigen::VectorXd a(1), b(1);
  a << 0.5;
  b << 0.9;
  const double i_ab = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  const double i_ba = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
  EXPECT_NEAR(askld(a, b), i_ab + i_ba, 1e-15);
  EXPECT_NEAR(askld(a, b), 0.4 * std::log(0.9 / 0.5) - 0.4 * std::log(0.1 / 0.5), 1e-15);
  EXPECT_NEAR(askld(a, b), 0.87888, 1e-5);
}

TEST(Askld, SymmetricNonnegative) {
  RngStream rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd a(20), b(20);
    for (int i = 0; i < 20; ++i) a[i] = rng.uniform(), b[i] = rng.uniform();
    if (rep == 0) a[3] = 0.0, b[4] = 1.0;
    const double ab = askld(a, b), ba = askld(b, a);
    EXPECT_GE(ab, -1e-12);
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_TRUE(std::isfinite(ab));
  }
  EXPECT_THROW(askld(Eigen::VectorXd(2), Eigen::VectorXd(3)), DataError);
}

TEST(Ase, Values) {
  const Eigen::Vector3d a(0.1, 0.2, 0.3), b(0.2, 0.2, 0.1);
  EXPECT_EQ(ase(a, a), 0.0);
  EXPECT_NEAR(ase(a, b), (0.01 + 0.04) / 3, 1e-15);
  EXPECT_DOUBLE_EQ(pct_delta_ase(2.0, 1.0), 100.0);
  EXPECT_THROW(pct_delta_ase(1.0, 0.0), DataError);
}

TEST(Coverage, Cases) {
  Eigen::MatrixXi all = Eigen::MatrixXi::Ones(5, 4);
  EXPECT_NEAR(pct_delta_aecp(all, 0.9), 100.0 * 0.1 / 0.9, 1e-12);
  EXPECT_NEAR(pct_delta_aecp(all, 0.9), 11.11, 1e-2);

  Eigen::MatrixXi nominal = Eigen::MatrixXi::Ones(10, 3);
  for (int c = 0; c < 3; ++c) nominal(c, c) = 0;
  EXPECT_NEAR(pct_delta_aecp(nominal, 0.9), 0.0, 1e-12);

  // Three replications, two points: point 1 covered twice, point 2 once.
  Eigen::MatrixXi hits(3, 2);
  hits << 1, 0, 1, 1, 0, 0;
  const Eigen::VectorXd e = ecp(hits);
  EXPECT_NEAR(e[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(e[1], 1.0 / 3, 1e-15);
  EXPECT_NEAR(pct_delta_aecp(hits, 0.9), 100.0 * (0.5 - 0.9) / 0.9, 1e-12);

  const Eigen::Vector3d truth(0.2, 0.5, 0.8), lo(0.1, 0.6, 0.8), hi(0.3, 0.7, 0.9);
  EXPECT_EQ(ecp_hits(truth, lo, hi), Eigen::Vector3i(1, 0, 1));
}

TEST(Roc, KnownCases) {
  Eigen::VectorXi y(4);
  y << 1, 0, 1, 0;
  Eigen::VectorXd s(4);
  s << 0.9, 0.8, 0.7, 0.1;
  EXPECT_NEAR(roc(y, s).auc, 0.75, 1e-15);
  s << 0.9, 0.1, 0.8, 0.2;
  EXPECT_NEAR(roc(y, s).auc, 1.0, 1e-15);
  s.setConstant(0.4);
  const RocCurve flat = roc(y, s);
  EXPECT_NEAR(flat.auc, 0.5, 1e-15);
  EXPECT_EQ(flat.fpr.front(), 0.0);
  EXPECT_EQ(flat.tpr.back(), 1.0);
  EXPECT_THROW(roc(Eigen::VectorXi::Ones(4), s), DataError);
}

TEST(Roc, MatchesMannWhitney) {
  RngStream rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    Eigen::VectorXi y(60);
    Eigen::VectorXd s(60);
    for (int i = 0; i < 60; ++i) {
      y[i] = i < 2 ? i : rng.bernoulli(0.4);
      s[i] = std::round(rng.uniform() * 20) / 20 + 0.1 * y[i];  // with ties
    }
    EXPECT_DOUBLE_EQ(roc(y, s).auc, mann_whitney(y, s));
  }
}
