#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "mixprobit/model.hpp"
#include "mixprobit/normal.hpp"
#include "mixprobit/rng.hpp"

using namespace mixprobit;

namespace {

// Random spline columns made orthogonal, as every basis design is.
Eigen::MatrixXd orthogonal_columns(RngStream& rng, Eigen::Index n, Eigen::Index l) {
  Eigen::MatrixXd raw(n, l);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, l);
  return q * Eigen::VectorXd::LinSpaced(l, 1.0, 3.0).asDiagonal();
}

MixtureParams random_params(RngStream& rng, int r, Eigen::Index p, Eigen::Index l) {
  MixtureParams m = zero_params(r, p, l);
  double tau = 50.0;
  for (auto& c : m.components) {
    for (Eigen::Index k = 0; k < c.alpha.size(); ++k) c.alpha[k] = rng.normal();
    for (Eigen::Index k = 0; k < c.beta.size(); ++k) c.beta[k] = 0.3 * rng.normal();
    c.tau = tau;
    tau *= 0.5;
  }
  for (Eigen::Index k = 0; k < m.delta.size(); ++k) m.delta.data()[k] = rng.normal();
  return m;
}

DesignCache random_cache(RngStream& rng, Eigen::Index n, Eigen::Index p, Eigen::Index l) {
  Eigen::MatrixXd z(n, p + 1), x(n, l);
  Eigen::VectorXi w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z(i, 0) = 1.0;
    for (Eigen::Index k = 1; k <= p; ++k) z(i, k) = rng.uniform();
    w[i] = rng.bernoulli(0.5);
  }
  x = orthogonal_columns(rng, n, l);
  return DesignCache(z, x, w);
}

}  // namespace

TEST(Gating, SingleComponent) {
  const Eigen::VectorXd pi = gating_weights(Eigen::MatrixXd(0, 2), Eigen::Vector2d(1, 0.4));
  ASSERT_EQ(pi.size(), 1);
  EXPECT_DOUBLE_EQ(pi[0], 1.0);
}

TEST(Gating, ZeroRowsUniform) {
  const Eigen::VectorXd pi = gating_weights(Eigen::MatrixXd::Zero(3, 2), Eigen::Vector2d(1, 0.4));
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(pi[j], 0.25, 1e-15);
}

TEST(Gating, LogThree) {
  Eigen::MatrixXd delta(1, 2);
  delta << std::log(3.0), 0.0;
  const Eigen::VectorXd pi = gating_weights(delta, Eigen::Vector2d(1, 0.7));
  EXPECT_NEAR(pi[0], 0.25, 1e-15);
  EXPECT_NEAR(pi[1], 0.75, 1e-15);
}

TEST(Gating, SimplexUnderExtremeScores) {
  Eigen::MatrixXd delta(2, 2);
  delta << 800, 0, -900, 0;
  const Eigen::VectorXd pi = gating_weights(delta, Eigen::Vector2d(1, 0));
  EXPECT_TRUE(pi.allFinite());
  EXPECT_NEAR(pi.sum(), 1.0, 1e-15);
  EXPECT_NEAR(pi[1], 1.0, 1e-15);
}

TEST(ComponentSurface, Cases) {
  ComponentParams c{Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(3), 1.0};
  const Eigen::RowVectorXd row = Eigen::RowVector3d(0.2, -1, 4);
  EXPECT_EQ(component_surface(c, Eigen::Vector2d(1, 0.3), row), 0.0);
  c.alpha << 0.5, 1.0;
  EXPECT_NEAR(component_surface(c, Eigen::Vector2d(1, 0.3), row), 0.8, 1e-15);
}

TEST(ComponentSurface, DotProductOracle) {
  RngStream rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    ComponentParams c{Eigen::VectorXd(3), Eigen::VectorXd(6), 1.0};
    Eigen::VectorXd z(3);
    Eigen::RowVectorXd row(6);
    for (int k = 0; k < 3; ++k) c.alpha[k] = rng.normal(), z[k] = rng.normal();
    for (int k = 0; k < 6; ++k) c.beta[k] = rng.normal(), row[k] = rng.normal();
    double oracle = 0.0;
    for (int k = 0; k < 3; ++k) oracle += c.alpha[k] * z[k];
    for (int k = 0; k < 6; ++k) oracle += c.beta[k] * row[k];
    EXPECT_NEAR(component_surface(c, z, row), oracle, 1e-12);
  }
}

TEST(MixtureProbability, Cases) {
  const Eigen::Vector2d z(1, 0.5);
  const Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2);
  MixtureParams one = zero_params(1, 1, 2);
  EXPECT_DOUBLE_EQ(mixture_probability(one, z, row), 0.5);

  MixtureParams two = zero_params(2, 1, 2);
  for (double c : {0.1, 1.3, 7.0}) {
    two.components[0].alpha << c / z[0] - 0.0, 0.0;
    two.components[1].alpha << -c, 0.0;
    EXPECT_NEAR(mixture_probability(two, z, row), 0.5, 1e-15);
  }
  two.components[0].alpha.setZero();
  two.components[1].alpha.setZero();
  two.delta << std::log(3.0), 0.0;
  EXPECT_NEAR(mixture_probability(two, z, row), 0.5, 1e-15);
}

TEST(ObservedLoglik, SingleRow) {
  Eigen::MatrixXd z(1, 2), x(1, 1);
  z << 1, 0.2;
  x << 0.4;
  Eigen::VectorXi w(1);
  w << 1;
  const DesignCache cache(z, x, w);
  EXPECT_NEAR(observed_loglik(zero_params(1, 1, 1), cache), std::log(0.5), 1e-15);
}

TEST(ObservedLoglik, Additive) {
  RngStream rng(1);
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 2), x = orthogonal_columns(rng, 3, 2);
  Eigen::VectorXi w(3);
  w << 1, 0, 1;
  const DesignCache cache(z, x, w);
  EXPECT_NEAR(observed_loglik(zero_params(2, 1, 2), cache), 3 * std::log(0.5), 1e-14);
}

TEST(ObservedLoglik, LoopOracle) {
  RngStream rng(12);
  const DesignCache cache = random_cache(rng, 40, 2, 4);
  const MixtureParams m = random_params(rng, 3, 2, 4);
  double oracle = 0.0;
  for (Eigen::Index i = 0; i < 40; ++i) {
    const Eigen::VectorXd zi = cache.z.row(i).transpose();
    const Eigen::VectorXd pi = gating_weights(m.delta, zi);
    double h = 0.0;
    for (int j = 0; j < 3; ++j) {
      const auto& c = m.components[static_cast<std::size_t>(j)];
      const double g = c.alpha.dot(zi) + cache.x.row(i).dot(c.beta);
      h += pi[j] * normal_cdf(g);
    }
    oracle += cache.w[i] ? std::log(h) : std::log(1.0 - h);
  }
  EXPECT_NEAR(observed_loglik(m, cache), oracle, 1e-10);
}

TEST(LogPrior, OrderingViolated) {
  MixtureParams m = zero_params(2, 1, 3);
  PriorConfig prior = PriorConfig{}.resolved(10);
  m.components[0].tau = 1.0;
  m.components[1].tau = 2.0;
  EXPECT_EQ(log_prior(m, prior), -std::numeric_limits<double>::infinity());
  m.components[0].tau = 2e3;  // beyond c_tau
  m.components[1].tau = 1.0;
  EXPECT_EQ(log_prior(m, prior), -std::numeric_limits<double>::infinity());
}

TEST(LogPrior, ClosedFormSingleComponent) {
  PriorConfig cfg;
  cfg.c_tau = 10.0;
  const PriorConfig prior = cfg.resolved(10);
  const MixtureParams m = zero_params(1, 1, 4, 1.0);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const double oracle = -0.5 * 2 * (log2pi + std::log(prior.c_alpha)) - 0.5 * 4 * log2pi +
                        std::log(1.0 / 10.0);
  EXPECT_NEAR(log_prior(m, prior), oracle, 1e-12);
}

TEST(LogPrior, TauDensityIntegratesToOne) {
  const double c = 3.0;
  const int outer = 4000;
  double one = 0.0, two = 0.0;
  for (int a = 0; a < outer; ++a) {
    const double t1 = (a + 0.5) * c / outer;
    one += std::exp(log_tau_prior({t1}, c)) * c / outer;
    // Inner density is constant in tau_2 on (0, t1).
    const int inner = 16;
    double s = 0.0;
    for (int b = 0; b < inner; ++b) {
      const double t2 = (b + 0.5) * t1 / inner;
      s += std::exp(log_tau_prior({t1, t2}, c)) * t1 / inner;
    }
    two += s * c / outer;
  }
  EXPECT_NEAR(one, 1.0, 1e-3);
  EXPECT_NEAR(two, 1.0, 1e-3);
}

TEST(ModelPrior, UniformByDefault) {
  const PriorConfig prior = PriorConfig{}.resolved(100);
  EXPECT_DOUBLE_EQ(prior.c_delta, 100.0);
  for (int r = 1; r <= 3; ++r) EXPECT_NEAR(prior.log_model_prior(r), std::log(1.0 / 3.0), 1e-15);
}

TEST(Permutation, SurfaceUnchanged) {
  RngStream rng(13);
  const DesignCache cache = random_cache(rng, 25, 1, 3);
  const MixtureParams m = random_params(rng, 3, 1, 3);
  const Eigen::VectorXd h = mixture_probabilities(m, cache.z, cache.x);
  for (const std::vector<int>& order : {std::vector<int>{2, 0, 1}, std::vector<int>{1, 2, 0}}) {
    const MixtureParams q = permute_components(m, order);
    EXPECT_LT((mixture_probabilities(q, cache.z, cache.x) - h).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 0; j < 3; ++j)
      EXPECT_EQ(q.components[static_cast<std::size_t>(j)].tau,
                m.components[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])].tau);
  }
}
