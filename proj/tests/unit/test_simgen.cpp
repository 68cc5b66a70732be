#include <gtest/gtest.h>

#include <cmath>

#include "mixprobit/error.hpp"
#include "mixprobit/normal.hpp"
#include "mixprobit/simgen.hpp"

using namespace mixprobit;

namespace {

Eigen::VectorXd point(double a) { return Eigen::VectorXd::Constant(1, a); }

}  // namespace

TEST(TrueProbability, TableValues) {
  EXPECT_NEAR(true_probability(Benchmark::kSin, point(0.125)), normal_cdf(2.0), 1e-15);
  EXPECT_NEAR(true_probability(Benchmark::kSin, point(0.125)), 0.9772, 1e-4);
  EXPECT_NEAR(true_probability(Benchmark::kStep, point(0.5)), 0.850, 1e-3);
  EXPECT_NEAR(true_probability(Benchmark::kStep, point(0.1)), 0.150, 1e-3);
  EXPECT_NEAR(true_probability(Benchmark::kStep, point(0.9)), normal_cdf(-1.036 + 2.073 - 1.42712),
              1e-15);
  EXPECT_EQ(true_probability(Benchmark::kCylinder, Eigen::Vector2d(0.5, 0.5)), 0.8);
  EXPECT_EQ(true_probability(Benchmark::kCylinder, Eigen::Vector2d(0.5, 0.65)), 0.8);
  EXPECT_EQ(true_probability(Benchmark::kCylinder, Eigen::Vector2d(0.5, 0.67)), 0.2);
  EXPECT_THROW(true_probability(Benchmark::kCylinder, point(0.5)), UsageError);
}

TEST(TrueProbability, PeakVariants) {
  const double x = 0.3;
  const double literal = normal_cdf(5.0 / 6.0 * std::exp((x - 0.1) * (x - 0.1) / 0.18) +
                                    1.0 / 3.0 * std::exp((x - 0.6) * (x - 0.6) / 0.004) - 1.0);
  EXPECT_NEAR(true_probability(Benchmark::kPeak, point(x)), literal, 1e-15);
  BenchmarkOptions negated;
  negated.b_negated_exponents = true;
  EXPECT_NEAR(true_probability(Benchmark::kPeak, point(0.6), negated),
              normal_cdf(5.0 / 6.0 * std::exp(-0.25 / 0.18) + 1.0 / 3.0 - 1.0), 1e-15);
  for (double a = 0.0; a <= 1.0; a += 0.01) {
    const double p = true_probability(Benchmark::kPeak, point(a));
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Labels, Parse) {
  EXPECT_EQ(parse_benchmark("a"), Benchmark::kSin);
  EXPECT_EQ(parse_benchmark("peak"), Benchmark::kPeak);
  EXPECT_EQ(parse_benchmark("c"), Benchmark::kStep);
  EXPECT_EQ(parse_benchmark("cylinder"), Benchmark::kCylinder);
  EXPECT_EQ(benchmark_dimension(Benchmark::kCylinder), 2);
  EXPECT_THROW(parse_benchmark("e"), UsageError);
}

TEST(Generate, GridAbscissae) {
  RngStream rng(1);
  const Eigen::MatrixXd x = generate_covariates(Benchmark::kSin, 11, rng, CovariateDesign::kGrid);
  for (int i = 0; i <= 10; ++i) EXPECT_NEAR(x(i, 0), i / 10.0, 1e-15);
}

TEST(Generate, Deterministic) {
  RngStream a(5), b(5);
  const Dataset da = generate(Benchmark::kCylinder, 200, a);
  const Dataset db = generate(Benchmark::kCylinder, 200, b);
  EXPECT_EQ(da.covariates(), db.covariates());
  EXPECT_EQ(da.responses(), db.responses());
  EXPECT_TRUE(da.has_truth());
}

TEST(Generate, ResponseRateMatchesDomainAverage) {
  RngStream rng(2);
  const Dataset d = generate(Benchmark::kSin, 100000, rng);
  double avg = 0.0;
  const int grid = 100000;
  for (int k = 0; k < grid; ++k) avg += true_probability(Benchmark::kSin, point((k + 0.5) / grid));
  avg /= grid;
  EXPECT_NEAR(d.responses().cast<double>().mean(), avg, 0.01);
}

TEST(Generate, ConditionalFrequenciesByBin) {
  RngStream rng(3);
  const Dataset d = generate(Benchmark::kStep, 200000, rng);
  const int bins = 20;
  std::vector<double> hits(bins), expect(bins), count(bins);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const int b = std::min(bins - 1, static_cast<int>(d.covariates()(i, 0) * bins));
    hits[b] += d.responses()[i];
    expect[b] += d.true_probabilities()[i];
    count[b] += 1.0;
  }
  for (int b = 0; b < bins; ++b) {
    const double p = expect[b] / count[b];
    const double sd = std::sqrt(p * (1 - p) / count[b]);
    EXPECT_NEAR(hits[b] / count[b], p, 3.0 * sd) << b;
  }
}
