#include "mixprobit/simgen.hpp"

#include <cmath>
#include <numbers>

#include "mixprobit/error.hpp"
#include "mixprobit/normal.hpp"

namespace mixprobit {

Benchmark parse_benchmark(const std::string& label) {
  if (label == "a" || label == "sin" || label == "a_sin") return Benchmark::kSin;
  if (label == "b" || label == "peak" || label == "b_peak") return Benchmark::kPeak;
  if (label == "c" || label == "step" || label == "c_step") return Benchmark::kStep;
  if (label == "d" || label == "cylinder" || label == "d_cylinder") return Benchmark::kCylinder;
  throw UsageError("unknown benchmark function '" + label + "' (expected a, b, c or d)");
}

std::string benchmark_label(Benchmark b) {
  switch (b) {
    case Benchmark::kSin: return "a";
    case Benchmark::kPeak: return "b";
    case Benchmark::kStep: return "c";
    case Benchmark::kCylinder: return "d";
  }
  return "?";
}

int benchmark_dimension(Benchmark b) { return b == Benchmark::kCylinder ? 2 : 1; }

double true_probability(Benchmark b, const Eigen::VectorXd& x, const BenchmarkOptions& options) {
  if (x.size() != benchmark_dimension(b))
    throw UsageError("benchmark " + benchmark_label(b) + " takes " +
                     std::to_string(benchmark_dimension(b)) + " covariates");
  const double x1 = x[0];
  switch (b) {
    case Benchmark::kSin:
      return normal_cdf(2.0 * std::sin(4.0 * std::numbers::pi * x1));
    case Benchmark::kPeak: {
      const double sign = options.b_negated_exponents ? -1.0 : 1.0;
      const double a = (x1 - 0.1) * (x1 - 0.1) / 0.18;
      const double c = (x1 - 0.6) * (x1 - 0.6) / 0.004;
      return normal_cdf(5.0 / 6.0 * std::exp(sign * a) + 1.0 / 3.0 * std::exp(sign * c) - 1.0);
    }
    case Benchmark::kStep:
      return normal_cdf(-1.036 + 2.073 * (x1 > 0.25 ? 1.0 : 0.0) -
                        1.42712 * (x1 > 0.75 ? 1.0 : 0.0));
    case Benchmark::kCylinder: {
      const double d = (x1 - 0.5) * (x1 - 0.5) + (x[1] - 0.5) * (x[1] - 0.5) - 0.16 * 0.16;
      return d < 0.0 ? 0.8 : 0.2;
    }
  }
  throw UsageError("unknown benchmark");
}

Eigen::MatrixXd generate_covariates(Benchmark b, Eigen::Index n, RngStream& rng,
                                    CovariateDesign design) {
  if (n < 1) throw UsageError("sample size must be positive");
  const int p = benchmark_dimension(b);
  Eigen::MatrixXd x(n, p);
  if (design == CovariateDesign::kUniform) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < p; ++k) x(i, k) = rng.uniform();
    return x;
  }
  if (p == 1) {
    for (Eigen::Index i = 0; i < n; ++i)
      x(i, 0) = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
  }
  // Row-major lattice of side ceil(sqrt(n)), truncated to n points.
  const auto side = static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = side > 1 ? static_cast<double>(side - 1) : 1.0;
    x(i, 0) = static_cast<double>(i % side) / denom;
    x(i, 1) = static_cast<double>(i / side) / denom;
  }
  return x;
}

Dataset simulate_responses(Benchmark b, const Eigen::MatrixXd& covariates, RngStream& rng,
                           const BenchmarkOptions& options) {
  const Eigen::Index n = covariates.rows();
  Eigen::VectorXd truth(n);
  Eigen::VectorXi w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    truth[i] = true_probability(b, covariates.row(i).transpose(), options);
    w[i] = rng.bernoulli(truth[i]) ? 1 : 0;
  }
  Dataset data(covariates, std::move(w));
  data.set_true_probabilities(std::move(truth));
  return data;
}

Dataset generate(Benchmark b, Eigen::Index n, RngStream& rng, CovariateDesign design,
                 const BenchmarkOptions& options) {
  const Eigen::MatrixXd x = generate_covariates(b, n, rng, design);
  return simulate_responses(b, x, rng, options);
}

}  // namespace mixprobit
