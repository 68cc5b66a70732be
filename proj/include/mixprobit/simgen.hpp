#pragma once

#include <string>

#include <Eigen/Dense>

#include "mixprobit/dataset.hpp"
#include "mixprobit/rng.hpp"

namespace mixprobit {

enum class Benchmark { kSin, kPeak, kStep, kCylinder };
enum class CovariateDesign { kUniform, kGrid };

// Accepts "a".."d" or the long names (sin, peak, step, cylinder).
Benchmark parse_benchmark(const std::string& label);
std::string benchmark_label(Benchmark b);
int benchmark_dimension(Benchmark b);

struct BenchmarkOptions {
  // Use exp(-(x-c)^2/s) in the peak function instead of the printed
  // exp(+(x-c)^2/s).
  bool b_negated_exponents = false;
};

double true_probability(Benchmark b, const Eigen::VectorXd& x,
                        const BenchmarkOptions& options = {});

Eigen::MatrixXd generate_covariates(Benchmark b, Eigen::Index n, RngStream& rng,
                                    CovariateDesign design = CovariateDesign::kUniform);

// Draws w_i ~ Bernoulli(true_probability(x_i)) for fixed covariates.
Dataset simulate_responses(Benchmark b, const Eigen::MatrixXd& covariates, RngStream& rng,
                           const BenchmarkOptions& options = {});

Dataset generate(Benchmark b, Eigen::Index n, RngStream& rng,
                 CovariateDesign design = CovariateDesign::kUniform,
                 const BenchmarkOptions& options = {});

}  // namespace mixprobit
