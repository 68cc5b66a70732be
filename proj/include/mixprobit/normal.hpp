#pragma once

#include <Eigen/Dense>

#include "mixprobit/rng.hpp"

namespace mixprobit {

double normal_cdf(double x);
// log Phi(x), accurate deep into the lower tail.
double log_normal_cdf(double x);
double normal_quantile(double p);
double normal_log_pdf(double x);

// Draw from N(mean, 1) restricted to (0, inf) when positive is true, or to
// (-inf, 0) otherwise. Uses inverse-CDF sampling near the body and an
// exponential-rejection tail sampler once the bound is more than five
// standard deviations from the mean.
double truncated_normal_sign(RngStream& rng, double mean, bool positive);

// Standard normal restricted to [lower, inf).
double truncated_standard_normal_lower(RngStream& rng, double lower);

// Multivariate t with fixed degrees of freedom, location and scale matrix.
// The scale is factorized once; a ridge is added when the factorization
// needs it.
class MultivariateT {
 public:
  MultivariateT() = default;
  MultivariateT(Eigen::VectorXd location, const Eigen::MatrixXd& scale,
                double dof = 5.0);

  Eigen::Index dimension() const { return location_.size(); }
  const Eigen::VectorXd& location() const { return location_; }
  double dof() const { return dof_; }

  Eigen::VectorXd sample(RngStream& rng) const;
  double log_density(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd location_;
  Eigen::MatrixXd lower_;  // Cholesky factor of the scale
  double dof_ = 5.0;
  double log_norm_ = 0.0;
};

}  // namespace mixprobit
