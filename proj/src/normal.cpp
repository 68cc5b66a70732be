#include "mixprobit/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mixprobit/error.hpp"

namespace mixprobit {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x > -20.0) return std::log(normal_cdf(x));
  // Asymptotic series for the Mills ratio.
  const double z2 = 1.0 / (x * x);
  const double series =
      1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(series);
}

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  // Acklam's rational approximation followed by one Halley refinement step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Refine against whichever tail keeps full relative precision.
  for (int iter = 0; iter < 2; ++iter) {
    double e;
    if (x < 0.0) {
      e = normal_cdf(x) - p;
    } else {
      e = (1.0 - p) - normal_cdf(-x);
    }
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double truncated_standard_normal_lower(RngStream& rng, double lower) {
  if (lower > 5.0) {
    // Robert (1995) exponential proposal with the optimal rate.
    const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
    for (;;) {
      const double z = lower - std::log(rng.uniform()) / rate;
      const double diff = z - rate;
      if (std::log(rng.uniform()) <= -0.5 * diff * diff) return z;
    }
  }
  if (lower < -5.0) {
    // The truncation removes less than 3e-7 of the mass.
    for (;;) {
      const double z = rng.normal();
      if (z >= lower) return z;
    }
  }
  // Inverse CDF on the upper tail mass, which keeps precision for lower > 0.
  const double tail = normal_cdf(-lower);
  const double z = -normal_quantile(rng.uniform() * tail);
  return z < lower ? lower : z;
}

double truncated_normal_sign(RngStream& rng, double mean, bool positive) {
  // v = mean + e with v > 0  <=>  e > -mean.
  if (positive) {
    double v = mean + truncated_standard_normal_lower(rng, -mean);
    return v > 0.0 ? v : std::numeric_limits<double>::min();
  }
  double v = mean - truncated_standard_normal_lower(rng, mean);
  return v < 0.0 ? v : -std::numeric_limits<double>::min();
}

MultivariateT::MultivariateT(Eigen::VectorXd location, const Eigen::MatrixXd& scale,
                             double dof)
    : location_(std::move(location)), dof_(dof) {
  const Eigen::Index k = location_.size();
  if (scale.rows() != k || scale.cols() != k)
    throw UsageError("multivariate t scale has wrong shape");
  Eigen::MatrixXd sym = 0.5 * (scale + scale.transpose());
  double ridge = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0; attempt < 20; ++attempt) {
    llt.compute(sym + ridge * Eigen::MatrixXd::Identity(k, k));
    if (llt.info() == Eigen::Success) break;
    ridge = ridge == 0.0 ? 1e-10 * std::max(1.0, sym.diagonal().cwiseAbs().maxCoeff())
                         : ridge * 10.0;
  }
  if (llt.info() != Eigen::Success)
    throw NumericalError("multivariate t scale matrix is not positive definite");
  lower_ = llt.matrixL();
  const double log_det = 2.0 * lower_.diagonal().array().log().sum();
  const double kd = static_cast<double>(k);
  log_norm_ = std::lgamma(0.5 * (dof_ + kd)) - std::lgamma(0.5 * dof_) -
              0.5 * kd * std::log(dof_ * std::numbers::pi) - 0.5 * log_det;
}

Eigen::VectorXd MultivariateT::sample(RngStream& rng) const {
  const Eigen::Index k = location_.size();
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z[i] = rng.normal();
  const double w = std::sqrt(dof_ / rng.chi_square(dof_));
  return location_ + w * (lower_ * z);
}

double MultivariateT::log_density(const Eigen::VectorXd& x) const {
  const Eigen::Index k = location_.size();
  if (k == 0) return 0.0;
  const Eigen::VectorXd y =
      lower_.triangularView<Eigen::Lower>().solve(x - location_);
  const double q = y.squaredNorm();
  return log_norm_ - 0.5 * (dof_ + static_cast<double>(k)) * std::log1p(q / dof_);
}

}  // namespace mixprobit
