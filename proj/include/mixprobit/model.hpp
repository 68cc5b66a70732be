#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixprobit/basis.hpp"
#include "mixprobit/dataset.hpp"

namespace mixprobit {

struct PriorConfig {
  double c_alpha = 1e4;  // prior variance of the linear coefficients
  double c_tau = 1e3;    // upper bound of the smoothing parameters
  double c_delta = 0.0;  // prior variance of gating coefficients; <= 0 means n
  int max_components = 3;
  std::vector<double> model_prior;  // empty means uniform over 1..max_components

  // Fills defaults that depend on the data size and validates.
  PriorConfig resolved(Eigen::Index n) const;
  double log_model_prior(int r) const;
};

struct ComponentParams {
  Eigen::VectorXd alpha;  // p + 1
  Eigen::VectorXd beta;   // l
  double tau = 1.0;
};

// Parameters of an r-component mixture. delta holds the gating rows of
// components 2..r; the first component's row is fixed at zero.
struct MixtureParams {
  std::vector<ComponentParams> components;
  Eigen::MatrixXd delta;

  int r() const { return static_cast<int>(components.size()); }
  bool tau_ordered(double c_tau) const;
};

MixtureParams zero_params(int r, Eigen::Index p, Eigen::Index l, double tau = 1.0);

// New component j is old component order[j]. Gating coefficients are
// re-expressed against the new first component, so the surface is unchanged.
MixtureParams permute_components(const MixtureParams& params, const std::vector<int>& order);
// Component indices sorted by decreasing tau.
std::vector<int> tau_order(const MixtureParams& params);

// Per-dataset matrices shared by every evaluation and conditional draw.
struct DesignCache {
  Eigen::MatrixXd z;      // n x (p+1)
  Eigen::MatrixXd x;      // n x l
  Eigen::VectorXi w;
  Eigen::VectorXd gram;   // diagonal of x'x
  Eigen::MatrixXd ztz;    // (p+1) x (p+1)
  Eigen::MatrixXd ztx;    // (p+1) x l

  DesignCache() = default;
  DesignCache(const Dataset& data, const BasisExpansion& expansion);
  DesignCache(Eigen::MatrixXd z, Eigen::MatrixXd x, Eigen::VectorXi w);

  Eigen::Index n() const { return z.rows(); }
  Eigen::Index linear_dim() const { return z.cols(); }
  Eigen::Index spline_dim() const { return x.cols(); }
};

Eigen::VectorXd gating_weights(const Eigen::MatrixXd& delta, const Eigen::VectorXd& z);
double component_surface(const ComponentParams& comp, const Eigen::VectorXd& z,
                         const Eigen::RowVectorXd& basis_row);
double mixture_probability(const MixtureParams& params, const Eigen::VectorXd& z,
                           const Eigen::RowVectorXd& basis_row);

// n x r matrices over a whole design.
Eigen::MatrixXd component_scores(const MixtureParams& params, const Eigen::MatrixXd& z,
                                 const Eigen::MatrixXd& x);
Eigen::MatrixXd gating_matrix(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& z);
Eigen::VectorXd mixture_probabilities(const MixtureParams& params, const Eigen::MatrixXd& z,
                                      const Eigen::MatrixXd& x);

double observed_loglik(const MixtureParams& params, const DesignCache& cache);
double observed_loglik(const MixtureParams& params, const Dataset& data,
                       const BasisExpansion& expansion);

// log density of the ordered smoothing parameters: tau_1 ~ U(0, c_tau),
// tau_j ~ U(0, tau_{j-1}). -inf outside the support.
double log_tau_prior(const std::vector<double>& taus, double c_tau);
double log_prior(const MixtureParams& params, const PriorConfig& prior);

}  // namespace mixprobit
