#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixprobit/model.hpp"
#include "mixprobit/normal.hpp"
#include "mixprobit/rng.hpp"

namespace mixprobit {

// Component labels (0-based) and latent utilities of the data-augmented
// model for one component count.
// With collapsed sweeps only utilities(i, gamma[i]) is drawn; the other
// entries integrate out of every conditional and are left as NaN.
struct LatentState {
  Eigen::VectorXi gamma;      // n
  Eigen::MatrixXd utilities;  // n x r
};

struct ChainState {
  MixtureParams params;
  LatentState latent;
};

struct SamplerOptions {
  int slice_steps = 10;
  double slice_width = 1.0;  // in log tau
  int newton_max_iter = 100;
  double newton_tolerance = 1e-8;
  double tau_floor = 1e-8;
  // Draw each component's coefficients from the rows it owns, with the
  // utilities of the other rows integrated out. When false every utility is
  // drawn and the coefficient draw uses the whole design.
  bool collapse_unassigned = true;
  int delta_walk_steps = 1;  // label-free gating updates per sweep
};

struct SweepStats {
  bool delta_attempted = false;
  bool delta_accepted = false;
  int walk_accepted = 0;
  bool delta_converged = true;
  int gamma_fallbacks = 0;
};

Eigen::VectorXi draw_gamma(const MixtureParams& params, const DesignCache& cache,
                           RngStream& rng, int* fallbacks = nullptr);

// Truncated draws for each row's own component; untruncated N(g, 1) draws for
// the others when all_components is set, NaN otherwise.
Eigen::MatrixXd draw_utilities(const MixtureParams& params, const Eigen::VectorXi& gamma,
                               const DesignCache& cache, RngStream& rng,
                               bool all_components = true);

// Log of the gating conditional p(delta | gamma) up to a constant:
// multinomial-logit likelihood of the labels plus the N(0, c_delta I) prior.
double delta_log_target(const Eigen::MatrixXd& delta, const Eigen::VectorXi& gamma,
                        const Eigen::MatrixXd& z, double c_delta);

struct DeltaMode {
  Eigen::MatrixXd mode;
  Eigen::MatrixXd covariance;  // negative inverse Hessian at the mode, flattened rows
  bool converged = false;
  int iterations = 0;
};

// Damped Newton ascent from start. The objective is strictly concave.
DeltaMode find_delta_mode(const Eigen::MatrixXd& start, const Eigen::VectorXi& gamma,
                          const Eigen::MatrixXd& z, double c_delta,
                          const SamplerOptions& options = {});

struct DeltaDraw {
  Eigen::MatrixXd delta;
  bool accepted = false;
  bool converged = true;
};

// Independence Metropolis-Hastings step with a MVT_5 proposal centred at
// the conditional mode.
DeltaDraw draw_delta(const Eigen::MatrixXd& current, const Eigen::VectorXi& gamma,
                     const Eigen::MatrixXd& z, double c_delta, RngStream& rng,
                     const SamplerOptions& options = {});

// log p(delta | alpha, beta, w) up to a constant, with the labels summed out.
double delta_marginal_log_target(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& likelihoods,
                                 const Eigen::MatrixXd& z, double c_delta);

// Metropolis random walk on delta against delta_marginal_log_target. The
// step covariance is the inverse negative Hessian of the gating log prior
// plus multinomial-logit curvature at the current point, which does not
// depend on the labels; the reverse proposal density is evaluated exactly.
bool walk_delta(MixtureParams& params, const DesignCache& cache, double c_delta,
                RngStream& rng);

// Row-major flattening of the gating matrix used by every proposal.
Eigen::VectorXd flatten_delta(const Eigen::MatrixXd& delta);
Eigen::MatrixXd unflatten_delta(const Eigen::VectorXd& flat, Eigen::Index rows,
                                Eigen::Index cols);

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// alpha_j | v_j, tau_j with beta_j integrated out.
GaussianConditional alpha_conditional(const Eigen::VectorXd& v, double tau,
                                      const DesignCache& cache, double c_alpha);
Eigen::VectorXd draw_alpha(const Eigen::VectorXd& v, double tau, const DesignCache& cache,
                           double c_alpha, RngStream& rng);

// (alpha_j, beta_j) | utilities of the rows in `rows`, tau_j. Used when a
// component owns a strict subset of the data, where the basis is no longer
// orthogonal.
GaussianConditional coefficient_conditional(const Eigen::VectorXd& v,
                                            const std::vector<Eigen::Index>& rows, double tau,
                                            const DesignCache& cache, double c_alpha);
void draw_coefficients(ComponentParams& component, const Eigen::VectorXd& v,
                       const std::vector<Eigen::Index>& rows, const DesignCache& cache,
                       double c_alpha, RngStream& rng);

// beta_j | alpha_j, v_j, tau_j; the covariance is diagonal so only its
// diagonal is returned.
struct DiagonalConditional {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};
DiagonalConditional beta_conditional(const Eigen::VectorXd& residual, double tau,
                                     const DesignCache& cache);
Eigen::VectorXd draw_beta(const Eigen::VectorXd& residual, double tau,
                          const DesignCache& cache, RngStream& rng);

// Draws tau from the density proportional to tau^(-power) exp(-scale / tau)
// on (lower, upper) by slice sampling on log tau, starting from current.
// With scale = 0 the power law is sampled exactly, floored at tau_floor.
double draw_truncated_inverse_gamma(RngStream& rng, double current, double power,
                                    double scale, double lower, double upper,
                                    const SamplerOptions& options = {});

// Updates every tau_j from its full conditional under the ordered prior and
// then relabels so tau_1 > ... > tau_r.
void draw_tau(ChainState& state, const PriorConfig& prior, RngStream& rng,
              const SamplerOptions& options = {});

// Sorts components by decreasing tau, permuting coefficients, utilities
// columns and labels, and re-basing delta against the new first component.
// Returns the permutation (new position -> old index).
std::vector<int> relabel(ChainState& state);

SweepStats within_sweep(ChainState& state, const DesignCache& cache, const PriorConfig& prior,
                        RngStream& rng, const SamplerOptions& options = {});

}  // namespace mixprobit
