#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mixprobit/model.hpp"
#include "mixprobit/normal.hpp"
#include "mixprobit/rng.hpp"
#include "mixprobit/sampler.hpp"

namespace mixprobit {

struct ChainConfig {
  int pilot_burnin = 1000;
  int pilot_length = 2000;
  int warmup = 5000;
  int sampling = 5000;
  int thin = 1;
  int jobs = 1;
  SamplerOptions sampler;

  void validate() const;
};

// Flattened parameter layout: alpha_1..alpha_r, beta_1..beta_r, then the
// gating rows of components 2..r.
Eigen::Index theta_dimension(int r, Eigen::Index linear_dim, Eigen::Index spline_dim);
Eigen::VectorXd flatten_theta(const MixtureParams& params);
MixtureParams unflatten_theta(const Eigen::VectorXd& theta, int r, Eigen::Index linear_dim,
                              Eigen::Index spline_dim);

// Moments of a fixed-r chain and the independence proposals built from them.
struct ModelPilot {
  int r = 1;
  Eigen::VectorXd mean_theta;
  Eigen::MatrixXd cov_theta;
  Eigen::VectorXd log_tau_mean;
  Eigen::MatrixXd log_tau_cov;
  std::vector<double> last_tau;
  int draw_count = 0;
  double delta_acceptance = 0.0;

  // Proposals over the gating block and the coefficient block (alpha, beta);
  // scale matrices carry a 1e-8 ridge. Each tau_j is then drawn from its
  // inverse gamma conditional given beta_j, or from log_tau_proposal when the
  // spline block is too small for that to be proper.
  MultivariateT delta_proposal;
  MultivariateT coef_proposal;
  MultivariateT log_tau_proposal;

  void build_proposals(Eigen::Index linear_dim, Eigen::Index spline_dim);
  // Draws in the aligned labelling of the pilot, then sorts by tau.
  MixtureParams draw(RngStream& rng, Eigen::Index linear_dim, Eigen::Index spline_dim) const;
  // Density of draw() at a tau-ordered point.
  double log_density(const MixtureParams& params) const;
  MixtureParams aligned_draw(RngStream& rng, Eigen::Index linear_dim,
                             Eigen::Index spline_dim) const;
  double aligned_log_density(const MixtureParams& params) const;
  MixtureParams mean_params(Eigen::Index linear_dim, Eigen::Index spline_dim) const;

  static bool tau_from_coefficients(Eigen::Index spline_dim);
  double tau_shape(int j, Eigen::Index spline_dim) const;
};

struct PilotSummary {
  std::vector<ModelPilot> models;  // index r - 1
  Eigen::Index linear_dim = 0;
  Eigen::Index spline_dim = 0;

  const ModelPilot& at(int r) const { return models.at(static_cast<std::size_t>(r - 1)); }
};

// Fixed-r chains for r = 1..R from dispersed starts, run on independent
// substreams of rng.
PilotSummary run_pilots(const DesignCache& cache, const PriorConfig& prior,
                        const ChainConfig& config, const RngStream& rng);

// Proposal built from the prior moments instead of pilot chains.
PilotSummary prior_pilots(const PriorConfig& prior, Eigen::Index linear_dim,
                          Eigen::Index spline_dim);

struct RProposal {
  int proposed = 1;
  double log_q_ratio = 0.0;  // log q(proposed -> current) - log q(current -> proposed)
};

// Neighbour proposal over 1..R; returns proposed == current when R == 1.
RProposal propose_r(int current, int max_components, RngStream& rng);
double log_r_transition(int from, int to, int max_components);

// log p(w | X) + log p(X) + log Pr(r) + sum log tau, the target density in
// the (theta, log tau) coordinates the proposals use.
double log_joint_target(const MixtureParams& params, const DesignCache& cache,
                        const PriorConfig& prior);

// Log Metropolis-Hastings ratio of moving from current to proposed.
double log_move_ratio(const MixtureParams& current, const MixtureParams& proposed,
                      const PilotSummary& pilots, const DesignCache& cache,
                      const PriorConfig& prior);

struct MoveRecord {
  long iteration = 0;
  int from = 1;
  int proposed = 1;
  bool accepted = false;
  double log_ratio = 0.0;
};

struct TraceDraw {
  long iteration = 0;
  MixtureParams params;
  double loglik = 0.0;
};

struct ChainTrace {
  std::vector<TraceDraw> draws;
  std::vector<MoveRecord> moves;
  long delta_attempts = 0;
  long delta_accepts = 0;
  long rj_attempts = 0;
  long rj_accepts = 0;

  std::vector<double> model_frequencies(int max_components) const;
};

// The full reversible-jump chain: one between-model move followed by one
// within-model sweep per iteration.
class ChainRunner {
 public:
  ChainRunner(const DesignCache& cache, const PriorConfig& prior, PilotSummary pilots,
              ChainConfig config, RngStream rng);

  // Draws r from the model prior and starts from that model's pilot mean.
  void initialize();
  void initialize(MixtureParams params);

  MoveRecord between_model_move();
  SweepStats within_model_sweep();

  // Runs warmup then sampling iterations, keeping every thin-th draw.
  ChainTrace run(const std::function<void(const TraceDraw&)>& on_draw = {});
  // Runs `iterations` further iterations, appending retained draws.
  void advance(long iterations, ChainTrace& trace, bool retain,
               const std::function<void(const TraceDraw&)>& on_draw = {});

  const ChainState& state() const { return state_; }
  ChainState& state() { return state_; }
  long iteration() const { return iteration_; }
  const PilotSummary& pilots() const { return pilots_; }

  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& snapshot);

 private:
  const DesignCache& cache_;
  PriorConfig prior_;
  PilotSummary pilots_;
  ChainConfig config_;
  RngStream rng_;
  ChainState state_;
  std::vector<MixtureParams> per_model_;  // last state of every r
  long iteration_ = 0;
};

ChainTrace run_chain(const DesignCache& cache, const PriorConfig& prior,
                     const PilotSummary& pilots, const ChainConfig& config, RngStream rng,
                     const std::function<void(const TraceDraw&)>& on_draw = {});

nlohmann::json params_to_json(const MixtureParams& params);
MixtureParams params_from_json(const nlohmann::json& j);

}  // namespace mixprobit
