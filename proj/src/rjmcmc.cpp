#include "mixprobit/rjmcmc.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <algorithm>
#include <sstream>

#include "mixprobit/error.hpp"
#include "mixprobit/parallel.hpp"

namespace mixprobit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kProposalRidge = 1e-8;

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& xs,
                                  const Eigen::VectorXd& mean) {
  const Eigen::Index k = mean.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
  for (const auto& x : xs) {
    const Eigen::VectorXd d = x - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  if (xs.size() > 1) cov /= static_cast<double>(xs.size() - 1);
  return cov;
}

Eigen::VectorXd log_taus(const MixtureParams& params) {
  Eigen::VectorXd out(params.r());
  for (int j = 0; j < params.r(); ++j)
    out[j] = std::log(params.components[static_cast<std::size_t>(j)].tau);
  return out;
}

Eigen::Index coef_dimension(int r, Eigen::Index q, Eigen::Index l) { return r * (q + l); }

MultivariateT regularized(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd scale = cov;
  scale.diagonal().array() += kProposalRidge;
  return MultivariateT(mean, scale, 5.0);
}

std::vector<std::vector<int>> all_permutations(int r) {
  std::vector<int> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

Eigen::VectorXd label_features(const MixtureParams& params) {
  const Eigen::VectorXd theta = flatten_theta(params);
  Eigen::VectorXd f(theta.size() + params.r());
  f << theta, log_taus(params);
  return f;
}

// Chooses one labelling per draw so that the draws cluster around a single
// mode: start from decreasing average gating weight, then repeatedly assign
// each draw the permutation closest to the current mean in the scaled
// Euclidean metric.
void align_labels(std::vector<MixtureParams>& draws, const Eigen::MatrixXd& z) {
  if (draws.empty() || draws.front().r() == 1) return;
  const int r = draws.front().r();
  for (auto& d : draws) {
    const Eigen::VectorXd weight = gating_matrix(d.delta, z).colwise().mean().transpose();
    std::vector<int> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weight[a] > weight[b]; });
    d = permute_components(d, order);
  }
  const auto perms = all_permutations(r);
  for (int sweep = 0; sweep < 50; ++sweep) {
    const Eigen::Index dim = label_features(draws.front()).size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
    for (const auto& d : draws) {
      const Eigen::VectorXd f = label_features(d);
      mean += f;
      sq += f.cwiseProduct(f);
    }
    mean /= static_cast<double>(draws.size());
    const Eigen::VectorXd inv_var =
        ((sq / static_cast<double>(draws.size())) - mean.cwiseProduct(mean)).array().max(0.0).
        unaryExpr([](double v) { return 1.0 / (v + 1e-8); }).matrix();
    bool changed = false;
    for (auto& d : draws) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < perms.size(); ++k) {
        const Eigen::VectorXd diff = label_features(permute_components(d, perms[k])) - mean;
        const double dist = diff.cwiseProduct(diff).dot(inv_var);
        if (dist < best) {
          best = dist;
          best_k = k;
        }
      }
      if (best_k != 0) {
        d = permute_components(d, perms[best_k]);
        changed = true;
      }
    }
    if (!changed) break;
  }
}

}  // namespace

void ChainConfig::validate() const {
  if (pilot_burnin < 0 || pilot_length < 2 || warmup < 0 || sampling < 1 || thin < 1)
    throw UsageError("chain lengths must be positive (pilot length at least 2)");
}

Eigen::Index theta_dimension(int r, Eigen::Index q, Eigen::Index l) {
  return r * q + r * l + (r - 1) * q;
}

Eigen::VectorXd flatten_theta(const MixtureParams& params) {
  const int r = params.r();
  const Eigen::Index q = params.components.front().alpha.size();
  const Eigen::Index l = params.components.front().beta.size();
  Eigen::VectorXd theta(theta_dimension(r, q, l));
  Eigen::Index k = 0;
  for (const auto& c : params.components) {
    theta.segment(k, q) = c.alpha;
    k += q;
  }
  for (const auto& c : params.components) {
    theta.segment(k, l) = c.beta;
    k += l;
  }
  theta.tail((r - 1) * q) = flatten_delta(params.delta);
  return theta;
}

MixtureParams unflatten_theta(const Eigen::VectorXd& theta, int r, Eigen::Index q,
                              Eigen::Index l) {
  if (theta.size() != theta_dimension(r, q, l))
    throw UsageError("flattened parameter vector has the wrong length");
  MixtureParams params = zero_params(r, q - 1, l);
  Eigen::Index k = 0;
  for (auto& c : params.components) {
    c.alpha = theta.segment(k, q);
    k += q;
  }
  for (auto& c : params.components) {
    c.beta = theta.segment(k, l);
    k += l;
  }
  params.delta = unflatten_delta(theta.tail((r - 1) * q), r - 1, q);
  return params;
}

void ModelPilot::build_proposals(Eigen::Index q, Eigen::Index l) {
  const Eigen::Index nc = coef_dimension(r, q, l);
  const Eigen::Index nd = (r - 1) * q;
  coef_proposal = regularized(mean_theta.head(nc), cov_theta.topLeftCorner(nc, nc));
  delta_proposal = regularized(mean_theta.tail(nd), cov_theta.bottomRightCorner(nd, nd));
  log_tau_proposal = regularized(log_tau_mean, log_tau_cov);
}

bool ModelPilot::tau_from_coefficients(Eigen::Index l) { return l >= 3; }

double ModelPilot::tau_shape(int j, Eigen::Index l) const {
  return 0.5 * static_cast<double>(l) + (j < r - 1 ? 1.0 : 0.0) - 1.0;
}

MixtureParams ModelPilot::aligned_draw(RngStream& rng, Eigen::Index q, Eigen::Index l) const {
  Eigen::VectorXd theta(theta_dimension(r, q, l));
  const Eigen::Index nc = coef_dimension(r, q, l);
  theta.tail((r - 1) * q) = delta_proposal.sample(rng);
  theta.head(nc) = coef_proposal.sample(rng);
  MixtureParams params = unflatten_theta(theta, r, q, l);
  if (tau_from_coefficients(l)) {
    for (int j = 0; j < r; ++j) {
      auto& c = params.components[static_cast<std::size_t>(j)];
      c.tau = 0.5 * c.beta.squaredNorm() / rng.gamma(tau_shape(j, l));
    }
  } else {
    const Eigen::VectorXd lt = log_tau_proposal.sample(rng);
    for (int j = 0; j < r; ++j) params.components[static_cast<std::size_t>(j)].tau = std::exp(lt[j]);
  }
  return params;
}

double ModelPilot::aligned_log_density(const MixtureParams& params) const {
  const Eigen::VectorXd theta = flatten_theta(params);
  const Eigen::Index nc = coef_proposal.dimension();
  double total = coef_proposal.log_density(theta.head(nc));
  if (r > 1) total += delta_proposal.log_density(theta.tail(theta.size() - nc));
  const Eigen::Index l = params.components.front().beta.size();
  if (tau_from_coefficients(l)) {
    // Inverse gamma given beta, expressed as a density in log tau.
    for (int j = 0; j < r; ++j) {
      const auto& c = params.components[static_cast<std::size_t>(j)];
      const double shape = tau_shape(j, l);
      const double scale = 0.5 * c.beta.squaredNorm();
      total += shape * std::log(scale) - std::lgamma(shape) - shape * std::log(c.tau) - scale / c.tau;
    }
  } else {
    total += log_tau_proposal.log_density(log_taus(params));
  }
  return total;
}

MixtureParams ModelPilot::draw(RngStream& rng, Eigen::Index q, Eigen::Index l) const {
  const MixtureParams params = aligned_draw(rng, q, l);
  return permute_components(params, tau_order(params));
}

double ModelPilot::log_density(const MixtureParams& params) const {
  // Sorting by tau maps each of the r! relabellings of a point to the same
  // ordered point, so their densities add.
  double top = kNegInf;
  std::vector<double> terms;
  for (const auto& perm : all_permutations(r)) {
    terms.push_back(aligned_log_density(permute_components(params, perm)));
    top = std::max(top, terms.back());
  }
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

MixtureParams ModelPilot::mean_params(Eigen::Index q, Eigen::Index l) const {
  MixtureParams params = unflatten_theta(mean_theta, r, q, l);
  for (int j = 0; j < r; ++j)
    params.components[static_cast<std::size_t>(j)].tau = std::exp(log_tau_mean[j]);
  return permute_components(params, tau_order(params));
}

namespace {

MixtureParams dispersed_start(int r, Eigen::Index q, Eigen::Index l, const PriorConfig& prior,
                              RngStream& rng) {
  MixtureParams params = zero_params(r, q - 1, l);
  for (int j = 0; j < r; ++j) {
    auto& c = params.components[static_cast<std::size_t>(j)];
    c.tau = prior.c_tau * std::pow(2.0, -(j + 1));
    for (Eigen::Index k = 0; k < q; ++k) c.alpha[k] = 0.1 * std::sqrt(prior.c_alpha) * rng.normal();
    for (Eigen::Index k = 0; k < l; ++k) c.beta[k] = 0.1 * std::sqrt(c.tau) * rng.normal();
  }
  for (Eigen::Index a = 0; a < params.delta.rows(); ++a)
    for (Eigen::Index b = 0; b < q; ++b)
      params.delta(a, b) = 0.1 * std::sqrt(prior.c_delta) * rng.normal();
  return params;
}

ModelPilot run_pilot(int r, const DesignCache& cache, const PriorConfig& prior,
                     const ChainConfig& config, RngStream rng) {
  const Eigen::Index q = cache.linear_dim();
  const Eigen::Index l = cache.spline_dim();
  ChainState state;
  state.params = dispersed_start(r, q, l, prior, rng);
  std::vector<MixtureParams> draws;
  draws.reserve(static_cast<std::size_t>(config.pilot_length));
  long accepts = 0;
  const int total = config.pilot_burnin + config.pilot_length;
  for (int it = 0; it < total; ++it) {
    const SweepStats stats = within_sweep(state, cache, prior, rng, config.sampler);
    accepts += stats.delta_accepted ? 1 : 0;
    if (it >= config.pilot_burnin) draws.push_back(state.params);
  }
  if (r > 1 && accepts == 0) {
    std::ostringstream msg;
    msg << "pilot chain for r=" << r << " never accepted a gating update in " << total
        << " sweeps";
    throw NumericalError(msg.str());
  }

  align_labels(draws, cache.z);
  std::vector<Eigen::VectorXd> thetas;
  std::vector<Eigen::VectorXd> logtaus;
  for (const auto& d : draws) {
    thetas.push_back(flatten_theta(d));
    logtaus.push_back(log_taus(d));
  }

  ModelPilot pilot;
  pilot.r = r;
  pilot.draw_count = config.pilot_length;
  pilot.delta_acceptance = r > 1 ? static_cast<double>(accepts) / total : 0.0;
  pilot.mean_theta = Eigen::VectorXd::Zero(theta_dimension(r, q, l));
  for (const auto& t : thetas) pilot.mean_theta += t;
  pilot.mean_theta /= static_cast<double>(thetas.size());
  pilot.cov_theta = sample_covariance(thetas, pilot.mean_theta);
  pilot.log_tau_mean = Eigen::VectorXd::Zero(r);
  for (const auto& t : logtaus) pilot.log_tau_mean += t;
  pilot.log_tau_mean /= static_cast<double>(logtaus.size());
  pilot.log_tau_cov = sample_covariance(logtaus, pilot.log_tau_mean);
  for (const auto& c : state.params.components) pilot.last_tau.push_back(c.tau);
  pilot.build_proposals(q, l);
  std::ostringstream msg;
  msg << "pilot r=" << r << ": gating acceptance " << pilot.delta_acceptance;
  log_info(msg.str());
  return pilot;
}

}  // namespace

PilotSummary run_pilots(const DesignCache& cache, const PriorConfig& prior,
                        const ChainConfig& config, const RngStream& rng) {
  config.validate();
  PilotSummary summary;
  summary.linear_dim = cache.linear_dim();
  summary.spline_dim = cache.spline_dim();
  summary.models.resize(static_cast<std::size_t>(prior.max_components));
  parallel_for(summary.models.size(), config.jobs, [&](std::size_t k) {
    const int r = static_cast<int>(k) + 1;
    summary.models[k] = run_pilot(r, cache, prior, config, rng.substream(1000 + k));
  });
  return summary;
}

PilotSummary prior_pilots(const PriorConfig& prior, Eigen::Index q, Eigen::Index l) {
  PilotSummary summary;
  summary.linear_dim = q;
  summary.spline_dim = l;
  for (int r = 1; r <= prior.max_components; ++r) {
    ModelPilot pilot;
    pilot.r = r;
    const Eigen::Index dim = theta_dimension(r, q, l);
    pilot.mean_theta = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd var(dim);
    Eigen::Index k = 0;
    for (int j = 0; j < r; ++j)
      for (Eigen::Index a = 0; a < q; ++a) var[k++] = prior.c_alpha;
    for (int j = 0; j < r; ++j)
      for (Eigen::Index a = 0; a < l; ++a) var[k++] = prior.c_tau * std::pow(0.5, j + 1);
    for (; k < dim; ++k) var[k] = prior.c_delta;
    pilot.cov_theta = var.asDiagonal();
    // log tau_j = log c_tau + sum of j log-uniforms: mean -j, covariance min(i, j).
    pilot.log_tau_mean.resize(r);
    pilot.log_tau_cov.resize(r, r);
    for (int a = 0; a < r; ++a) {
      pilot.log_tau_mean[a] = std::log(prior.c_tau) - (a + 1);
      for (int b = 0; b < r; ++b) pilot.log_tau_cov(a, b) = std::min(a, b) + 1;
      pilot.last_tau.push_back(std::exp(pilot.log_tau_mean[a]));
    }
    pilot.build_proposals(q, l);
    summary.models.push_back(std::move(pilot));
  }
  return summary;
}

double log_r_transition(int from, int to, int R) {
  if (R == 1) return from == to ? 0.0 : kNegInf;
  if (std::abs(from - to) != 1 || to < 1 || to > R) return kNegInf;
  if (from == 1 || from == R) return 0.0;
  return std::log(0.5);
}

RProposal propose_r(int current, int R, RngStream& rng) {
  if (current < 1 || current > R) throw UsageError("current component count out of range");
  RProposal out;
  if (R == 1) {
    out.proposed = current;
    return out;
  }
  if (current == 1) {
    out.proposed = 2;
  } else if (current == R) {
    out.proposed = R - 1;
  } else {
    out.proposed = rng.uniform() < 0.5 ? current - 1 : current + 1;
  }
  out.log_q_ratio = log_r_transition(out.proposed, current, R) -
                    log_r_transition(current, out.proposed, R);
  return out;
}

double log_joint_target(const MixtureParams& params, const DesignCache& cache,
                        const PriorConfig& prior) {
  const double lp = log_prior(params, prior);
  if (lp == kNegInf) return kNegInf;
  double total = lp + prior.log_model_prior(params.r()) + observed_loglik(params, cache);
  for (const auto& c : params.components) total += std::log(c.tau);
  return total;
}

double log_move_ratio(const MixtureParams& current, const MixtureParams& proposed,
                      const PilotSummary& pilots, const DesignCache& cache,
                      const PriorConfig& prior) {
  const int R = prior.max_components;
  const double target_p = log_joint_target(proposed, cache, prior);
  if (target_p == kNegInf) return kNegInf;
  const double target_c = log_joint_target(current, cache, prior);
  const double r_terms = proposed.r() == current.r()
                             ? 0.0
                             : log_r_transition(proposed.r(), current.r(), R) -
                                   log_r_transition(current.r(), proposed.r(), R);
  return target_p - target_c + r_terms + pilots.at(current.r()).log_density(current) -
         pilots.at(proposed.r()).log_density(proposed);
}

std::vector<double> ChainTrace::model_frequencies(int R) const {
  std::vector<double> freq(static_cast<std::size_t>(R), 0.0);
  if (draws.empty()) return freq;
  for (const auto& d : draws) freq[static_cast<std::size_t>(d.params.r() - 1)] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(draws.size());
  return freq;
}

ChainRunner::ChainRunner(const DesignCache& cache, const PriorConfig& prior, PilotSummary pilots,
                         ChainConfig config, RngStream rng)
    : cache_(cache),
      prior_(prior),
      pilots_(std::move(pilots)),
      config_(config),
      rng_(std::move(rng)) {
  config_.validate();
  if (static_cast<int>(pilots_.models.size()) != prior_.max_components)
    throw UsageError("pilot summary does not cover every component count");
}

void ChainRunner::initialize() {
  const int r = 1 + static_cast<int>(
                        rng_.categorical(prior_.model_prior.data(), prior_.model_prior.size()));
  initialize(pilots_.at(r).mean_params(cache_.linear_dim(), cache_.spline_dim()));
}

void ChainRunner::initialize(MixtureParams params) {
  state_ = ChainState{std::move(params), {}};
  relabel(state_);
  per_model_.assign(static_cast<std::size_t>(prior_.max_components), MixtureParams{});
  for (int r = 1; r <= prior_.max_components; ++r)
    per_model_[static_cast<std::size_t>(r - 1)] =
        pilots_.at(r).mean_params(cache_.linear_dim(), cache_.spline_dim());
  per_model_[static_cast<std::size_t>(state_.params.r() - 1)] = state_.params;
  iteration_ = 0;
}

MoveRecord ChainRunner::between_model_move() {
  MoveRecord rec;
  rec.iteration = iteration_;
  rec.from = state_.params.r();
  const RProposal rp = propose_r(rec.from, prior_.max_components, rng_);
  rec.proposed = rp.proposed;
  if (rp.proposed == rec.from) return rec;

  const MixtureParams proposed =
      pilots_.at(rp.proposed).draw(rng_, cache_.linear_dim(), cache_.spline_dim());
  if (!proposed.tau_ordered(prior_.c_tau)) {
    rec.log_ratio = kNegInf;
    log_info("between-model proposal has unordered smoothing parameters; rejected");
    return rec;
  }
  rec.log_ratio = log_move_ratio(state_.params, proposed, pilots_, cache_, prior_);
  if (std::log(rng_.uniform()) < rec.log_ratio) {
    rec.accepted = true;
    per_model_[static_cast<std::size_t>(rec.from - 1)] = state_.params;
    state_.params = proposed;
    state_.latent = {};
  }
  return rec;
}

SweepStats ChainRunner::within_model_sweep() {
  SweepStats stats = within_sweep(state_, cache_, prior_, rng_, config_.sampler);
  per_model_[static_cast<std::size_t>(state_.params.r() - 1)] = state_.params;
  return stats;
}

void ChainRunner::advance(long iterations, ChainTrace& trace, bool retain,
                          const std::function<void(const TraceDraw&)>& on_draw) {
  for (long k = 0; k < iterations; ++k) {
    ++iteration_;
    const MoveRecord move = between_model_move();
    if (prior_.max_components > 1) {
      ++trace.rj_attempts;
      trace.rj_accepts += move.accepted ? 1 : 0;
    }
    const SweepStats stats = within_model_sweep();
    trace.delta_attempts += stats.delta_attempted ? 1 : 0;
    trace.delta_accepts += stats.delta_accepted ? 1 : 0;
    if (retain) {
      trace.moves.push_back(move);
      if (iteration_ % config_.thin == 0) {
        TraceDraw draw{iteration_, state_.params, observed_loglik(state_.params, cache_)};
        if (on_draw) on_draw(draw);
        trace.draws.push_back(std::move(draw));
      }
    }
  }
}

ChainTrace ChainRunner::run(const std::function<void(const TraceDraw&)>& on_draw) {
  ChainTrace trace;
  advance(config_.warmup, trace, false);
  trace.rj_attempts = trace.rj_accepts = trace.delta_attempts = trace.delta_accepts = 0;
  advance(config_.sampling, trace, true, on_draw);
  return trace;
}

nlohmann::json params_to_json(const MixtureParams& params) {
  nlohmann::json j;
  j["r"] = params.r();
  for (const auto& c : params.components) {
    j["alpha"].push_back(std::vector<double>(c.alpha.data(), c.alpha.data() + c.alpha.size()));
    j["beta"].push_back(std::vector<double>(c.beta.data(), c.beta.data() + c.beta.size()));
    j["tau"].push_back(c.tau);
  }
  j["delta"] = nlohmann::json::array();
  for (Eigen::Index a = 0; a < params.delta.rows(); ++a) {
    std::vector<double> row(static_cast<std::size_t>(params.delta.cols()));
    for (Eigen::Index b = 0; b < params.delta.cols(); ++b)
      row[static_cast<std::size_t>(b)] = params.delta(a, b);
    j["delta"].push_back(row);
  }
  return j;
}

MixtureParams params_from_json(const nlohmann::json& j) {
  MixtureParams params;
  const int r = j.at("r").get<int>();
  for (int k = 0; k < r; ++k) {
    const auto a = j.at("alpha").at(k).get<std::vector<double>>();
    const auto b = j.at("beta").at(k).get<std::vector<double>>();
    ComponentParams c;
    c.alpha = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    c.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    c.tau = j.at("tau").at(k).get<double>();
    params.components.push_back(std::move(c));
  }
  const Eigen::Index q = params.components.front().alpha.size();
  params.delta.resize(r - 1, q);
  for (int a = 0; a < r - 1; ++a) {
    const auto row = j.at("delta").at(a).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != q) throw DataError("gating row has wrong length");
    for (Eigen::Index b = 0; b < q; ++b) params.delta(a, b) = row[static_cast<std::size_t>(b)];
  }
  return params;
}

nlohmann::json ChainRunner::snapshot() const {
  nlohmann::json j;
  j["iteration"] = iteration_;
  j["rng"] = rng_.save_state();
  j["state"] = params_to_json(state_.params);
  for (const auto& m : per_model_) j["per_model"].push_back(params_to_json(m));
  return j;
}

void ChainRunner::restore(const nlohmann::json& j) {
  iteration_ = j.at("iteration").get<long>();
  rng_.load_state(j.at("rng").get<std::string>());
  state_ = ChainState{params_from_json(j.at("state")), {}};
  per_model_.clear();
  for (const auto& m : j.at("per_model")) per_model_.push_back(params_from_json(m));
}

ChainTrace run_chain(const DesignCache& cache, const PriorConfig& prior,
                     const PilotSummary& pilots, const ChainConfig& config, RngStream rng,
                     const std::function<void(const TraceDraw&)>& on_draw) {
  ChainRunner runner(cache, prior, pilots, config, std::move(rng));
  runner.initialize();
  return runner.run(on_draw);
}

}  // namespace mixprobit
