#include "mixprobit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mixprobit/error.hpp"
#include "mixprobit/slice.hpp"

namespace mixprobit {

Eigen::VectorXi draw_gamma(const MixtureParams& params, const DesignCache& cache,
                           RngStream& rng, int* fallbacks) {
  const int r = params.r();
  const Eigen::Index n = cache.n();
  Eigen::VectorXi gamma(n);
  if (r == 1) {
    gamma.setZero();
    return gamma;
  }
  const Eigen::MatrixXd g = component_scores(params, cache.z, cache.x);
  const Eigen::MatrixXd pi = gating_matrix(params.delta, cache.z);
  std::vector<double> logw(static_cast<std::size_t>(r));
  std::vector<double> weights(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool success = cache.w[i] == 1;
    double top = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < r; ++j) {
      const double lp = success ? log_normal_cdf(g(i, j)) : log_normal_cdf(-g(i, j));
      logw[static_cast<std::size_t>(j)] = lp + std::log(pi(i, j));
      top = std::max(top, logw[static_cast<std::size_t>(j)]);
    }
    if (!std::isfinite(top)) {
      if (fallbacks) ++*fallbacks;
      log_warning("component weights underflowed at row " + std::to_string(i + 1) +
                  "; sampling label from the gating weights");
      for (int j = 0; j < r; ++j) weights[static_cast<std::size_t>(j)] = pi(i, j);
    } else {
      for (int j = 0; j < r; ++j)
        weights[static_cast<std::size_t>(j)] = std::exp(logw[static_cast<std::size_t>(j)] - top);
    }
    gamma[i] = static_cast<int>(rng.categorical(weights.data(), weights.size()));
  }
  return gamma;
}

Eigen::MatrixXd draw_utilities(const MixtureParams& params, const Eigen::VectorXi& gamma,
                               const DesignCache& cache, RngStream& rng, bool all_components) {
  const Eigen::MatrixXd g = component_scores(params, cache.z, cache.x);
  Eigen::MatrixXd v =
      Eigen::MatrixXd::Constant(g.rows(), g.cols(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (gamma[i] == j)
        v(i, j) = truncated_normal_sign(rng, g(i, j), cache.w[i] == 1);
      else if (all_components)
        v(i, j) = g(i, j) + rng.normal();
    }
  }
  return v;
}

Eigen::VectorXd flatten_delta(const Eigen::MatrixXd& delta) {
  Eigen::VectorXd flat(delta.size());
  Eigen::Index k = 0;
  for (Eigen::Index row = 0; row < delta.rows(); ++row)
    for (Eigen::Index col = 0; col < delta.cols(); ++col) flat[k++] = delta(row, col);
  return flat;
}

Eigen::MatrixXd unflatten_delta(const Eigen::VectorXd& flat, Eigen::Index rows,
                                Eigen::Index cols) {
  Eigen::MatrixXd delta(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index row = 0; row < rows; ++row)
    for (Eigen::Index col = 0; col < cols; ++col) delta(row, col) = flat[k++];
  return delta;
}

double delta_log_target(const Eigen::MatrixXd& delta, const Eigen::VectorXi& gamma,
                        const Eigen::MatrixXd& z, double c_delta) {
  const Eigen::Index r = delta.rows() + 1;
  double total = -0.5 * delta.squaredNorm() / c_delta;
  if (r == 1) return total;
  const Eigen::MatrixXd scores = z * delta.transpose();  // n x (r-1)
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double top = 0.0;
    for (Eigen::Index k = 0; k < r - 1; ++k) top = std::max(top, scores(i, k));
    double sum = std::exp(-top);
    for (Eigen::Index k = 0; k < r - 1; ++k) sum += std::exp(scores(i, k) - top);
    const double own = gamma[i] == 0 ? 0.0 : scores(i, gamma[i] - 1);
    total += own - top - std::log(sum);
  }
  return total;
}

namespace {

// Gradient and Hessian of delta_log_target, flattened row-major.
void delta_derivatives(const Eigen::MatrixXd& delta, const Eigen::VectorXi& gamma,
                       const Eigen::MatrixXd& z, double c_delta, Eigen::VectorXd& grad,
                       Eigen::MatrixXd& hess) {
  const Eigen::Index m = delta.rows();  // r - 1
  const Eigen::Index q = delta.cols();  // p + 1
  const Eigen::Index dim = m * q;
  grad = -flatten_delta(delta) / c_delta;
  hess = -Eigen::MatrixXd::Identity(dim, dim) / c_delta;
  const Eigen::MatrixXd pi = gating_matrix(delta, z);
  Eigen::MatrixXd zz(q, q);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto zi = z.row(i).transpose();
    zz.noalias() = zi * zi.transpose();
    for (Eigen::Index k = 0; k < m; ++k) {
      const double pk = pi(i, k + 1);
      const double indicator = gamma[i] == k + 1 ? 1.0 : 0.0;
      grad.segment(k * q, q) += (indicator - pk) * zi;
      for (Eigen::Index l = 0; l <= k; ++l) {
        const double coef = (k == l ? pk : 0.0) - pk * pi(i, l + 1);
        hess.block(k * q, l * q, q, q) -= coef * zz;
      }
    }
  }
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index l = 0; l < k; ++l)
      hess.block(l * q, k * q, q, q) = hess.block(k * q, l * q, q, q).transpose();
}

}  // namespace

DeltaMode find_delta_mode(const Eigen::MatrixXd& start, const Eigen::VectorXi& gamma,
                          const Eigen::MatrixXd& z, double c_delta,
                          const SamplerOptions& options) {
  DeltaMode out;
  const Eigen::Index rows = start.rows();
  const Eigen::Index cols = start.cols();
  Eigen::VectorXd x = flatten_delta(start);
  double fx = delta_log_target(start, gamma, z, c_delta);
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  for (int iter = 0; iter < options.newton_max_iter; ++iter) {
    out.iterations = iter + 1;
    delta_derivatives(unflatten_delta(x, rows, cols), gamma, z, c_delta, grad, hess);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
    const Eigen::VectorXd step = ldlt.solve(grad);
    // Newton decrement: predicted ascent of the quadratic model is half of it.
    const double decrement = grad.dot(step);
    if (grad.norm() < options.newton_tolerance ||
        decrement < options.newton_tolerance * options.newton_tolerance) {
      out.converged = true;
      break;
    }
    if (decrement < 1e-6) {
      // Quadratic regime; the objective cannot resolve such small gains.
      x += step;
      fx = delta_log_target(unflatten_delta(x, rows, cols), gamma, z, c_delta);
      continue;
    }
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Eigen::VectorXd trial = x + scale * step;
      const double ft = delta_log_target(unflatten_delta(trial, rows, cols), gamma, z, c_delta);
      if (ft > fx) {
        x = trial;
        fx = ft;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  delta_derivatives(unflatten_delta(x, rows, cols), gamma, z, c_delta, grad, hess);
  if (!out.converged) {
    const Eigen::VectorXd step = Eigen::LDLT<Eigen::MatrixXd>(-hess).solve(grad);
    out.converged = grad.dot(step) < 1e-6;
  }
  out.mode = unflatten_delta(x, rows, cols);
  out.covariance = (-hess).inverse();
  return out;
}

DeltaDraw draw_delta(const Eigen::MatrixXd& current, const Eigen::VectorXi& gamma,
                     const Eigen::MatrixXd& z, double c_delta, RngStream& rng,
                     const SamplerOptions& options) {
  DeltaDraw out{current, false, true};
  if (current.rows() == 0) return out;
  const DeltaMode mode = find_delta_mode(current, gamma, z, c_delta, options);
  if (!mode.converged) {
    out.converged = false;
    log_warning("gating mode search did not converge after " +
                std::to_string(mode.iterations) + " iterations; keeping current delta");
    return out;
  }
  const MultivariateT proposal(flatten_delta(mode.mode), mode.covariance, 5.0);
  const Eigen::VectorXd proposed_flat = proposal.sample(rng);
  const Eigen::MatrixXd proposed = unflatten_delta(proposed_flat, current.rows(), current.cols());
  const double log_ratio = delta_log_target(proposed, gamma, z, c_delta) -
                           delta_log_target(current, gamma, z, c_delta) +
                           proposal.log_density(flatten_delta(current)) -
                           proposal.log_density(proposed_flat);
  if (std::log(rng.uniform()) < log_ratio) {
    out.delta = proposed;
    out.accepted = true;
  }
  return out;
}

double delta_marginal_log_target(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& likelihoods,
                                 const Eigen::MatrixXd& z, double c_delta) {
  double total = -0.5 * delta.squaredNorm() / c_delta;
  const Eigen::MatrixXd pi = gating_matrix(delta, z);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    total += std::log(std::max(pi.row(i).dot(likelihoods.row(i)), 1e-300));
  return total;
}

namespace {

// Curvature of the gating log prior plus the label-free logit information.
Eigen::MatrixXd walk_precision(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& z,
                               double c_delta) {
  const Eigen::Index m = delta.rows();
  const Eigen::Index q = delta.cols();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(m * q, m * q) / c_delta;
  const Eigen::MatrixXd pi = gating_matrix(delta, z);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Eigen::MatrixXd zz = z.row(i).transpose() * z.row(i);
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index l = 0; l < m; ++l) {
        const double coef = (k == l ? pi(i, k + 1) : 0.0) - pi(i, k + 1) * pi(i, l + 1);
        precision.block(k * q, l * q, q, q) += coef * zz;
      }
  }
  return precision;
}

// log N(to; from, covariance) with covariance = precision^{-1} * scale^2.
double walk_log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                        const Eigen::LLT<Eigen::MatrixXd>& precision, double scale) {
  const Eigen::VectorXd d = precision.matrixU() * (to - from) / scale;
  const double log_det = precision.matrixLLT().diagonal().array().log().sum();
  return log_det - static_cast<double>(from.size()) * std::log(scale) - 0.5 * d.squaredNorm();
}

}  // namespace

bool walk_delta(MixtureParams& params, const DesignCache& cache, double c_delta,
                RngStream& rng) {
  if (params.r() < 2) return false;
  const Eigen::MatrixXd g = component_scores(params, cache.z, cache.x);
  Eigen::MatrixXd lik(g.rows(), g.cols());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      lik(i, j) = normal_cdf(cache.w[i] == 1 ? g(i, j) : -g(i, j));

  const Eigen::Index rows = params.delta.rows();
  const Eigen::Index cols = params.delta.cols();
  const Eigen::VectorXd current = flatten_delta(params.delta);
  const double scale = 2.38 / std::sqrt(static_cast<double>(current.size()));
  const Eigen::LLT<Eigen::MatrixXd> forward(walk_precision(params.delta, cache.z, c_delta));
  Eigen::VectorXd e(current.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = rng.normal();
  const Eigen::VectorXd proposed = current + scale * forward.matrixU().solve(e);
  const Eigen::MatrixXd proposed_delta = unflatten_delta(proposed, rows, cols);
  const Eigen::LLT<Eigen::MatrixXd> backward(walk_precision(proposed_delta, cache.z, c_delta));
  const double log_ratio =
      delta_marginal_log_target(proposed_delta, lik, cache.z, c_delta) -
      delta_marginal_log_target(params.delta, lik, cache.z, c_delta) +
      walk_log_density(proposed, current, backward, scale) -
      walk_log_density(current, proposed, forward, scale);
  if (std::log(rng.uniform()) < log_ratio) {
    params.delta = proposed_delta;
    return true;
  }
  return false;
}

namespace {

// Precision and right-hand side of the alpha conditional. Uses
// (I + tau X X')^{-1} = I - X tau (tau X'X + I)^{-1} X', diagonal in the
// orthogonal basis.
Eigen::LLT<Eigen::MatrixXd> alpha_system(const Eigen::VectorXd& v, double tau,
                                         const DesignCache& cache, double c_alpha,
                                         Eigen::VectorXd& rhs) {
  Eigen::MatrixXd precision = cache.ztz;
  precision.diagonal().array() += 1.0 / c_alpha;
  rhs = cache.z.transpose() * v;
  if (cache.spline_dim()) {
    const Eigen::ArrayXd shrink = tau / (tau * cache.gram.array() + 1.0);
    const Eigen::VectorXd xtv = cache.x.transpose() * v;
    precision -= cache.ztx * shrink.matrix().asDiagonal() * cache.ztx.transpose();
    rhs -= cache.ztx * (shrink * xtv.array()).matrix();
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw NumericalError("linear-coefficient conditional precision is not positive definite");
  return llt;
}

}  // namespace

GaussianConditional alpha_conditional(const Eigen::VectorXd& v, double tau,
                                      const DesignCache& cache, double c_alpha) {
  Eigen::VectorXd rhs;
  const auto llt = alpha_system(v, tau, cache, c_alpha, rhs);
  const Eigen::Index q = cache.linear_dim();
  return {llt.solve(rhs), llt.solve(Eigen::MatrixXd::Identity(q, q))};
}

Eigen::VectorXd draw_alpha(const Eigen::VectorXd& v, double tau, const DesignCache& cache,
                           double c_alpha, RngStream& rng) {
  Eigen::VectorXd rhs;
  const auto llt = alpha_system(v, tau, cache, c_alpha, rhs);
  const Eigen::VectorXd mean = llt.solve(rhs);
  Eigen::VectorXd e(mean.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = rng.normal();
  // precision = L L', so L'^{-1} e has covariance precision^{-1}.
  return mean + llt.matrixU().solve(e);
}

namespace {

Eigen::LLT<Eigen::MatrixXd> coefficient_system(const Eigen::VectorXd& v,
                                               const std::vector<Eigen::Index>& rows, double tau,
                                               const DesignCache& cache, double c_alpha,
                                               Eigen::VectorXd& rhs) {
  const Eigen::Index q = cache.linear_dim();
  const Eigen::Index l = cache.spline_dim();
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(m, q + l);
  Eigen::VectorXd y(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = rows[static_cast<std::size_t>(k)];
    design.row(k) << cache.z.row(i), cache.x.row(i);
    y[k] = v[i];
  }
  Eigen::MatrixXd precision(q + l, q + l);
  precision.setZero();
  precision.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  precision.diagonal().head(q).array() += 1.0 / c_alpha;
  precision.diagonal().tail(l).array() += 1.0 / tau;
  rhs = design.transpose() * y;
  Eigen::LLT<Eigen::MatrixXd> llt(precision.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success)
    throw NumericalError("coefficient conditional precision is not positive definite");
  return llt;
}

}  // namespace

GaussianConditional coefficient_conditional(const Eigen::VectorXd& v,
                                            const std::vector<Eigen::Index>& rows, double tau,
                                            const DesignCache& cache, double c_alpha) {
  Eigen::VectorXd rhs;
  const auto llt = coefficient_system(v, rows, tau, cache, c_alpha, rhs);
  const Eigen::Index d = rhs.size();
  return {llt.solve(rhs), llt.solve(Eigen::MatrixXd::Identity(d, d))};
}

void draw_coefficients(ComponentParams& component, const Eigen::VectorXd& v,
                       const std::vector<Eigen::Index>& rows, const DesignCache& cache,
                       double c_alpha, RngStream& rng) {
  if (static_cast<Eigen::Index>(rows.size()) == cache.n()) {
    // Whole design: the orthogonal basis gives the cheap two-stage draw.
    component.alpha = draw_alpha(v, component.tau, cache, c_alpha, rng);
    if (cache.spline_dim())
      component.beta = draw_beta(v - cache.z * component.alpha, component.tau, cache, rng);
    return;
  }
  Eigen::VectorXd rhs;
  const auto llt = coefficient_system(v, rows, component.tau, cache, c_alpha, rhs);
  Eigen::VectorXd e(rhs.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = rng.normal();
  const Eigen::VectorXd draw = llt.solve(rhs) + llt.matrixU().solve(e);
  component.alpha = draw.head(cache.linear_dim());
  component.beta = draw.tail(cache.spline_dim());
}

DiagonalConditional beta_conditional(const Eigen::VectorXd& residual, double tau,
                                     const DesignCache& cache) {
  DiagonalConditional out;
  out.variance = (tau / (tau * cache.gram.array() + 1.0)).matrix();
  out.mean = (out.variance.array() * (cache.x.transpose() * residual).array()).matrix();
  return out;
}

Eigen::VectorXd draw_beta(const Eigen::VectorXd& residual, double tau,
                          const DesignCache& cache, RngStream& rng) {
  const DiagonalConditional cond = beta_conditional(residual, tau, cache);
  Eigen::VectorXd beta(cond.mean.size());
  for (Eigen::Index k = 0; k < beta.size(); ++k)
    beta[k] = cond.mean[k] + std::sqrt(cond.variance[k]) * rng.normal();
  return beta;
}

double draw_truncated_inverse_gamma(RngStream& rng, double current, double power,
                                    double scale, double lower, double upper,
                                    const SamplerOptions& options) {
  if (scale <= 0.0) {
    // Pure power law tau^(-power) on (lo, upper), sampled by inverse CDF.
    const double lo = std::max(lower, options.tau_floor);
    const double u = rng.uniform();
    const double e = 1.0 - power;
    if (std::abs(e) < 1e-12) return lo * std::pow(upper / lo, u);
    const double a = std::pow(lo, e);
    const double b = std::pow(upper, e);
    return std::pow(a + u * (b - a), 1.0 / e);
  }
  // Density of s = log tau includes the Jacobian tau.
  const auto log_density = [power, scale](double s) {
    return (1.0 - power) * s - scale * std::exp(-s);
  };
  const double log_lower = lower > 0.0 ? std::log(lower) : -std::numeric_limits<double>::infinity();
  const double log_upper = std::log(upper);
  double s = std::log(current);
  if (!(s > log_lower && s < log_upper)) s = lower > 0.0 ? 0.5 * (log_lower + log_upper)
                                                         : log_upper - 1.0;
  for (int step = 0; step < options.slice_steps; ++step)
    s = slice_update(rng, s, log_density, options.slice_width, log_lower, log_upper);
  return std::exp(s);
}

void draw_tau(ChainState& state, const PriorConfig& prior, RngStream& rng,
              const SamplerOptions& options) {
  auto& comps = state.params.components;
  const int r = static_cast<int>(comps.size());
  for (int j = 0; j < r; ++j) {
    auto& c = comps[static_cast<std::size_t>(j)];
    const double l = static_cast<double>(c.beta.size());
    // The ordered prior contributes 1/tau_j through tau_{j+1} ~ U(0, tau_j).
    const double power = 0.5 * l + (j + 1 < r ? 1.0 : 0.0);
    const double upper = j == 0 ? prior.c_tau : comps[static_cast<std::size_t>(j - 1)].tau;
    const double lower = j + 1 < r ? comps[static_cast<std::size_t>(j + 1)].tau : 0.0;
    c.tau = draw_truncated_inverse_gamma(rng, c.tau, power, 0.5 * c.beta.squaredNorm(), lower,
                                         upper, options);
  }
  relabel(state);
}

std::vector<int> relabel(ChainState& state) {
  const std::vector<int> order = tau_order(state.params);
  const int r = state.params.r();
  bool identity = true;
  for (int j = 0; j < r; ++j) identity = identity && order[static_cast<std::size_t>(j)] == j;
  if (identity) return order;
  state.params = permute_components(state.params, order);

  auto& latent = state.latent;
  if (latent.utilities.cols() == r) {
    Eigen::MatrixXd u(latent.utilities.rows(), r);
    for (int j = 0; j < r; ++j) u.col(j) = latent.utilities.col(order[static_cast<std::size_t>(j)]);
    latent.utilities = std::move(u);
  }
  if (latent.gamma.size()) {
    std::vector<int> inverse(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) inverse[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = j;
    for (Eigen::Index i = 0; i < latent.gamma.size(); ++i)
      latent.gamma[i] = inverse[static_cast<std::size_t>(latent.gamma[i])];
  }
  return order;
}

SweepStats within_sweep(ChainState& state, const DesignCache& cache, const PriorConfig& prior,
                        RngStream& rng, const SamplerOptions& options) {
  SweepStats stats;
  auto& params = state.params;
  for (int k = 0; k < options.delta_walk_steps; ++k)
    stats.walk_accepted += walk_delta(params, cache, prior.c_delta, rng) ? 1 : 0;
  state.latent.gamma = draw_gamma(params, cache, rng, &stats.gamma_fallbacks);
  state.latent.utilities = draw_utilities(params, state.latent.gamma, cache, rng,
                                          !options.collapse_unassigned);

  if (params.r() > 1) {
    stats.delta_attempted = true;
    const DeltaDraw d = draw_delta(params.delta, state.latent.gamma, cache.z, prior.c_delta, rng,
                                   options);
    params.delta = d.delta;
    stats.delta_accepted = d.accepted;
    stats.delta_converged = d.converged;
  }

  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(params.r()));
  for (Eigen::Index i = 0; i < cache.n(); ++i) {
    if (options.collapse_unassigned)
      rows[static_cast<std::size_t>(state.latent.gamma[i])].push_back(i);
    else
      for (auto& rj : rows) rj.push_back(i);
  }
  for (int j = 0; j < params.r(); ++j)
    draw_coefficients(params.components[static_cast<std::size_t>(j)], state.latent.utilities.col(j),
                      rows[static_cast<std::size_t>(j)], cache, prior.c_alpha, rng);

  draw_tau(state, prior, rng, options);
  return stats;
}

}  // namespace mixprobit
