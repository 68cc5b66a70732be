#include "mixprobit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mixprobit/error.hpp"
#include "mixprobit/normal.hpp"

namespace mixprobit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

// Sum of iid N(0, variance) log densities over v.
double gaussian_log_density(const Eigen::VectorXd& v, double variance) {
  const auto k = static_cast<double>(v.size());
  return -0.5 * k * (kLog2Pi + std::log(variance)) - 0.5 * v.squaredNorm() / variance;
}
}  // namespace

PriorConfig PriorConfig::resolved(Eigen::Index n) const {
  PriorConfig out = *this;
  if (out.c_delta <= 0.0) out.c_delta = static_cast<double>(n);
  if (out.max_components < 1) throw UsageError("maximum component count must be at least 1");
  if (!(out.c_alpha > 0.0) || !(out.c_tau > 0.0))
    throw UsageError("prior variances and bounds must be positive");
  if (out.model_prior.empty())
    out.model_prior.assign(static_cast<std::size_t>(out.max_components),
                           1.0 / out.max_components);
  if (static_cast<int>(out.model_prior.size()) != out.max_components)
    throw UsageError("model prior length must equal the maximum component count");
  double total = 0.0;
  for (double v : out.model_prior) {
    if (!(v > 0.0)) throw UsageError("model prior probabilities must be positive");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("model prior must sum to one");
  return out;
}

double PriorConfig::log_model_prior(int r) const {
  if (r < 1 || r > static_cast<int>(model_prior.size())) return kNegInf;
  return std::log(model_prior[static_cast<std::size_t>(r - 1)]);
}

bool MixtureParams::tau_ordered(double c_tau) const {
  double upper = c_tau;
  for (const auto& c : components) {
    if (!(c.tau > 0.0 && c.tau < upper)) return false;
    upper = c.tau;
  }
  return true;
}

MixtureParams zero_params(int r, Eigen::Index p, Eigen::Index l, double tau) {
  MixtureParams out;
  for (int j = 0; j < r; ++j)
    out.components.push_back({Eigen::VectorXd::Zero(p + 1), Eigen::VectorXd::Zero(l),
                              tau * std::pow(0.5, j)});
  out.delta = Eigen::MatrixXd::Zero(r - 1, p + 1);
  return out;
}

DesignCache::DesignCache(const Dataset& data, const BasisExpansion& expansion)
    : DesignCache(data.linear_design(), expansion.design, data.responses()) {}

DesignCache::DesignCache(Eigen::MatrixXd z_in, Eigen::MatrixXd x_in, Eigen::VectorXi w_in)
    : z(std::move(z_in)), x(std::move(x_in)), w(std::move(w_in)) {
  if (z.rows() != x.rows() || z.rows() != w.size())
    throw UsageError("design matrices disagree on the number of rows");
  gram = x.colwise().squaredNorm().transpose();
  // The conditional draws rely on x'x being diagonal.
  if (x.cols() > 1) {
    const Eigen::MatrixXd xtx = x.transpose() * x;
    for (Eigen::Index a = 0; a < xtx.rows(); ++a)
      for (Eigen::Index b = 0; b < a; ++b)
        if (std::abs(xtx(a, b)) > 1e-8 * std::sqrt(gram[a] * gram[b]) + 1e-300)
          throw NumericalError("spline design columns are not orthogonal");
  }
  ztz = z.transpose() * z;
  ztx = z.transpose() * x;
}

Eigen::VectorXd gating_weights(const Eigen::MatrixXd& delta, const Eigen::VectorXd& z) {
  const Eigen::Index r = delta.rows() + 1;
  Eigen::VectorXd scores(r);
  scores[0] = 0.0;
  if (r > 1) scores.tail(r - 1) = delta * z;
  const double top = scores.maxCoeff();
  Eigen::VectorXd out = (scores.array() - top).exp();
  return out / out.sum();
}

double component_surface(const ComponentParams& comp, const Eigen::VectorXd& z,
                         const Eigen::RowVectorXd& basis_row) {
  double g = comp.alpha.dot(z);
  if (basis_row.size()) g += basis_row.dot(comp.beta);
  return g;
}

double mixture_probability(const MixtureParams& params, const Eigen::VectorXd& z,
                           const Eigen::RowVectorXd& basis_row) {
  const Eigen::VectorXd pi = gating_weights(params.delta, z);
  double h = 0.0;
  for (int j = 0; j < params.r(); ++j)
    h += pi[j] * normal_cdf(component_surface(params.components[static_cast<std::size_t>(j)],
                                              z, basis_row));
  return h;
}

Eigen::MatrixXd component_scores(const MixtureParams& params, const Eigen::MatrixXd& z,
                                 const Eigen::MatrixXd& x) {
  Eigen::MatrixXd g(z.rows(), params.r());
  for (int j = 0; j < params.r(); ++j) {
    const auto& c = params.components[static_cast<std::size_t>(j)];
    g.col(j) = z * c.alpha;
    if (x.cols()) g.col(j) += x * c.beta;
  }
  return g;
}

MixtureParams permute_components(const MixtureParams& params, const std::vector<int>& order) {
  const int r = params.r();
  if (static_cast<int>(order.size()) != r) throw UsageError("permutation has the wrong length");
  MixtureParams out;
  for (int j : order) out.components.push_back(params.components.at(static_cast<std::size_t>(j)));
  const Eigen::Index q = params.delta.cols();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(r, q);
  if (r > 1) full.bottomRows(r - 1) = params.delta;
  Eigen::MatrixXd permuted(r, q);
  for (int j = 0; j < r; ++j) permuted.row(j) = full.row(order[static_cast<std::size_t>(j)]);
  const Eigen::RowVectorXd base = permuted.row(0);
  permuted.rowwise() -= base;
  out.delta = permuted.bottomRows(r - 1);
  return out;
}

std::vector<int> tau_order(const MixtureParams& params) {
  std::vector<int> order(static_cast<std::size_t>(params.r()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return params.components[static_cast<std::size_t>(a)].tau >
           params.components[static_cast<std::size_t>(b)].tau;
  });
  return order;
}

Eigen::MatrixXd gating_matrix(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& z) {
  const Eigen::Index r = delta.rows() + 1;
  Eigen::MatrixXd scores(z.rows(), r);
  scores.col(0).setZero();
  if (r > 1) scores.rightCols(r - 1) = z * delta.transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - top).exp();
    scores.row(i) /= scores.row(i).sum();
  }
  return scores;
}

Eigen::VectorXd mixture_probabilities(const MixtureParams& params, const Eigen::MatrixXd& z,
                                      const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd g = component_scores(params, z, x);
  const Eigen::MatrixXd pi = gating_matrix(params.delta, z);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) h[i] += pi(i, j) * normal_cdf(g(i, j));
  return h;
}

double observed_loglik(const MixtureParams& params, const DesignCache& cache) {
  const Eigen::VectorXd h = mixture_probabilities(params, cache.z, cache.x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double hi = std::clamp(h[i], 1e-300, 1.0 - 1e-16);
    total += cache.w[i] ? std::log(hi) : std::log1p(-hi);
  }
  return total;
}

double observed_loglik(const MixtureParams& params, const Dataset& data,
                       const BasisExpansion& expansion) {
  return observed_loglik(params, DesignCache(data, expansion));
}

double log_tau_prior(const std::vector<double>& taus, double c_tau) {
  double upper = c_tau;
  double total = 0.0;
  for (double t : taus) {
    if (!(t > 0.0 && t < upper)) return kNegInf;
    total -= std::log(upper);
    upper = t;
  }
  return total;
}

double log_prior(const MixtureParams& params, const PriorConfig& prior) {
  std::vector<double> taus;
  double total = 0.0;
  for (const auto& c : params.components) {
    taus.push_back(c.tau);
    total += gaussian_log_density(c.alpha, prior.c_alpha);
    if (c.beta.size() && c.tau > 0.0) total += gaussian_log_density(c.beta, c.tau);
  }
  const double tau_term = log_tau_prior(taus, prior.c_tau);
  if (tau_term == kNegInf) return kNegInf;
  total += tau_term;
  if (params.delta.size()) {
    const Eigen::Map<const Eigen::VectorXd> flat(params.delta.data(), params.delta.size());
    total += gaussian_log_density(flat, prior.c_delta);
  }
  return total;
}

}  // namespace mixprobit
