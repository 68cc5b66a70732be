#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixprobit/basis.hpp"
#include "mixprobit/dataset.hpp"
#include "mixprobit/model.hpp"
#include "mixprobit/rjmcmc.hpp"

namespace mixprobit {

// Everything needed to evaluate the fitted surface at new points.
struct ModelArchive {
  Normalization bounds;
  BasisExpansion basis;  // design matrix is not needed for prediction
  std::vector<MixtureParams> draws;
  int max_components = 1;
};

struct FitResult {
  std::vector<double> model_probs;
  Eigen::VectorXd fitted_probs;
  Eigen::VectorXd interval_low;
  Eigen::VectorXd interval_high;
  double level = 0.9;
  long draw_count = 0;
  ModelArchive archive;
};

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd low;
  Eigen::VectorXd high;
};

// Linear interpolation between order statistics of an ascending sample.
double sorted_quantile(const std::vector<double>& sorted, double prob);

// Posterior mean and pointwise equal-tailed intervals of an S x n matrix of
// per-draw surfaces.
Prediction summarize_surfaces(const Eigen::MatrixXd& surfaces, double level);

FitResult summarize(const ChainTrace& trace, const Dataset& data,
                    const BasisExpansion& expansion, int max_components, double level = 0.9);

// Per-draw surfaces (S x m) at raw-unit points.
Eigen::MatrixXd draw_surfaces(const ModelArchive& archive, const Eigen::MatrixXd& points);

Prediction predict(const FitResult& result, const Eigen::MatrixXd& points);

}  // namespace mixprobit
