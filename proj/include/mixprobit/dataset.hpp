#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mixprobit {

// Affine map of each covariate onto [0, 1] using training bounds. Points
// outside the training range map outside [0, 1]; they are not clipped.
struct Normalization {
  Eigen::VectorXd column_min;
  Eigen::VectorXd column_max;

  Eigen::Index dimension() const { return column_min.size(); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
  Eigen::VectorXd apply_point(const Eigen::VectorXd& raw) const;
};

// Covariates with binary responses. Optionally carries the generating
// probabilities when the data were simulated.
class Dataset {
 public:
  Dataset() = default;
  // Validates responses and computes normalization bounds. Throws DataError
  // on a constant covariate (naming the column) or a non-binary response.
  Dataset(Eigen::MatrixXd covariates, Eigen::VectorXi responses,
          std::vector<std::string> names = {});

  Eigen::Index size() const { return covariates_.rows(); }
  Eigen::Index dimension() const { return covariates_.cols(); }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXi& responses() const { return responses_; }
  const Normalization& normalization() const { return bounds_; }
  const std::vector<std::string>& names() const { return names_; }

  bool has_truth() const { return true_prob_.size() == size(); }
  const Eigen::VectorXd& true_probabilities() const { return true_prob_; }
  void set_true_probabilities(Eigen::VectorXd truth);

  Eigen::MatrixXd normalized() const { return bounds_.apply(covariates_); }
  // n x (p+1) matrix with rows (1, x_i') in normalized units.
  Eigen::MatrixXd linear_design() const;

 private:
  Eigen::MatrixXd covariates_;
  Eigen::VectorXi responses_;
  Normalization bounds_;
  std::vector<std::string> names_;
  Eigen::VectorXd true_prob_;
};

// Normalizes each column with its own min and max.
Eigen::MatrixXd normalize_covariates(const Dataset& data);

// Parsed CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

// Loads a dataset. The response is the column named "w", or the final
// column when no such header exists; a "true_prob" column is kept as truth.
Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& data);

// Covariate-only matrix; drops "w" and "true_prob" columns if present.
Eigen::MatrixXd load_points(const std::string& path);

}  // namespace mixprobit
