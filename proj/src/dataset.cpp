#include "mixprobit/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mixprobit/error.hpp"
#include "mixprobit/format.hpp"

namespace mixprobit {

Eigen::MatrixXd Normalization::apply(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != dimension())
    throw DataError("expected " + std::to_string(dimension()) +
                    " covariate columns, got " + std::to_string(raw.cols()));
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index k = 0; k < raw.cols(); ++k) {
    const double span = column_max[k] - column_min[k];
    out.col(k) = (raw.col(k).array() - column_min[k]) / span;
  }
  return out;
}

Eigen::VectorXd Normalization::apply_point(const Eigen::VectorXd& raw) const {
  if (raw.size() != dimension())
    throw DataError("point has " + std::to_string(raw.size()) +
                    " coordinates, expected " + std::to_string(dimension()));
  return ((raw - column_min).array() / (column_max - column_min).array()).matrix();
}

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::VectorXi responses,
                 std::vector<std::string> names)
    : covariates_(std::move(covariates)),
      responses_(std::move(responses)),
      names_(std::move(names)) {
  const Eigen::Index n = covariates_.rows();
  const Eigen::Index p = covariates_.cols();
  if (n < 1 || p < 1) throw DataError("dataset needs at least one row and one covariate");
  if (responses_.size() != n)
    throw DataError("response count does not match covariate rows");
  if (names_.empty())
    for (Eigen::Index k = 0; k < p; ++k) names_.push_back("x" + std::to_string(k + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    if (responses_[i] != 0 && responses_[i] != 1)
      throw DataError("response at row " + std::to_string(i + 1) + " is not 0 or 1");
  bounds_.column_min = covariates_.colwise().minCoeff().transpose();
  bounds_.column_max = covariates_.colwise().maxCoeff().transpose();
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!std::isfinite(bounds_.column_min[k]) || !std::isfinite(bounds_.column_max[k]))
      throw DataError("covariate column '" + names_[static_cast<std::size_t>(k)] +
                      "' contains non-finite values");
    if (!(bounds_.column_max[k] > bounds_.column_min[k]))
      throw DataError("covariate column '" + names_[static_cast<std::size_t>(k)] +
                      "' is constant");
  }
}

void Dataset::set_true_probabilities(Eigen::VectorXd truth) {
  if (truth.size() != size()) throw DataError("truth length does not match dataset");
  true_prob_ = std::move(truth);
}

Eigen::MatrixXd Dataset::linear_design() const {
  Eigen::MatrixXd z(size(), dimension() + 1);
  z.col(0).setOnes();
  z.rightCols(dimension()) = normalized();
  return z;
}

Eigen::MatrixXd normalize_covariates(const Dataset& data) { return data.normalized(); }

int CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return static_cast<int>(k);
  return -1;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || errno == ERANGE)
        throw DataError(path + ":" + std::to_string(line_no) + ": malformed number '" +
                        f + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw DataError(path + ": empty file");
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index k = 0; k < values.cols(); ++k)
      out << (k ? "," : "") << format_double(values(i, k));
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

Dataset load_dataset(const std::string& path) {
  CsvTable table = read_csv(path);
  int w_col = table.column("w");
  if (w_col < 0) w_col = static_cast<int>(table.header.size()) - 1;
  const int truth_col = table.column("true_prob");
  std::vector<int> cov_cols;
  std::vector<std::string> names;
  for (int k = 0; k < static_cast<int>(table.header.size()); ++k) {
    if (k == w_col || k == truth_col) continue;
    cov_cols.push_back(k);
    names.push_back(table.header[static_cast<std::size_t>(k)]);
  }
  if (cov_cols.empty()) throw DataError(path + ": no covariate columns");
  const Eigen::Index n = table.values.rows();
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cov_cols.size()));
  Eigen::VectorXi w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cov_cols.size(); ++k)
      x(i, static_cast<Eigen::Index>(k)) = table.values(i, cov_cols[k]);
    const double wi = table.values(i, w_col);
    if (wi != 0.0 && wi != 1.0)
      throw DataError(path + ":" + std::to_string(i + 2) + ": response " +
                      format_double(wi) + " is not 0 or 1");
    w[i] = static_cast<int>(wi);
  }
  Dataset data(std::move(x), std::move(w), std::move(names));
  if (truth_col >= 0) data.set_true_probabilities(table.values.col(truth_col));
  return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::vector<std::string> header = data.names();
  header.push_back("w");
  const Eigen::Index p = data.dimension();
  Eigen::MatrixXd values(data.size(), p + 1 + (data.has_truth() ? 1 : 0));
  values.leftCols(p) = data.covariates();
  values.col(p) = data.responses().cast<double>();
  if (data.has_truth()) {
    header.push_back("true_prob");
    values.col(p + 1) = data.true_probabilities();
  }
  write_csv(path, header, values);
}

Eigen::MatrixXd load_points(const std::string& path) {
  CsvTable table = read_csv(path);
  std::vector<Eigen::Index> keep;
  for (std::size_t k = 0; k < table.header.size(); ++k)
    if (table.header[k] != "w" && table.header[k] != "true_prob")
      keep.push_back(static_cast<Eigen::Index>(k));
  Eigen::MatrixXd out(table.values.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = table.values.col(keep[k]);
  return out;
}

}  // namespace mixprobit
