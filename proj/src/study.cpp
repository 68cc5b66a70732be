#include "mixprobit/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "mixprobit/error.hpp"
#include "mixprobit/format.hpp"
#include "mixprobit/metrics.hpp"
#include "mixprobit/parallel.hpp"
#include "mixprobit/pipeline.hpp"

namespace mixprobit {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

Eigen::MatrixXi hit_matrix(const StudyResult& s, bool mixture) {
  std::vector<const ReplicationResult*> ok;
  for (const auto& r : s.replications)
    if (r.ok) ok.push_back(&r);
  Eigen::MatrixXi hits(static_cast<Eigen::Index>(ok.size()), s.truth.size());
  for (std::size_t k = 0; k < ok.size(); ++k)
    hits.row(static_cast<Eigen::Index>(k)) =
        (mixture ? ok[k]->hits_mixture : ok[k]->hits_single).transpose();
  return hits;
}

}  // namespace

std::vector<double> StudyResult::mean_model_probs() const {
  std::vector<double> mean(static_cast<std::size_t>(max_components), 0.0);
  int count = 0;
  for (const auto& r : replications) {
    if (!r.ok) continue;
    ++count;
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r.model_probs[k];
  }
  for (auto& m : mean) m = count ? m / count : std::numeric_limits<double>::quiet_NaN();
  return mean;
}

double StudyResult::median_askld_difference() const {
  std::vector<double> v;
  for (const auto& r : replications)
    if (r.ok) v.push_back(r.askld_difference());
  return median(v);
}

double StudyResult::median_askld_mixture() const {
  std::vector<double> v;
  for (const auto& r : replications)
    if (r.ok) v.push_back(r.askld_mixture);
  return median(v);
}

double StudyResult::pct_delta_aecp_mixture() const {
  return pct_delta_aecp(hit_matrix(*this, true), level);
}

double StudyResult::pct_delta_aecp_single() const {
  return pct_delta_aecp(hit_matrix(*this, false), level);
}

int StudyResult::succeeded() const {
  return static_cast<int>(std::count_if(replications.begin(), replications.end(),
                                        [](const ReplicationResult& r) { return r.ok; }));
}

StudyResult run_study(const RunConfig& config, int jobs) {
  config.validate();
  StudyResult study;
  study.function = parse_benchmark(config.simulation.function);
  study.max_components = config.prior.max_components;
  study.level = config.level;
  const BenchmarkOptions options{config.simulation.b_negated_exponents};
  const RngStream root(config.seed, 0);
  RngStream design_rng = root.substream(0);
  study.covariates = generate_covariates(study.function, config.simulation.n, design_rng);
  study.truth.resize(study.covariates.rows());
  for (Eigen::Index i = 0; i < study.covariates.rows(); ++i)
    study.truth[i] = true_probability(study.function, study.covariates.row(i).transpose(), options);

  RunConfig mixture = config;
  mixture.chain.jobs = 1;
  RunConfig single = mixture;
  single.prior.max_components = 1;
  single.prior.model_prior = {1.0};

  const auto reps = static_cast<std::size_t>(config.simulation.replications);
  study.replications.resize(reps);
  parallel_for(reps, jobs, [&](std::size_t k) {
    ReplicationResult& rep = study.replications[k];
    rep.replication = static_cast<int>(k) + 1;
    try {
      const RngStream rng = root.substream(100 + k);
      RngStream data_rng = rng.substream(0);
      const Dataset data = simulate_responses(study.function, study.covariates, data_rng, options);
      const FitOutput mix = fit_model(data, mixture, rng.substream(1));
      const FitOutput one = fit_model(data, single, rng.substream(2));
      rep.askld_mixture = askld(study.truth, mix.result.fitted_probs);
      rep.askld_single = askld(study.truth, one.result.fitted_probs);
      rep.ase_mixture = ase(study.truth, mix.result.fitted_probs);
      rep.ase_single = ase(study.truth, one.result.fitted_probs);
      rep.model_probs = mix.result.model_probs;
      rep.hits_mixture = ecp_hits(study.truth, mix.result.interval_low, mix.result.interval_high);
      rep.hits_single = ecp_hits(study.truth, one.result.interval_low, one.result.interval_high);
      rep.ok = true;
    } catch (const std::exception& e) {
      rep.ok = false;
      rep.error = e.what();
      log_warning("replication " + std::to_string(rep.replication) + " failed: " + e.what());
    }
  });
  return study;
}

void write_study_csv(const std::string& path, const StudyResult& study) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const int R = study.max_components;
  out << "replication,status,askld_mixture,askld_single,askld_single_minus_mixture,"
         "ase_mixture,ase_single,coverage_mixture,coverage_single";
  for (int r = 1; r <= R; ++r) out << ",pr_r" << r;
  out << '\n';
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sums(static_cast<std::size_t>(7 + R), 0.0);
  for (const auto& rep : study.replications) {
    std::vector<double> row(sums.size(), nan);
    if (rep.ok) {
      row = {rep.askld_mixture, rep.askld_single, rep.askld_difference(), rep.ase_mixture,
             rep.ase_single, rep.hits_mixture.cast<double>().mean(),
             rep.hits_single.cast<double>().mean()};
      row.insert(row.end(), rep.model_probs.begin(), rep.model_probs.end());
      for (std::size_t k = 0; k < row.size(); ++k) sums[k] += row[k];
    }
    std::string status = rep.ok ? "ok" : "failed: " + rep.error;
    std::replace(status.begin(), status.end(), ',', ';');
    out << rep.replication << ',' << status;
    for (double v : row) out << ',' << format_double(v);
    out << '\n';
  }
  const int ok = study.succeeded();
  out << "summary,ok=" << ok << '/' << study.replications.size();
  for (double s : sums) out << ',' << format_double(ok ? s / ok : nan);
  out << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_coverage_csv(const std::string& path, const StudyResult& study) {
  std::vector<std::string> header;
  for (Eigen::Index k = 0; k < study.covariates.cols(); ++k)
    header.push_back("x" + std::to_string(k + 1));
  header.insert(header.end(), {"true_prob", "ecp_mixture", "ecp_single"});
  const Eigen::Index p = study.covariates.cols();
  Eigen::MatrixXd values(study.truth.size(), p + 3);
  values.leftCols(p) = study.covariates;
  values.col(p) = study.truth;
  if (study.succeeded() > 0) {
    values.col(p + 1) = ecp(hit_matrix(study, true));
    values.col(p + 2) = ecp(hit_matrix(study, false));
  } else {
    values.rightCols(2).setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  write_csv(path, header, values);
}

}  // namespace mixprobit
