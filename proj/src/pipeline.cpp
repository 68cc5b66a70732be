#include "mixprobit/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "mixprobit/error.hpp"

namespace mixprobit {

namespace {

template <class Vec>
nlohmann::json vec_json(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd json_matrix(const nlohmann::json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto row = j.at(i).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError("archive matrix row has the wrong length");
    for (Eigen::Index k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)];
  }
  return m;
}

}  // namespace

FitOutput fit_model(const Dataset& data, const RunConfig& config, const RngStream& rng,
                    const std::function<void(const TraceDraw&)>& on_draw) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const PriorConfig prior = config.prior.resolved(data.size());
  const BasisExpansion basis = build_basis(data, config.basis);
  const DesignCache cache(data, basis);

  const PilotSummary pilots = run_pilots(cache, prior, config.chain, rng.substream(1));
  const ChainTrace trace = run_chain(cache, prior, pilots, config.chain, rng.substream(2), on_draw);

  FitOutput out;
  out.result = summarize(trace, data, basis, prior.max_components, config.level);
  auto& rep = out.report;
  rep.rj_acceptance = trace.rj_attempts ? static_cast<double>(trace.rj_accepts) / trace.rj_attempts : 0.0;
  rep.delta_acceptance =
      trace.delta_attempts ? static_cast<double>(trace.delta_accepts) / trace.delta_attempts : 0.0;
  for (const auto& m : pilots.models) rep.pilot_delta_acceptance.push_back(m.delta_acceptance);
  rep.knots = basis.knot_count();
  rep.rank = basis.rank();
  rep.energy_ratio = basis.energy_ratio;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

nlohmann::json archive_to_json(const FitResult& r) {
  const auto& a = r.archive;
  nlohmann::json draws = nlohmann::json::array();
  for (const auto& d : a.draws) draws.push_back(params_to_json(d));
  return {
      {"format", kArchiveFormat},
      {"version", kArchiveVersion},
      {"normalization", {{"min", vec_json(a.bounds.column_min)}, {"max", vec_json(a.bounds.column_max)}}},
      {"basis",
       {{"epsilon", a.basis.epsilon},
        {"exponent", a.basis.exponent},
        {"energy_ratio", a.basis.energy_ratio},
        {"knots", matrix_json(a.basis.knots)},
        {"right_factor", matrix_json(a.basis.right_factor)},
        {"singular_values", vec_json(a.basis.singular_values)}}},
      {"max_components", a.max_components},
      {"level", r.level},
      {"draw_count", r.draw_count},
      {"model_probs", r.model_probs},
      {"fitted", {{"prob", vec_json(r.fitted_probs)}, {"low", vec_json(r.interval_low)}, {"high", vec_json(r.interval_high)}}},
      {"draws", draws},
  };
}

FitResult archive_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kArchiveFormat)
      throw DataError("not a mixprobit model archive");
    const int version = j.at("version").get<int>();
    if (version != kArchiveVersion)
      throw DataError("archive version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kArchiveVersion) + ")");
    FitResult r;
    auto& a = r.archive;
    a.bounds.column_min = json_vec(j.at("normalization").at("min"));
    a.bounds.column_max = json_vec(j.at("normalization").at("max"));
    const Eigen::Index p = a.bounds.dimension();
    const auto& b = j.at("basis");
    a.basis.epsilon = b.at("epsilon").get<double>();
    a.basis.exponent = b.at("exponent").get<int>();
    a.basis.energy_ratio = b.at("energy_ratio").get<double>();
    a.basis.knots = json_matrix(b.at("knots"), p);
    a.basis.singular_values = json_vec(b.at("singular_values"));
    const auto& rf = b.at("right_factor");
    const Eigen::Index l = rf.empty() ? 0 : static_cast<Eigen::Index>(rf.at(0).size());
    a.basis.right_factor = json_matrix(rf, l);
    if (a.basis.right_factor.rows() != a.basis.knots.rows() && l > 0)
      throw DataError("archive right factor does not match the knot count");
    a.basis.design.resize(0, l);
    a.max_components = j.at("max_components").get<int>();
    for (const auto& d : j.at("draws")) a.draws.push_back(params_from_json(d));
    r.level = j.at("level").get<double>();
    r.draw_count = j.at("draw_count").get<long>();
    r.model_probs = j.at("model_probs").get<std::vector<double>>();
    r.fitted_probs = json_vec(j.at("fitted").at("prob"));
    r.interval_low = json_vec(j.at("fitted").at("low"));
    r.interval_high = json_vec(j.at("fitted").at("high"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model archive: ") + e.what());
  }
}

void save_archive(const std::string& path, const FitResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << archive_to_json(result).dump(1) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

FitResult load_archive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open archive '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("archive '" + path + "' is not valid: " + e.what());
  }
  return archive_from_json(j);
}

nlohmann::json trace_record(const TraceDraw& draw) {
  nlohmann::json j = params_to_json(draw.params);
  j["iteration"] = draw.iteration;
  j["loglik"] = draw.loglik;
  return j;
}

}  // namespace mixprobit
