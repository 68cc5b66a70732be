#pragma once

#include <functional>
#include <string>

#include "mixprobit/config.hpp"
#include "mixprobit/dataset.hpp"
#include "mixprobit/inference.hpp"
#include "mixprobit/rjmcmc.hpp"

namespace mixprobit {

struct FitReport {
  double rj_acceptance = 0.0;
  double delta_acceptance = 0.0;
  std::vector<double> pilot_delta_acceptance;
  double seconds = 0.0;
  Eigen::Index knots = 0;
  Eigen::Index rank = 0;
  double energy_ratio = 0.0;
};

struct FitOutput {
  FitResult result;
  FitReport report;
};

// basis -> pilots -> reversible-jump chain -> posterior summary.
FitOutput fit_model(const Dataset& data, const RunConfig& config, const RngStream& rng,
                    const std::function<void(const TraceDraw&)>& on_draw = {});

// Versioned structured-text model archive.
inline constexpr const char* kArchiveFormat = "mixprobit-archive";
inline constexpr int kArchiveVersion = 1;

nlohmann::json archive_to_json(const FitResult& result);
FitResult archive_from_json(const nlohmann::json& j);
void save_archive(const std::string& path, const FitResult& result);
FitResult load_archive(const std::string& path);

// One newline-delimited record per retained draw.
nlohmann::json trace_record(const TraceDraw& draw);

}  // namespace mixprobit
