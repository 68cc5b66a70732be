#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "mixprobit/basis.hpp"
#include "mixprobit/model.hpp"
#include "mixprobit/rjmcmc.hpp"

namespace mixprobit {

struct SimulationSettings {
  std::string function = "a";
  long n = 1000;
  int replications = 50;
  bool b_negated_exponents = false;
};

struct RunConfig {
  PriorConfig prior;
  BasisOptions basis;
  ChainConfig chain;
  std::uint64_t seed = 1;
  double level = 0.9;
  SimulationSettings simulation;

  void validate() const;
};

// Nested key/value layout with sections prior, basis, chain, metrics and
// simulation. Unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);

}  // namespace mixprobit
