#include "mixprobit/config.hpp"

#include <fstream>
#include <set>

#include "mixprobit/error.hpp"

namespace mixprobit {

namespace {

void reject_unknown(const nlohmann::json& section, const std::string& where,
                    std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (auto it = section.begin(); it != section.end(); ++it)
    if (!allowed.count(it.key()))
      throw UsageError("unknown config key '" + where + "." + it.key() + "'");
}

template <class T>
void read(const nlohmann::json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  chain.validate();
  if (!(level > 0.0 && level < 1.0)) throw UsageError("interval level must lie in (0, 1)");
  if (!(basis.epsilon > 0.0 && basis.epsilon <= 1.0))
    throw UsageError("basis epsilon must lie in (0, 1]");
  if (basis.max_rank < 1) throw UsageError("basis l_max must be at least 1");
  if (prior.max_components < 1) throw UsageError("max_components must be at least 1");
  if (simulation.n < 2) throw UsageError("simulation n must be at least 2");
  if (simulation.replications < 1) throw UsageError("replications must be positive");
  if (chain.sampler.slice_steps < 1) throw UsageError("slice_steps must be at least 1");
  if (chain.sampler.delta_walk_steps < 0) throw UsageError("delta_walk_steps must be nonnegative");
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    reject_unknown(j, "config", {"prior", "basis", "chain", "metrics", "simulation", "seed"});
    read(j, "seed", c.seed);
    if (j.contains("prior")) {
      const auto& s = j.at("prior");
      reject_unknown(s, "prior",
                     {"c_alpha", "c_tau", "c_delta", "max_components", "model_prior"});
      read(s, "c_alpha", c.prior.c_alpha);
      read(s, "c_tau", c.prior.c_tau);
      read(s, "c_delta", c.prior.c_delta);
      read(s, "max_components", c.prior.max_components);
      read(s, "model_prior", c.prior.model_prior);
    }
    if (j.contains("basis")) {
      const auto& s = j.at("basis");
      reject_unknown(s, "basis", {"epsilon", "l_max"});
      read(s, "epsilon", c.basis.epsilon);
      read(s, "l_max", c.basis.max_rank);
    }
    if (j.contains("chain")) {
      const auto& s = j.at("chain");
      reject_unknown(s, "chain",
                     {"pilot_burnin", "pilot_length", "warmup", "sampling", "thin", "jobs",
                      "slice_steps", "collapse_unassigned", "delta_walk_steps"});
      read(s, "pilot_burnin", c.chain.pilot_burnin);
      read(s, "pilot_length", c.chain.pilot_length);
      read(s, "warmup", c.chain.warmup);
      read(s, "sampling", c.chain.sampling);
      read(s, "thin", c.chain.thin);
      read(s, "jobs", c.chain.jobs);
      read(s, "slice_steps", c.chain.sampler.slice_steps);
      read(s, "collapse_unassigned", c.chain.sampler.collapse_unassigned);
      read(s, "delta_walk_steps", c.chain.sampler.delta_walk_steps);
    }
    if (j.contains("metrics")) {
      const auto& s = j.at("metrics");
      reject_unknown(s, "metrics", {"level"});
      read(s, "level", c.level);
    }
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      reject_unknown(s, "simulation", {"function", "n", "replications", "b_negated_exponents"});
      read(s, "function", c.simulation.function);
      read(s, "n", c.simulation.n);
      read(s, "replications", c.simulation.replications);
      read(s, "b_negated_exponents", c.simulation.b_negated_exponents);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  return {
      {"seed", c.seed},
      {"prior",
       {{"c_alpha", c.prior.c_alpha},
        {"c_tau", c.prior.c_tau},
        {"c_delta", c.prior.c_delta},
        {"max_components", c.prior.max_components},
        {"model_prior", c.prior.model_prior}}},
      {"basis", {{"epsilon", c.basis.epsilon}, {"l_max", c.basis.max_rank}}},
      {"chain",
       {{"pilot_burnin", c.chain.pilot_burnin},
        {"pilot_length", c.chain.pilot_length},
        {"warmup", c.chain.warmup},
        {"sampling", c.chain.sampling},
        {"thin", c.chain.thin},
        {"jobs", c.chain.jobs},
        {"slice_steps", c.chain.sampler.slice_steps},
        {"collapse_unassigned", c.chain.sampler.collapse_unassigned},
        {"delta_walk_steps", c.chain.sampler.delta_walk_steps}}},
      {"metrics", {{"level", c.level}}},
      {"simulation",
       {{"function", c.simulation.function},
        {"n", c.simulation.n},
        {"replications", c.simulation.replications},
        {"b_negated_exponents", c.simulation.b_negated_exponents}}},
  };
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + path + "' is not valid: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace mixprobit
