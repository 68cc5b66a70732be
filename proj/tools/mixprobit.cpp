// Command-line front end. Talks to the library only through its C interface.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixprobit/mixprobit.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int exit_code(mp_status status) {
  switch (status) {
    case MP_OK: return kOk;
    case MP_ERR_USAGE: return kUsage;
    case MP_ERR_DATA:
    case MP_ERR_IO: return kData;
    default: return kNumerical;
  }
}

struct Failure {
  int code;
};

void check(mp_status status) {
  if (status == MP_OK) return;
  std::cerr << "error: " << mp_last_error() << '\n';
  throw Failure{exit_code(status)};
}

struct ConfigHandle {
  mp_config* ptr = nullptr;
  ~ConfigHandle() { mp_config_destroy(ptr); }
};
struct DatasetHandle {
  mp_dataset* ptr = nullptr;
  ~DatasetHandle() { mp_dataset_destroy(ptr); }
};
struct ModelHandle {
  mp_model* ptr = nullptr;
  ~ModelHandle() { mp_model_destroy(ptr); }
};
struct StudyHandle {
  mp_study* ptr = nullptr;
  ~StudyHandle() { mp_study_destroy(ptr); }
};

struct Options {
  std::string data;
  std::string config;
  std::string out;
  std::string trace;
  std::string model;
  std::string points;
  std::string estimate;
  std::string baseline;
  std::string roc;
  std::string coverage;
  std::optional<std::string> function;
  std::optional<std::uint64_t> seed;
  std::optional<long> n;
  std::optional<int> replications;
  std::optional<int> max_components;
  std::optional<double> level;
  int jobs = 1;
  bool negated = false;
  int verbosity = 1;
};

std::uint64_t resolve_seed(const Options& o, std::uint64_t fallback) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("MIXPROBIT_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      std::cerr << "error: MIXPROBIT_SEED is not a nonnegative integer\n";
      throw Failure{kUsage};
    }
  }
  return fallback;
}

void load_config(const Options& o, ConfigHandle& config) {
  if (o.config.empty())
    check(mp_config_create(&config.ptr));
  else
    check(mp_config_load(o.config.c_str(), &config.ptr));
  double current_seed = 0;
  check(mp_config_get_number(config.ptr, "seed", &current_seed));
  check(mp_config_set_number(config.ptr, "seed",
                             static_cast<double>(resolve_seed(o, static_cast<std::uint64_t>(current_seed)))));
  if (o.level) check(mp_config_set_number(config.ptr, "metrics.level", *o.level));
  if (o.max_components)
    check(mp_config_set_number(config.ptr, "prior.max_components", *o.max_components));
}

int cmd_simulate(const Options& o) {
  const long n = o.n.value_or(1000);
  DatasetHandle data;
  check(mp_dataset_simulate(o.function.value_or("a").c_str(), n, resolve_seed(o, 1), o.negated ? 1 : 0,
                            &data.ptr));
  check(mp_dataset_save_csv(data.ptr, o.out.c_str()));
  return kOk;
}

int cmd_fit(const Options& o) {
  ConfigHandle config;
  load_config(o, config);
  DatasetHandle data;
  check(mp_dataset_load_csv(o.data.c_str(), &data.ptr));
  ModelHandle model;
  mp_fit_report report{};
  check(mp_fit(data.ptr, config.ptr, o.trace.empty() ? nullptr : o.trace.c_str(), &model.ptr,
               &report));
  check(mp_model_save(model.ptr, o.out.c_str()));

  const int r_max = mp_model_max_components(model.ptr);
  std::vector<double> probs(static_cast<std::size_t>(r_max));
  check(mp_model_probabilities(model.ptr, probs.data(), probs.size()));
  std::printf("rows %zu, knots %lld, basis rank %lld, energy ratio %.3g\n",
              mp_dataset_rows(data.ptr), static_cast<long long>(report.knots),
              static_cast<long long>(report.rank), report.energy_ratio);
  std::printf("retained draws %lld\n", static_cast<long long>(report.draws));
  std::printf("between-model acceptance %.4f\n", report.rj_acceptance);
  std::printf("gating acceptance %.4f\n", report.delta_acceptance);
  for (int r = 0; r < r_max; ++r) std::printf("Pr(r=%d|w) %.4f\n", r + 1, probs[static_cast<std::size_t>(r)]);
  std::printf("wall time %.2f s\n", report.seconds);
  return kOk;
}

int cmd_predict(const Options& o) {
  ModelHandle model;
  check(mp_model_load(o.model.c_str(), &model.ptr));
  check(mp_model_predict_csv(model.ptr, o.data.c_str(), o.out.c_str()));
  return kOk;
}

int cmd_evaluate(const Options& o) {
  mp_evaluation result{};
  check(mp_evaluate_csv(o.data.c_str(), o.estimate.c_str(),
                        o.baseline.empty() ? nullptr : o.baseline.c_str(), o.level.value_or(0.9),
                        o.out.c_str(), o.roc.empty() ? nullptr : o.roc.c_str(), &result));
  return kOk;
}

int cmd_study(const Options& o) {
  ConfigHandle config;
  load_config(o, config);
  if (o.function) check(mp_config_set_string(config.ptr, "simulation.function", o.function->c_str()));
  if (o.n) check(mp_config_set_number(config.ptr, "simulation.n", static_cast<double>(*o.n)));
  if (o.replications)
    check(mp_config_set_number(config.ptr, "simulation.replications", *o.replications));
  if (o.negated) check(mp_config_set_number(config.ptr, "simulation.b_negated_exponents", 1));
  StudyHandle study;
  check(mp_study_run(config.ptr, o.jobs, &study.ptr));
  check(mp_study_write(study.ptr, o.out.c_str(), o.coverage.empty() ? nullptr : o.coverage.c_str()));

  double r_max = 0;
  check(mp_config_get_number(config.ptr, "prior.max_components", &r_max));
  std::vector<double> probs(static_cast<std::size_t>(r_max));
  check(mp_study_model_probs(study.ptr, probs.data(), probs.size()));
  double reps = 0;
  check(mp_config_get_number(config.ptr, "simulation.replications", &reps));
  std::printf("replications succeeded %d/%d\n", mp_study_succeeded(study.ptr), static_cast<int>(reps));
  for (std::size_t r = 0; r < probs.size(); ++r)
    std::printf("mean Pr(r=%zu|w) %.4f\n", r + 1, probs[r]);
  return mp_study_succeeded(study.ptr) > 0 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian binary regression with reversible-jump mixtures of probit spline experts"};
  app.require_subcommand(1);
  Options o;
  app.add_option("-v,--verbosity", o.verbosity, "0 quiet, 1 warnings, 2 progress")
      ->check(CLI::Range(0, 2));

  auto* simulate = app.add_subcommand("simulate", "Draw a dataset from a benchmark function");
  simulate->add_option("--function", o.function, "Benchmark a, b, c or d")->required();
  simulate->add_option("--n", o.n, "Number of rows")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed, "Random seed (fallback: MIXPROBIT_SEED)");
  simulate->add_option("--out", o.out, "Output CSV")->required();
  simulate->add_flag("--negated-peak", o.negated, "Gaussian bumps for function b");

  auto* fit = app.add_subcommand("fit", "Fit the mixture model and write an archive");
  fit->add_option("--data", o.data, "Training CSV (last column or 'w' is the response)")
      ->required();
  fit->add_option("--config", o.config, "JSON configuration");
  fit->add_option("--out", o.out, "Model archive to write")->required();
  fit->add_option("--seed", o.seed, "Random seed (fallback: MIXPROBIT_SEED)");
  fit->add_option("--trace", o.trace, "Write one JSON record per retained draw");
  fit->add_option("--level", o.level, "Interval level");
  fit->add_option("--max-components", o.max_components, "Largest number of experts R");

  auto* predict = app.add_subcommand("predict", "Predict probabilities at new points");
  predict->add_option("--model", o.model, "Model archive")->required();
  predict->add_option("--data", o.data, "Points CSV")->required();
  predict->add_option("--out", o.out, "Output CSV with prob,low,high")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score an estimate against the truth");
  evaluate->add_option("--data", o.data, "CSV with true_prob (and optionally w)")->required();
  evaluate->add_option("--estimate", o.estimate, "CSV with prob,low,high")->required();
  evaluate->add_option("--baseline", o.baseline, "Competing estimate for %dASE");
  evaluate->add_option("--level", o.level, "Nominal interval level");
  evaluate->add_option("--out", o.out, "Metrics CSV")->required();
  evaluate->add_option("--roc", o.roc, "ROC points CSV");

  auto* study = app.add_subcommand("study", "Run a replicated simulation study");
  study->add_option("--config", o.config, "JSON configuration");
  study->add_option("--function", o.function, "Benchmark a, b, c or d");
  study->add_option("--n", o.n, "Rows per replication")->check(CLI::PositiveNumber);
  study->add_option("--replications", o.replications, "Number of replications")
      ->check(CLI::PositiveNumber);
  study->add_option("--seed", o.seed, "Random seed (fallback: MIXPROBIT_SEED)");
  study->add_option("--jobs", o.jobs, "Replications run concurrently")->check(CLI::PositiveNumber);
  study->add_option("--level", o.level, "Interval level");
  study->add_option("--max-components", o.max_components, "Largest number of experts R");
  study->add_option("--out", o.out, "Per-replication CSV")->required();
  study->add_option("--coverage", o.coverage, "Per-point coverage CSV");
  study->add_flag("--negated-peak", o.negated, "Gaussian bumps for function b");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  mp_set_log_level(o.verbosity);

  try {
    if (*simulate) return cmd_simulate(o);
    if (*fit) return cmd_fit(o);
    if (*predict) return cmd_predict(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*study) return cmd_study(o);
  } catch (const Failure& f) {
    return f.code;
  }
  return kUsage;
}
