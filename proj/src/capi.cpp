#include "mixprobit/mixprobit.h"

#include <cmath>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "mixprobit/config.hpp"
#include "mixprobit/dataset.hpp"
#include "mixprobit/error.hpp"
#include "mixprobit/evaluate.hpp"
#include "mixprobit/format.hpp"
#include "mixprobit/metrics.hpp"
#include "mixprobit/pipeline.hpp"
#include "mixprobit/simgen.hpp"
#include "mixprobit/study.hpp"

struct mp_config {
  mixprobit::RunConfig value;
};
struct mp_dataset {
  mixprobit::Dataset value;
};
struct mp_model {
  mixprobit::FitResult value;
};
struct mp_study {
  mixprobit::StudyResult value;
};

namespace {

thread_local std::string last_error;

mp_status fail(mp_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
mp_status guarded(F&& body) {
  try {
    body();
    return MP_OK;
  } catch (const mixprobit::UsageError& e) {
    return fail(MP_ERR_USAGE, e.what());
  } catch (const mixprobit::DataError& e) {
    return fail(MP_ERR_DATA, e.what());
  } catch (const mixprobit::NumericalError& e) {
    return fail(MP_ERR_NUMERICAL, e.what());
  } catch (const mixprobit::IoError& e) {
    return fail(MP_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MP_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw mixprobit::UsageError(std::string(what) + " must not be null");
}

nlohmann::json::json_pointer key_pointer(const char* key) {
  require(key, "key");
  std::string path = "/";
  for (const char* c = key; *c; ++c) path += (*c == '.') ? '/' : *c;
  return nlohmann::json::json_pointer(path);
}

void set_config_value(mp_config* config, const char* key, const nlohmann::json& value) {
  require(config, "config");
  nlohmann::json j = mixprobit::config_to_json(config->value);
  const auto ptr = key_pointer(key);
  if (!j.contains(ptr)) throw mixprobit::UsageError(std::string("unknown config key '") + key + "'");
  j[ptr] = value;
  config->value = mixprobit::config_from_json(j);
}

}  // namespace

extern "C" {

const char* mp_last_error(void) { return last_error.c_str(); }

const char* mp_version(void) { return "1.0.0"; }

void mp_set_log_level(int level) {
  if (level <= 0)
    mixprobit::set_log_level(mixprobit::LogLevel::kQuiet);
  else if (level == 1)
    mixprobit::set_log_level(mixprobit::LogLevel::kWarning);
  else
    mixprobit::set_log_level(mixprobit::LogLevel::kInfo);
}

mp_status mp_config_create(mp_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new mp_config{};
  });
}

mp_status mp_config_load(const char* path, mp_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto config = std::make_unique<mp_config>();
    config->value = mixprobit::load_config(path);
    *out = config.release();
  });
}

mp_status mp_config_set_number(mp_config* config, const char* key, double value) {
  return guarded([&] {
    const nlohmann::json current =
        mixprobit::config_to_json(config ? config->value : mixprobit::RunConfig{});
    const auto ptr = key_pointer(key);
    nlohmann::json v = value;
    if (current.contains(ptr)) {
      const auto& old = current.at(ptr);
      if (old.is_boolean()) {
        v = value != 0.0;
      } else if (old.is_number_integer()) {
        if (value != std::floor(value))
          throw mixprobit::UsageError(std::string("config key '") + key + "' needs an integer");
        if (old.is_number_unsigned()) {
          if (value < 0) throw mixprobit::UsageError(std::string("config key '") + key + "' must be nonnegative");
          v = static_cast<std::uint64_t>(value);
        } else {
          v = static_cast<std::int64_t>(value);
        }
      }
    }
    set_config_value(config, key, v);
  });
}

mp_status mp_config_set_string(mp_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(value, "value");
    set_config_value(config, key, std::string(value));
  });
}

mp_status mp_config_get_number(const mp_config* config, const char* key, double* value) {
  return guarded([&] {
    require(config, "config");
    require(value, "value");
    const nlohmann::json j = mixprobit::config_to_json(config->value);
    const auto ptr = key_pointer(key);
    if (!j.contains(ptr) || !(j.at(ptr).is_number() || j.at(ptr).is_boolean()))
      throw mixprobit::UsageError(std::string("no numeric config key '") + key + "'");
    const auto& v = j.at(ptr);
    *value = v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.get<double>();
  });
}

mp_status mp_config_save(const mp_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    std::ofstream out(path);
    if (!out) throw mixprobit::IoError(std::string("cannot write '") + path + "'");
    out << mixprobit::config_to_json(config->value).dump(2) << '\n';
  });
}

void mp_config_destroy(mp_config* config) { delete config; }

mp_status mp_dataset_load_csv(const char* path, mp_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto data = std::make_unique<mp_dataset>();
    data->value = mixprobit::load_dataset(path);
    *out = data.release();
  });
}

mp_status mp_dataset_simulate(const char* function, int64_t n, uint64_t seed, int negated_peak,
                              mp_dataset** out) {
  return guarded([&] {
    require(function, "function");
    require(out, "out");
    if (n < 2) throw mixprobit::UsageError("n must be at least 2");
    const mixprobit::Benchmark b = mixprobit::parse_benchmark(function);
    mixprobit::RngStream rng(seed, 0);
    mixprobit::BenchmarkOptions options;
    options.b_negated_exponents = negated_peak != 0;
    auto data = std::make_unique<mp_dataset>();
    data->value = mixprobit::generate(b, n, rng, mixprobit::CovariateDesign::kUniform, options);
    *out = data.release();
  });
}

mp_status mp_dataset_save_csv(const mp_dataset* data, const char* path) {
  return guarded([&] {
    require(data, "data");
    require(path, "path");
    mixprobit::save_dataset(path, data->value);
  });
}

size_t mp_dataset_rows(const mp_dataset* data) {
  return data ? static_cast<size_t>(data->value.size()) : 0;
}

size_t mp_dataset_cols(const mp_dataset* data) {
  return data ? static_cast<size_t>(data->value.dimension()) : 0;
}

void mp_dataset_destroy(mp_dataset* data) { delete data; }

mp_status mp_fit(const mp_dataset* data, const mp_config* config, const char* trace_path,
                 mp_model** out, mp_fit_report* report) {
  return guarded([&] {
    require(data, "data");
    require(config, "config");
    require(out, "out");
    std::ofstream trace;
    std::function<void(const mixprobit::TraceDraw&)> on_draw;
    if (trace_path) {
      trace.open(trace_path);
      if (!trace) throw mixprobit::IoError(std::string("cannot write '") + trace_path + "'");
      on_draw = [&trace](const mixprobit::TraceDraw& draw) {
        trace << mixprobit::trace_record(draw).dump() << '\n';
      };
    }
    const mixprobit::RngStream rng(config->value.seed, 0);
    mixprobit::FitOutput fit = mixprobit::fit_model(data->value, config->value, rng, on_draw);
    if (trace_path && !trace)
      throw mixprobit::IoError(std::string("failed writing '") + trace_path + "'");
    if (report) {
      report->rj_acceptance = fit.report.rj_acceptance;
      report->delta_acceptance = fit.report.delta_acceptance;
      report->seconds = fit.report.seconds;
      report->knots = fit.report.knots;
      report->rank = fit.report.rank;
      report->energy_ratio = fit.report.energy_ratio;
      report->draws = fit.result.draw_count;
    }
    *out = new mp_model{std::move(fit.result)};
  });
}

mp_status mp_model_save(const mp_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    mixprobit::save_archive(path, model->value);
  });
}

mp_status mp_model_load(const char* path, mp_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new mp_model{mixprobit::load_archive(path)};
  });
}

int mp_model_max_components(const mp_model* model) {
  return model ? model->value.archive.max_components : 0;
}

size_t mp_model_dimension(const mp_model* model) {
  return model ? static_cast<size_t>(model->value.archive.bounds.dimension()) : 0;
}

size_t mp_model_training_rows(const mp_model* model) {
  return model ? static_cast<size_t>(model->value.fitted_probs.size()) : 0;
}

mp_status mp_model_probabilities(const mp_model* model, double* out, size_t len) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto& probs = model->value.model_probs;
    if (len < probs.size()) throw mixprobit::UsageError("output buffer too small");
    for (size_t i = 0; i < probs.size(); ++i) out[i] = probs[i];
  });
}

mp_status mp_model_fitted(const mp_model* model, double* prob, double* low, double* high,
                          size_t len) {
  return guarded([&] {
    require(model, "model");
    const auto& r = model->value;
    const auto n = static_cast<size_t>(r.fitted_probs.size());
    if (len < n) throw mixprobit::UsageError("output buffer too small");
    for (size_t i = 0; i < n; ++i) {
      if (prob) prob[i] = r.fitted_probs[i];
      if (low) low[i] = r.interval_low[i];
      if (high) high[i] = r.interval_high[i];
    }
  });
}

mp_status mp_model_predict(const mp_model* model, const double* points, size_t rows, size_t cols,
                           double* prob, double* low, double* high) {
  return guarded([&] {
    require(model, "model");
    require(points, "points");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        x(points, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const mixprobit::Prediction p = mixprobit::predict(model->value, x);
    for (size_t i = 0; i < rows; ++i) {
      if (prob) prob[i] = p.mean[i];
      if (low) low[i] = p.low[i];
      if (high) high[i] = p.high[i];
    }
  });
}

mp_status mp_model_predict_csv(const mp_model* model, const char* points_path,
                               const char* out_path) {
  return guarded([&] {
    require(model, "model");
    require(points_path, "points_path");
    require(out_path, "out_path");
    const Eigen::MatrixXd points = mixprobit::load_points(points_path);
    const mixprobit::Prediction p = mixprobit::predict(model->value, points);
    Eigen::MatrixXd table(points.rows(), 3);
    table << p.mean, p.low, p.high;
    mixprobit::write_csv(out_path, {"prob", "low", "high"}, table);
  });
}

void mp_model_destroy(mp_model* model) { delete model; }

mp_status mp_askld(const double* truth, const double* estimate, size_t n, double* out) {
  return guarded([&] {
    require(truth, "truth");
    require(estimate, "estimate");
    require(out, "out");
    const auto len = static_cast<Eigen::Index>(n);
    *out = mixprobit::askld(Eigen::Map<const Eigen::VectorXd>(truth, len),
                            Eigen::Map<const Eigen::VectorXd>(estimate, len));
  });
}

mp_status mp_ase(const double* truth, const double* estimate, size_t n, double* out) {
  return guarded([&] {
    require(truth, "truth");
    require(estimate, "estimate");
    require(out, "out");
    const auto len = static_cast<Eigen::Index>(n);
    *out = mixprobit::ase(Eigen::Map<const Eigen::VectorXd>(truth, len),
                          Eigen::Map<const Eigen::VectorXd>(estimate, len));
  });
}

mp_status mp_pct_delta_ase(double ase_other, double ase_self, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = mixprobit::pct_delta_ase(ase_other, ase_self);
  });
}

mp_status mp_pct_delta_aecp(const int* hits, size_t replications, size_t n, double nominal,
                            double* out) {
  return guarded([&] {
    require(hits, "hits");
    require(out, "out");
    const Eigen::Map<const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> h(
        hits, static_cast<Eigen::Index>(replications), static_cast<Eigen::Index>(n));
    *out = mixprobit::pct_delta_aecp(h, nominal);
  });
}

mp_status mp_roc(const int* labels, const double* scores, size_t n, double* thresholds,
                 double* tpr, double* fpr, size_t* points, double* auc) {
  return guarded([&] {
    require(labels, "labels");
    require(scores, "scores");
    const auto len = static_cast<Eigen::Index>(n);
    const mixprobit::RocCurve curve = mixprobit::roc(Eigen::Map<const Eigen::VectorXi>(labels, len),
                                                     Eigen::Map<const Eigen::VectorXd>(scores, len));
    for (size_t i = 0; i < curve.tpr.size(); ++i) {
      if (thresholds) thresholds[i] = curve.thresholds[i];
      if (tpr) tpr[i] = curve.tpr[i];
      if (fpr) fpr[i] = curve.fpr[i];
    }
    if (points) *points = curve.tpr.size();
    if (auc) *auc = curve.auc;
  });
}

mp_status mp_evaluate_csv(const char* truth_path, const char* estimate_path,
                          const char* baseline_path, double level, const char* out_path,
                          const char* roc_path, mp_evaluation* result) {
  return guarded([&] {
    require(truth_path, "truth_path");
    require(estimate_path, "estimate_path");
    const mixprobit::Evaluation e = mixprobit::evaluate_files(
        truth_path, estimate_path, baseline_path ? baseline_path : "", level);
    if (out_path) mixprobit::write_evaluation_csv(out_path, e);
    if (roc_path) {
      if (e.roc_curve.tpr.empty())
        throw mixprobit::DataError("ROC needs responses of both classes in the truth file");
      mixprobit::write_roc_csv(roc_path, e.roc_curve);
    }
    if (result) {
      result->askld = e.askld;
      result->ase = e.ase;
      result->coverage = e.coverage;
      result->pct_delta_aecp = e.pct_delta_aecp;
      result->auc = e.auc;
      result->pct_delta_ase = e.pct_delta_ase;
    }
  });
}

mp_status mp_study_run(const mp_config* config, int jobs, mp_study** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    if (jobs < 1) throw mixprobit::UsageError("jobs must be at least 1");
    *out = new mp_study{mixprobit::run_study(config->value, jobs)};
  });
}

mp_status mp_study_write(const mp_study* study, const char* path, const char* coverage_path) {
  return guarded([&] {
    require(study, "study");
    if (path) mixprobit::write_study_csv(path, study->value);
    if (coverage_path) mixprobit::write_coverage_csv(coverage_path, study->value);
  });
}

mp_status mp_study_model_probs(const mp_study* study, double* out, size_t len) {
  return guarded([&] {
    require(study, "study");
    require(out, "out");
    const std::vector<double> probs = study->value.mean_model_probs();
    if (len < probs.size()) throw mixprobit::UsageError("output buffer too small");
    for (size_t i = 0; i < probs.size(); ++i) out[i] = probs[i];
  });
}

int mp_study_succeeded(const mp_study* study) { return study ? study->value.succeeded() : 0; }

void mp_study_destroy(mp_study* study) { delete study; }

}  // extern "C"
