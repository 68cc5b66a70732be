#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "mixprobit/config.hpp"
#include "mixprobit/dataset.hpp"
#include "mixprobit/error.hpp"
#include "mixprobit/evaluate.hpp"
#include "mixprobit/mixprobit.h"
#include "mixprobit/simgen.hpp"

using namespace mixprobit;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("mixprobit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MIXPROBIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(Config, RoundTripAndValidation) {
  RunConfig c;
  c.prior.c_tau = 77.0;
  c.chain.sampling = 123;
  c.chain.sampler.collapse_unassigned = false;
  c.simulation.function = "d";
  const RunConfig back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_THROW(config_from_json({{"prior", {{"c_tao", 1.0}}}}), UsageError);
  EXPECT_THROW(config_from_json({{"metrics", {{"level", 1.5}}}}), UsageError);
  EXPECT_THROW(config_from_json({{"chain", {{"sampling", 0}}}}), UsageError);
  EXPECT_NO_THROW(config_from_json(nlohmann::json::object()));
}

TEST(Csv, ErrorsNameTheLine) {
  TempDir dir;
  const std::string bad = dir.file("bad.csv");
  write_text(bad, "x1,w\n0.1,1\n0.2,oops\n");
  try {
    load_dataset(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  write_text(bad, "x1,w\n0.1,1\n0.2,2\n");
  EXPECT_THROW(load_dataset(bad), DataError);
  write_text(bad, "x1,w\n0.1,1\n0.2\n");
  EXPECT_THROW(load_dataset(bad), DataError);
  EXPECT_THROW(load_dataset(dir.file("missing.csv")), IoError);
}

TEST(Csv, DatasetRoundTrip) {
  TempDir dir;
  RngStream rng(1);
  const Dataset d = generate(Benchmark::kCylinder, 50, rng);
  save_dataset(dir.file("d.csv"), d);
  EXPECT_EQ(first_line(dir.file("d.csv")), "x1,x2,w,true_prob");
  const Dataset back = load_dataset(dir.file("d.csv"));
  EXPECT_EQ(back.covariates(), d.covariates());
  EXPECT_EQ(back.responses(), d.responses());
  EXPECT_EQ(back.true_probabilities(), d.true_probabilities());
  EXPECT_EQ(load_points(dir.file("d.csv")).cols(), 2);
}

TEST(Evaluate, IdenticalFiles) {
  TempDir dir;
  write_text(dir.file("t.csv"), "x1,w,true_prob\n0.1,1,0.9\n0.2,0,0.1\n0.3,1,0.6\n");
  write_text(dir.file("e.csv"), "prob,low,high\n0.9,0.8,0.95\n0.1,0.05,0.2\n0.6,0.5,0.7\n");
  const Evaluation e = evaluate_files(dir.file("t.csv"), dir.file("e.csv"), "", 0.9);
  EXPECT_EQ(e.askld, 0.0);
  EXPECT_EQ(e.ase, 0.0);
  EXPECT_EQ(e.auc, 1.0);
  write_text(dir.file("short.csv"), "prob\n0.5\n");
  EXPECT_THROW(evaluate_files(dir.file("t.csv"), dir.file("short.csv"), "", 0.9), DataError);
}

TEST(CApi, StatusCodes) {
  mp_config* cfg = nullptr;
  ASSERT_EQ(mp_config_create(&cfg), MP_OK);
  EXPECT_EQ(mp_config_set_number(cfg, "prior.c_tau", 50.0), MP_OK);
  double v = 0.0;
  EXPECT_EQ(mp_config_get_number(cfg, "prior.c_tau", &v), MP_OK);
  EXPECT_EQ(v, 50.0);
  EXPECT_EQ(mp_config_set_number(cfg, "prior.nonsense", 1.0), MP_ERR_USAGE);
  EXPECT_NE(std::string(mp_last_error()), "");
  EXPECT_EQ(mp_config_set_number(cfg, "metrics.level", 2.0), MP_ERR_USAGE);

  mp_dataset* data = nullptr;
  EXPECT_EQ(mp_dataset_load_csv("/nonexistent/file.csv", &data), MP_ERR_IO);
  EXPECT_EQ(mp_dataset_simulate("z", 10, 1, 0, &data), MP_ERR_USAGE);
  ASSERT_EQ(mp_dataset_simulate("a", 10, 1, 0, &data), MP_OK);
  EXPECT_EQ(mp_dataset_rows(data), 10u);
  EXPECT_EQ(mp_dataset_cols(data), 1u);

  const double truth[] = {0.5}, est[] = {0.9};
  double out = 0.0;
  EXPECT_EQ(mp_askld(truth, est, 1, &out), MP_OK);
  EXPECT_NEAR(out, 0.87888, 1e-5);
  EXPECT_EQ(mp_pct_delta_ase(1.0, 0.0, &out), MP_ERR_DATA);
  mp_dataset_destroy(data);
  mp_config_destroy(cfg);
}

TEST(CApi, FitSaveLoadPredict) {
  TempDir dir;
  mp_config* cfg = nullptr;
  ASSERT_EQ(mp_config_create(&cfg), MP_OK);
  for (const char* key : {"chain.pilot_burnin", "chain.pilot_length", "chain.warmup", "chain.sampling"})
    ASSERT_EQ(mp_config_set_number(cfg, key, 40), MP_OK);
  mp_dataset* data = nullptr;
  ASSERT_EQ(mp_dataset_simulate("a", 120, 3, 0, &data), MP_OK);
  mp_model* model = nullptr;
  mp_fit_report report{};
  ASSERT_EQ(mp_fit(data, cfg, dir.file("trace.ndjson").c_str(), &model, &report), MP_OK)
      << mp_last_error();
  EXPECT_EQ(report.draws, 40);
  EXPECT_EQ(count_lines(dir.file("trace.ndjson")), 40u);
  double probs[3];
  ASSERT_EQ(mp_model_probabilities(model, probs, 3), MP_OK);
  EXPECT_NEAR(probs[0] + probs[1] + probs[2], 1.0, 1e-12);

  ASSERT_EQ(mp_model_save(model, dir.file("m.json").c_str()), MP_OK);
  mp_model* loaded = nullptr;
  ASSERT_EQ(mp_model_load(dir.file("m.json").c_str(), &loaded), MP_OK);
  const std::size_t n = mp_model_training_rows(loaded);
  ASSERT_EQ(n, 120u);
  std::vector<double> fitted(n), lo(n), hi(n), points(n), pred(n), plo(n), phi(n);
  ASSERT_EQ(mp_model_fitted(model, fitted.data(), lo.data(), hi.data(), n), MP_OK);
  mp_dataset* again = nullptr;
  ASSERT_EQ(mp_dataset_simulate("a", 120, 3, 0, &again), MP_OK);
  mp_dataset_save_csv(again, dir.file("d.csv").c_str());
  const Dataset d = load_dataset(dir.file("d.csv"));
  for (std::size_t i = 0; i < n; ++i) points[i] = d.covariates()(static_cast<Eigen::Index>(i), 0);
  ASSERT_EQ(mp_model_predict(loaded, points.data(), n, 1, pred.data(), plo.data(), phi.data()),
            MP_OK);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(pred[i], fitted[i], 1e-10);
  EXPECT_EQ(mp_model_predict(loaded, points.data(), n / 2, 2, pred.data(), plo.data(), phi.data()),
            MP_ERR_DATA);

  write_text(dir.file("m.json"), "{\"format\":\"mixprobit-archive\",\"version\":99}");
  mp_model* stale = nullptr;
  EXPECT_NE(mp_model_load(dir.file("m.json").c_str(), &stale), MP_OK);
  mp_model_destroy(loaded);
  mp_model_destroy(model);
  mp_dataset_destroy(again);
  mp_dataset_destroy(data);
  mp_config_destroy(cfg);
}

TEST(Cli, SimulateAndErrors) {
  TempDir dir;
  const std::string a = dir.file("a.csv"), b = dir.file("b.csv"), d = dir.file("d.csv");
  EXPECT_EQ(run_cli("simulate --function a --n 1000 --seed 7 --out " + a), 0);
  EXPECT_EQ(run_cli("simulate --function a --n 1000 --seed 7 --out " + b), 0);
  EXPECT_EQ(count_lines(a), 1001u);
  std::ifstream fa(a), fb(b);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(run_cli("simulate --function d --n 30 --seed 1 --out " + d), 0);
  EXPECT_EQ(first_line(d), "x1,x2,w,true_prob");

  EXPECT_EQ(run_cli("simulate --function q --n 5 --out " + d), 1);
  EXPECT_EQ(run_cli("simulate --n 5"), 1);
  EXPECT_EQ(run_cli("fit --data " + dir.file("none.csv") + " --out " + dir.file("m.json")), 2);
  write_text(dir.file("bad.csv"), "x1,w\n0.1,1\n0.2,3\n");
  EXPECT_EQ(run_cli("fit --data " + dir.file("bad.csv") + " --out " + dir.file("m.json")), 2);
}

TEST(Cli, FitPredictEvaluateStudy) {
  TempDir dir;
  write_text(dir.file("cfg.json"),
             "{\"chain\":{\"pilot_burnin\":30,\"pilot_length\":30,\"warmup\":30,\"sampling\":30}}");
  const std::string data = dir.file("data.csv"), model = dir.file("m.json");
  ASSERT_EQ(run_cli("simulate --function c --n 150 --seed 2 --out " + data), 0);
  ASSERT_EQ(run_cli("fit --data " + data + " --config " + dir.file("cfg.json") + " --seed 4 --out " +
                    model + " --trace " + dir.file("t.ndjson")),
            0);
  EXPECT_EQ(count_lines(dir.file("t.ndjson")), 30u);
  ASSERT_EQ(run_cli("predict --model " + model + " --data " + data + " --out " + dir.file("p.csv")), 0);
  EXPECT_EQ(first_line(dir.file("p.csv")), "prob,low,high");
  EXPECT_EQ(count_lines(dir.file("p.csv")), 151u);
  ASSERT_EQ(run_cli("evaluate --data " + data + " --estimate " + dir.file("p.csv") + " --out " +
                    dir.file("e.csv") + " --roc " + dir.file("roc.csv")),
            0);
  EXPECT_EQ(first_line(dir.file("e.csv")), "metric,value");

  // Same seed, same bytes.
  ASSERT_EQ(run_cli("fit --data " + data + " --config " + dir.file("cfg.json") + " --seed 4 --out " +
                    dir.file("m2.json")),
            0);
  std::ifstream f1(model), f2(dir.file("m2.json"));
  const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  EXPECT_EQ(s1, s2);

  const std::string study = dir.file("s.csv");
  ASSERT_EQ(run_cli("study --config " + dir.file("cfg.json") +
                    " --function a --n 80 --replications 2 --seed 3 --out " + study),
            0);
  EXPECT_EQ(count_lines(study), 4u);  // header, two rows, summary
  ASSERT_EQ(run_cli("study --config " + dir.file("cfg.json") +
                    " --function a --n 80 --replications 2 --seed 3 --out " + dir.file("s2.csv")),
            0);
  std::ifstream g1(study), g2(dir.file("s2.csv"));
  const std::string t1((std::istreambuf_iterator<char>(g1)), {}), t2((std::istreambuf_iterator<char>(g2)), {});
  EXPECT_EQ(t1, t2);
}
