#include <gtest/gtest.h>

#include "mixprobit/error.hpp"
#include "mixprobit/inference.hpp"
#include "mixprobit/pipeline.hpp"
#include "mixprobit/simgen.hpp"

using namespace mixprobit;

namespace {

RunConfig quick_config(int pilot, int main_len) {
  RunConfig c;
  c.chain.pilot_burnin = pilot;
  c.chain.pilot_length = pilot;
  c.chain.warmup = main_len;
  c.chain.sampling = main_len;
  return c;
}

}  // namespace

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.05), 1.2);
  EXPECT_DOUBLE_EQ(sorted_quantile({7.0}, 0.3), 7.0);
}

TEST(Summarize, SingleAndConstantDraws) {
  Eigen::MatrixXd one(1, 3);
  one << 0.1, 0.5, 0.9;
  Prediction p = summarize_surfaces(one, 0.9);
  EXPECT_EQ(p.mean, one.row(0).transpose());
  EXPECT_EQ(p.low, p.high);
  EXPECT_EQ(p.low, p.mean);

  const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(40, 2, 0.37);
  p = summarize_surfaces(constant, 0.9);
  EXPECT_NEAR(p.mean[0], 0.37, 1e-15);
  EXPECT_NEAR((p.high - p.low).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Summarize, IntervalQuantiles) {
  Eigen::MatrixXd s(101, 1);
  for (int k = 0; k < 101; ++k) s(k, 0) = k / 100.0;
  const Prediction p = summarize_surfaces(s, 0.9);
  EXPECT_NEAR(p.low[0], 0.05, 1e-12);
  EXPECT_NEAR(p.high[0], 0.95, 1e-12);
  EXPECT_NEAR(p.mean[0], 0.5, 1e-12);
}

TEST(Summarize, EmptyTraceRejected) {
  RngStream rng(1);
  const Dataset d = generate(Benchmark::kSin, 30, rng);
  EXPECT_THROW(summarize(ChainTrace{}, d, build_basis(d), 3), std::exception);
}

class StepFit : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    RngStream rng(21);
    data_ = new Dataset(generate(Benchmark::kStep, 1000, rng));
    fit_ = new FitOutput(fit_model(*data_, quick_config(300, 600), RngStream(22)));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete fit_;
  }
  static Dataset* data_;
  static FitOutput* fit_;
};
Dataset* StepFit::data_ = nullptr;
FitOutput* StepFit::fit_ = nullptr;

TEST_F(StepFit, ModelProbabilitiesSumToOne) {
  const auto& p = fit_->result.model_probs;
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_EQ(fit_->result.draw_count, 600);
}

TEST_F(StepFit, PredictAtTrainingPoints) {
  const Prediction p = predict(fit_->result, data_->covariates());
  EXPECT_LT((p.mean - fit_->result.fitted_probs).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((p.low - fit_->result.interval_low).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((p.high - fit_->result.interval_high).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GE(p.mean.minCoeff(), 0.0);
  EXPECT_LE(p.mean.maxCoeff(), 1.0);
  EXPECT_TRUE((p.low.array() <= p.high.array()).all());
}

TEST_F(StepFit, StraddlesJump) {
  Eigen::MatrixXd pts(2, 1);
  pts << 0.1, 0.5;
  const Prediction p = predict(fit_->result, pts);
  EXPECT_GT(p.mean[1] - p.mean[0], 0.4);
}

TEST_F(StepFit, DimensionMismatch) {
  EXPECT_THROW(predict(fit_->result, Eigen::MatrixXd::Zero(2, 2)), DataError);
}

TEST_F(StepFit, ArchiveRoundTrip) {
  const FitResult back =
      archive_from_json(nlohmann::json::parse(archive_to_json(fit_->result).dump()));
  const Prediction p = predict(back, data_->covariates());
  EXPECT_LT((p.mean - fit_->result.fitted_probs).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(back.model_probs, fit_->result.model_probs);
}

TEST_F(StepFit, ArchiveVersionChecked) {
  nlohmann::json j = archive_to_json(fit_->result);
  j["version"] = kArchiveVersion + 1;
  EXPECT_THROW(archive_from_json(j), DataError);
}
