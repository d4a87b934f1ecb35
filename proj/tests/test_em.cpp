#include "gmminit/em.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gmminit/init.hpp"
#include "test_support.hpp"

namespace gmminit {
namespace {

using testing::mat;
using testing::random_data;
using testing::two_blobs;
using testing::vec;

TEST(EmStep, RejectsBadArguments) {
  const DataMatrix X(mat({{0.0}, {1.0}}));
  const GmmParams theta(std::vector<GaussianComponent>{
      GaussianComponent(1.0, vec({0.0, 0.0}), Eigen::MatrixXd::Identity(2, 2))});
  EmConfig cfg;
  Rng rng(1);
  EXPECT_THROW(em_step(X, theta, cfg, rng), std::invalid_argument);

  const GmmParams ok(std::vector<GaussianComponent>{
      GaussianComponent(1.0, vec({0.0}), mat({{1.0}}))});
  EmConfig zero_rounds;
  zero_rounds.rounds = 0;
  EXPECT_THROW(em_run(X, ok, zero_rounds, rng), std::invalid_argument);
  EmConfig bad_count;
  bad_count.min_effective_count = 0.0;
  EXPECT_THROW(em_step(X, ok, bad_count, rng), std::invalid_argument);
}

TEST(EmStep, SingleComponentStepIsGlobalMle) {
  Rng data_rng(0x0e110001);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 20 + data_rng.uniform_index(80);
    const std::size_t d = 1 + data_rng.uniform_index(4);
    const DataMatrix X = random_data(data_rng, n, d, 2.0);

    // Arbitrary valid starting component.
    const GmmParams theta0(std::vector<GaussianComponent>{GaussianComponent(
        1.0, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), 0.3),
        2.0 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                        static_cast<Eigen::Index>(d)))});
    EmConfig cfg;
    cfg.rounds = 1;
    Rng rng(7);
    const auto [theta, trace] = em_run(X, theta0, cfg, rng);
    const GaussianComponent mle = mle_single_gaussian(X);

    ASSERT_EQ(trace.log_likelihood.size(), 1u);
    EXPECT_TRUE(trace.clean());
    EXPECT_DOUBLE_EQ(theta.component(0).weight(), 1.0);
    EXPECT_LE((theta.component(0).mean() - mle.mean()).norm(), 1e-10);
    EXPECT_LE((theta.component(0).covariance() - mle.covariance()).norm(), 1e-10);
  }
}

TEST(EmStep, TwoPointSymmetricFixture) {
  // X = {0, 2} with components centered on the points. One step moves each
  // mean toward the other point by the cross responsibility b = s/(1+s),
  // s = exp(-2): mu1' = 2b and var' = a mu1'^2 + b (2 - mu1')^2.
  const DataMatrix X(mat({{0.0}, {2.0}}));
  std::vector<GaussianComponent> comps;
  comps.emplace_back(0.5, vec({0.0}), mat({{1.0}}));
  comps.emplace_back(0.5, vec({2.0}), mat({{1.0}}));
  const GmmParams theta0(std::move(comps));

  EmConfig cfg;
  cfg.rounds = 1;
  cfg.min_effective_count = 0.1;  // each side has effective count exactly 1
  Rng rng(3);
  const auto [theta, report] = em_step(X, theta0, cfg, rng);
  EXPECT_EQ(report.resamples, 0u);
  EXPECT_EQ(report.mixes, 0u);

  EXPECT_NEAR(theta.component(0).weight(), 0.5, 1e-15);
  EXPECT_NEAR(theta.component(1).weight(), 0.5, 1e-15);
  EXPECT_NEAR(theta.component(0).mean()[0], 0.23840584404423537, 1e-12);
  EXPECT_NEAR(theta.component(1).mean()[0], 1.7615941559557646, 1e-12);
  EXPECT_NEAR(theta.component(0).covariance()(0, 0), 0.4199743416140265, 1e-12);
  EXPECT_NEAR(theta.component(1).covariance()(0, 0), 0.4199743416140265, 1e-12);
  EXPECT_NEAR(log_likelihood(X, theta), -2.4394411545100985, 1e-12);
}

TEST(EmStep, WellSeparatedMleIsAFixedPoint) {
  Rng data_rng(0x0e110002);
  const DataMatrix X = two_blobs(data_rng, 100, 100.0);

  // Per-blob MLE components; responsibilities are numerically hard 0/1 at
  // this separation, so one step must reproduce the same parameters.
  std::vector<Eigen::VectorXd> left, right;
  for (std::size_t i = 0; i < X.size(); ++i)
    (X.row(i)[0] < 50.0 ? left : right).push_back(X.row(i));
  std::vector<GaussianComponent> comps;
  for (const auto* rows : {&left, &right}) {
    const DataMatrix blob = DataMatrix::from_rows(*rows);
    GaussianComponent c = mle_single_gaussian(blob);
    c.set_weight(static_cast<double>(rows->size()) / static_cast<double>(X.size()));
    comps.push_back(std::move(c));
  }
  const GmmParams star(std::move(comps));

  EmConfig cfg;
  Rng rng(5);
  const auto [next, report] = em_step(X, star, cfg, rng);
  EXPECT_EQ(report.resamples, 0u);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(next.component(j).weight(), star.component(j).weight(), 1e-12);
    EXPECT_LE((next.component(j).mean() - star.component(j).mean()).norm(), 1e-8);
    EXPECT_LE((next.component(j).covariance() - star.component(j).covariance()).norm(),
              1e-8);
  }
}

TEST(EmRun, SingleRoundEqualsSingleStep) {
  Rng data_rng(0x0e110003);
  const DataMatrix X = random_data(data_rng, 60, 2, 3.0);
  Rng init_rng(11);
  const GmmParams theta0 = run_method(X, 3, MethodSpec::kmeanspp(), init_rng);

  EmConfig cfg;
  cfg.rounds = 1;
  Rng a(21), b(21);
  const auto [via_run, trace] = em_run(X, theta0, cfg, a);
  const auto [via_step, report] = em_step(X, theta0, cfg, b);
  for (std::size_t j = 0; j < via_run.size(); ++j) {
    EXPECT_EQ(via_run.component(j).weight(), via_step.component(j).weight());
    EXPECT_EQ(via_run.component(j).mean(), via_step.component(j).mean());
    EXPECT_EQ(via_run.component(j).covariance(), via_step.component(j).covariance());
  }
  ASSERT_EQ(trace.log_likelihood.size(), 1u);
  EXPECT_EQ(trace.log_likelihood[0], log_likelihood(X, via_step));
}

TEST(EmRun, LogLikelihoodMonotoneOnCleanTraces) {
  Rng data_rng(0x0e110004);
  for (int rep = 0; rep < 10; ++rep) {
    const DataMatrix X = two_blobs(data_rng, 120, 8.0);
    Rng init_rng(static_cast<std::uint64_t>(rep));
    const GmmParams theta0 = run_method(X, 2, MethodSpec::kmeanspp(), init_rng);

    EmConfig cfg;
    cfg.rounds = 30;
    Rng rng(static_cast<std::uint64_t>(100 + rep));
    const auto [theta, trace] = em_run(X, theta0, cfg, rng);
    ASSERT_EQ(trace.log_likelihood.size(), 30u);
    ASSERT_TRUE(trace.clean());

    EXPECT_GE(trace.log_likelihood[0], log_likelihood(X, theta0) - 1e-8);
    for (std::size_t r = 1; r < trace.log_likelihood.size(); ++r)
      EXPECT_GE(trace.log_likelihood[r], trace.log_likelihood[r - 1] - 1e-8)
          << "round " << r;
    EXPECT_EQ(trace.log_likelihood.back(), log_likelihood(X, theta));
  }
}

TEST(EmRun, DeterministicAcrossRepeatRuns) {
  Rng data_rng(0x0e110005);
  const DataMatrix X = random_data(data_rng, 80, 2, 4.0);
  Rng init_rng(13);
  const GmmParams theta0 = run_method(X, 4, MethodSpec::uniform(), init_rng);

  EmConfig cfg;
  cfg.rounds = 15;
  Rng a(99), b(99);
  const auto [ta, tra] = em_run(X, theta0, cfg, a);
  const auto [tb, trb] = em_run(X, theta0, cfg, b);
  ASSERT_EQ(tra.log_likelihood.size(), trb.log_likelihood.size());
  for (std::size_t r = 0; r < tra.log_likelihood.size(); ++r)
    EXPECT_EQ(tra.log_likelihood[r], trb.log_likelihood[r]);
  for (std::size_t j = 0; j < ta.size(); ++j) {
    EXPECT_EQ(ta.component(j).mean(), tb.component(j).mean());
    EXPECT_EQ(ta.component(j).covariance(), tb.component(j).covariance());
  }
}

TEST(EmStep, StarvedComponentIsResampled) {
  // A component stranded far from all data collects ~zero responsibility
  // and must restart at a data point with a random covariance.
  Rng data_rng(0x0e110006);
  const DataMatrix X = random_data(data_rng, 50, 2, 1.0);
  std::vector<GaussianComponent> comps;
  comps.emplace_back(0.5, vec({0.0, 0.0}), Eigen::MatrixXd::Identity(2, 2));
  comps.emplace_back(0.5, vec({1e6, 0.0}), Eigen::MatrixXd::Identity(2, 2));
  const GmmParams theta0(std::move(comps));

  EmConfig cfg;
  Rng rng(17);
  const auto [theta, report] = em_step(X, theta0, cfg, rng);
  EXPECT_EQ(report.resamples, 1u);

  bool is_data_row = false;
  for (std::size_t i = 0; i < X.size(); ++i)
    if (theta.component(1).mean() == X.row(i)) is_data_row = true;
  EXPECT_TRUE(is_data_row);
  EXPECT_NEAR(theta.component(0).weight() + theta.component(1).weight(), 1.0, 1e-12);
  EXPECT_LE(theta.component(1).weight(), 1e-12);
  ASSERT_TRUE(cholesky(theta.component(1).covariance()).has_value());
}

TEST(EmStep, ZeroVarianceScatterFallsBackToMixing) {
  // Identical points give an exactly zero scatter; the first blend with the
  // previous covariance (weight 0.5) restores positive definiteness.
  const DataMatrix X(mat({{5.0}, {5.0}, {5.0}, {5.0}}));
  const GmmParams theta0(std::vector<GaussianComponent>{
      GaussianComponent(1.0, vec({5.0}), mat({{1.0}}))});

  EmConfig cfg;
  Rng rng(23);
  const auto [theta, report] = em_step(X, theta0, cfg, rng);
  EXPECT_EQ(report.mixes, 1u);
  EXPECT_EQ(report.resamples, 0u);
  EXPECT_DOUBLE_EQ(theta.component(0).covariance()(0, 0), 0.5);
}

TEST(EmStep, FuzzedStepsKeepValidModels) {
  Rng rng(0x0e110007);
  const auto roster = MethodSpec::paper_roster();
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t k = 1 + rng.uniform_index(4);
    const std::size_t n = std::max<std::size_t>(10 * k, 20 + rng.uniform_index(80));
    const std::size_t d = 1 + rng.uniform_index(3);
    const DataMatrix X = random_data(rng, n, d, 2.0);
    const GmmParams theta0 = run_method(X, k, roster[rep % roster.size()], rng);

    EmConfig cfg;
    const auto [theta, report] = em_step(X, theta0, cfg, rng);
    ASSERT_EQ(theta.size(), k);
    double total = 0.0;
    for (const auto& c : theta.components()) {
      total += c.weight();
      EXPECT_TRUE(cholesky(c.covariance()).has_value());
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace gmminit
