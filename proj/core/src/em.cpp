#include "gmminit/em.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gmminit/init.hpp"

namespace gmminit {

namespace {

constexpr double kMixBetas[] = {0.5, 0.75, 0.9};

}  // namespace

std::pair<GmmParams, EmStepReport> em_step(const DataMatrix& X, const GmmParams& theta,
                                           const EmConfig& cfg, Rng& rng) {
  if (theta.dim() != X.dim())
    throw std::invalid_argument("em_step: model and data dimensions differ");
  if (cfg.rounds < 1) throw std::invalid_argument("em_step: rounds must be >= 1");
  const double min_count = cfg.resolve_min_count(X.dim());
  if (!(min_count > 0.0))
    throw std::invalid_argument("em_step: min_effective_count must be > 0");

  const std::size_t n = X.size();
  const std::size_t k = theta.size();
  const Eigen::Index d = static_cast<Eigen::Index>(X.dim());

  Eigen::MatrixXd resp(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = X.row(i);
    for (std::size_t j = 0; j < k; ++j)
      terms[j] = std::log(theta.component(j).weight()) +
                 gaussian_log_pdf(x, theta.component(j));
    const double lse = log_sum_exp(terms);
    for (std::size_t j = 0; j < k; ++j) {
      // A row where every weighted density underflows to zero gets uniform
      // responsibilities instead of NaNs.
      resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::isinf(lse) ? 1.0 / static_cast<double>(k)
                          : std::exp(terms[j] - lse);
    }
  }

  EmStepReport report;
  std::vector<GaussianComponent> comps;
  comps.reserve(k);
  std::vector<double> weights(k);

  for (std::size_t j = 0; j < k; ++j) {
    const double nk = resp.col(static_cast<Eigen::Index>(j)).sum();
    weights[j] = nk / static_cast<double>(n);

    if (nk < min_count) {
      // Too few effective points to estimate a covariance; restart the
      // component at a random data point with a random covariance. The RNG
      // is only consulted here, in component-index order.
      ++report.resamples;
      Eigen::VectorXd mean = X.row(rng.uniform_index(n));
      Eigen::MatrixXd cov = rand_covar(X, k, rng).covariance;
      auto comp = GaussianComponent::try_make(1.0, std::move(mean), std::move(cov));
      if (!comp)
        comp = GaussianComponent::try_make(1.0, X.row(rng.uniform_index(n)),
                                           Eigen::MatrixXd::Identity(d, d));
      comps.push_back(std::move(*comp));
      continue;
    }

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < n; ++i)
      mu += resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * X.row(i);
    mu /= nk;

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd v = X.row(i) - mu;
      scatter.selfadjointView<Eigen::Lower>().rankUpdate(
          v, resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    Eigen::MatrixXd cov = scatter.selfadjointView<Eigen::Lower>();
    cov /= nk;

    auto comp = GaussianComponent::try_make(1.0, mu, cov);
    if (!comp) {
      const Eigen::MatrixXd& old_cov = theta.component(j).covariance();
      for (double beta : kMixBetas) {
        Eigen::MatrixXd mixed = (1.0 - beta) * cov + beta * old_cov;
        comp = GaussianComponent::try_make(1.0, mu, std::move(mixed));
        if (comp) {
          ++report.mixes;
          break;
        }
      }
      if (!comp) {
        ++report.keeps;
        comp = GaussianComponent::try_make(1.0, mu, old_cov);
      }
    }
    comps.push_back(std::move(*comp));
  }

  double total = 0.0;
  for (double w : weights) total += w;
  for (std::size_t j = 0; j < k; ++j) comps[j].set_weight(weights[j] / total);
  return {GmmParams(std::move(comps)), report};
}

std::pair<GmmParams, EmTrace> em_run(const DataMatrix& X, const GmmParams& theta0,
                                     const EmConfig& cfg, Rng& rng) {
  if (cfg.rounds < 1) throw std::invalid_argument("em_run: rounds must be >= 1");
  GmmParams theta = theta0;
  EmTrace trace;
  trace.log_likelihood.reserve(cfg.rounds);
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    auto [next, report] = em_step(X, theta, cfg, rng);
    theta = std::move(next);
    trace.log_likelihood.push_back(log_likelihood(X, theta));
    trace.resample_events += report.resamples;
    trace.covariance_mix_events += report.mixes;
    trace.covariance_keep_events += report.keeps;
  }
  return {theta, trace};
}

}  // namespace gmminit
