#include "gmminit/datagen.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gmminit/init.hpp"

namespace gmminit {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void Eccentricity::validate() const {
  if (!is_range) require(value >= 1.0, "Eccentricity: e must be >= 1");
}

void GeneratorSpec::validate() const {
  require(k >= 1, "GeneratorSpec: k must be >= 1");
  require(d >= 1, "GeneratorSpec: d must be >= 1");
  require(n_points >= 1, "GeneratorSpec: n_points must be >= 1");
  require(separation > 0.0, "GeneratorSpec: separation must be > 0");
  require(noise_fraction >= 0.0 && noise_fraction < 1.0,
          "GeneratorSpec: noise_fraction must be in [0, 1)");
  require(cube_side >= 0.0, "GeneratorSpec: cube_side must be >= 0");
  eccentricity.validate();
}

double GeneratorSpec::resolved_side() const {
  if (cube_side > 0.0) return cube_side;
  return 100.0 * std::pow(static_cast<double>(k), 1.0 / static_cast<double>(d));
}

std::vector<double> weight_schedule(std::size_t k, double weight_exponent) {
  require(k >= 1, "weight_schedule: k must be >= 1");
  std::vector<double> w(k);
  // Normalizing 2^(c*i) directly overflows for large c*k, so shift the
  // exponents by their maximum first.
  double total = 0.0;
  const double top =
      weight_exponent * static_cast<double>(weight_exponent >= 0.0 ? k : 1);
  for (std::size_t i = 0; i < k; ++i) {
    w[i] = std::exp2(weight_exponent * static_cast<double>(i + 1) - top);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

Eigen::MatrixXd random_covariance(std::size_t d, double lambda_min,
                                  const Eccentricity& ecc, Rng& rng) {
  require(d >= 1, "random_covariance: d must be >= 1");
  require(lambda_min > 0.0, "random_covariance: lambda_min must be > 0");
  ecc.validate();

  const Eigen::Index di = static_cast<Eigen::Index>(d);
  const double e = (d == 1) ? 1.0 : (ecc.is_range ? rng.uniform(1.0, 10.0) : ecc.value);

  const double lo = lambda_min * lambda_min;
  if (e == 1.0) return lo * Eigen::MatrixXd::Identity(di, di);

  // The eigenvalues of the covariance are the squared lambdas, pinned to
  // lo and (e*lambda_min)^2 at the extremes with the rest uniform between.
  const double hi = (e * lambda_min) * (e * lambda_min);
  Eigen::VectorXd eig(di);
  eig[0] = lo;
  eig[di - 1] = hi;
  for (Eigen::Index i = 1; i + 1 < di; ++i) eig[i] = rng.uniform(lo, hi);

  const Eigen::MatrixXd q = detail::random_orthonormal(d, rng);
  Eigen::MatrixXd cov = q.transpose() * eig.asDiagonal() * q;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return cov;
}

GmmParams generate_gmm(const GeneratorSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t k = spec.k;
  const Eigen::Index d = static_cast<Eigen::Index>(spec.d);
  const double side = spec.resolved_side();

  const auto weights = weight_schedule(k, spec.weight_exponent);

  std::vector<Eigen::VectorXd> means;
  means.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::VectorXd m(d);
    bool fresh = false;
    while (!fresh) {
      for (Eigen::Index i = 0; i < d; ++i) m[i] = rng.uniform(0.0, side);
      fresh = std::none_of(means.begin(), means.end(),
                           [&](const Eigen::VectorXd& other) { return other == m; });
    }
    means.push_back(std::move(m));
  }

  std::vector<GaussianComponent> comps;
  comps.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double lambda_min =
        spec.size_mode == SizeMode::Constant
            ? 1.0
            : std::exp2(static_cast<double>(j));
    comps.emplace_back(weights[j], means[j],
                       random_covariance(spec.d, lambda_min, spec.eccentricity, rng));
  }
  GmmParams theta(std::move(comps));
  if (k < 2) return theta;

  // Separation is linear in a global scaling of the means (covariances
  // held fixed), so one multiplication lands exactly on the target.
  const double scale = spec.separation / separation(theta);
  std::vector<GaussianComponent> scaled;
  scaled.reserve(k);
  for (const auto& c : theta.components())
    scaled.emplace_back(c.weight(), scale * c.mean(), c.covariance());
  return GmmParams(std::move(scaled));
}

double separation(const GmmParams& theta) {
  require(theta.size() >= 2, "separation: needs at least two components");
  std::vector<double> traces(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j)
    traces[j] = theta.component(j).covariance().trace();

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < theta.size(); ++a) {
    for (std::size_t b = a + 1; b < theta.size(); ++b) {
      const double dist =
          (theta.component(a).mean() - theta.component(b).mean()).norm();
      best = std::min(best, dist / std::sqrt(std::max(traces[a], traces[b])));
    }
  }
  return best;
}

double eccentricity(const Eigen::MatrixXd& cov) {
  return std::sqrt(eigenvalue_ratio(cov));
}

double eigenvalue_ratio(const Eigen::MatrixXd& cov) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, "eigenvalue_ratio: decomposition failed");
  const auto& eig = solver.eigenvalues();
  require(eig.minCoeff() > 0.0, "eigenvalue_ratio: matrix must be positive definite");
  return eig.maxCoeff() / eig.minCoeff();
}

LabeledDataset sample_dataset(const GmmParams& theta, const GeneratorSpec& spec,
                              Rng& rng) {
  spec.validate();
  require(theta.dim() == spec.d, "sample_dataset: model and spec dimensions differ");

  const std::size_t n = spec.n_points;
  const std::size_t n_signal = static_cast<std::size_t>(
      std::llround((1.0 - spec.noise_fraction) * static_cast<double>(n)));
  require(n_signal >= 1, "sample_dataset: noise fraction leaves no signal points");

  const Eigen::Index d = static_cast<Eigen::Index>(spec.d);
  std::vector<double> weights(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j)
    weights[j] = theta.component(j).weight();

  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), d);
  std::vector<int> labels(n);

  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < n_signal; ++i) {
    const std::size_t j = rng.discrete(weights);
    for (Eigen::Index t = 0; t < d; ++t) z[t] = rng.normal();
    const auto& c = theta.component(j);
    points.row(static_cast<Eigen::Index>(i)) = (c.mean() + c.chol() * z).transpose();
    labels[i] = static_cast<int>(j);
  }

  if (n_signal < n) {
    const auto signal = points.topRows(static_cast<Eigen::Index>(n_signal));
    const Eigen::VectorXd lo = signal.colwise().minCoeff();
    const Eigen::VectorXd hi = signal.colwise().maxCoeff();
    const Eigen::VectorXd center = 0.5 * (lo + hi);
    const Eigen::VectorXd half = 0.6 * (hi - lo);
    for (std::size_t i = n_signal; i < n; ++i) {
      for (Eigen::Index t = 0; t < d; ++t)
        points(static_cast<Eigen::Index>(i), t) =
            rng.uniform(center[t] - half[t], center[t] + half[t]);
      labels[i] = kNoiseLabel;
    }
  }

  return LabeledDataset{DataMatrix(std::move(points)), std::move(labels), theta};
}

}  // namespace gmminit
