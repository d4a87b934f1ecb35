#include "gmminit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace gmminit {

namespace {

constexpr double kSymmetryRelTol = 1e-12;
constexpr double kPivotRelThreshold = 1e-12;
constexpr double kWeightSumTol = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd points) : points_(std::move(points)) {
  require(points_.rows() >= 1, "DataMatrix: need at least one point");
  require(points_.cols() >= 1, "DataMatrix: dimension must be >= 1");
  require(points_.allFinite(), "DataMatrix: entries must be finite");
}

DataMatrix DataMatrix::from_rows(const std::vector<Eigen::VectorXd>& rows) {
  require(!rows.empty(), "DataMatrix: need at least one point");
  const Eigen::Index d = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == d, "DataMatrix: rows have mixed dimensions");
    m.row(static_cast<Eigen::Index>(i)) = rows[i];
  }
  return DataMatrix(std::move(m));
}

std::optional<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  require(d >= 1, "cholesky: matrix must be non-empty");
  require(m.cols() == d, "cholesky: matrix must be square");

  double max_abs = 0.0;
  double max_skew = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      max_abs = std::max(max_abs, std::abs(m(i, j)));
      max_skew = std::max(max_skew, std::abs(m(i, j) - m(j, i)));
    }
  }
  require(max_skew <= kSymmetryRelTol * std::max(max_abs, 1e-300),
          "cholesky: matrix is not symmetric");

  const double threshold = kPivotRelThreshold * m.diagonal().maxCoeff();

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    if (!(pivot > threshold) || !std::isfinite(pivot)) return std::nullopt;
    L(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

GaussianComponent::GaussianComponent(double weight, Eigen::VectorXd mean,
                                     Eigen::MatrixXd covariance, Eigen::MatrixXd chol)
    : weight_(weight),
      mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      chol_(std::move(chol)) {
  const double d = static_cast<double>(mean_.size());
  log_norm_ = -0.5 * d * std::log(2.0 * std::numbers::pi) -
              chol_.diagonal().array().log().sum();
}

GaussianComponent::GaussianComponent(double weight, Eigen::VectorXd mean,
                                     Eigen::MatrixXd covariance)
    : GaussianComponent([&] {
        auto c = try_make(weight, std::move(mean), std::move(covariance));
        require(c.has_value(), "GaussianComponent: covariance is not positive definite");
        return std::move(*c);
      }()) {}

std::optional<GaussianComponent> GaussianComponent::try_make(double weight,
                                                             Eigen::VectorXd mean,
                                                             Eigen::MatrixXd covariance) {
  require(weight >= 0.0 && weight <= 1.0, "GaussianComponent: weight must be in [0, 1]");
  require(mean.size() >= 1, "GaussianComponent: dimension must be >= 1");
  require(mean.allFinite(), "GaussianComponent: mean must be finite");
  require(covariance.rows() == mean.size() && covariance.cols() == mean.size(),
          "GaussianComponent: covariance shape does not match mean");
  require(covariance.allFinite(), "GaussianComponent: covariance must be finite");
  auto L = cholesky(covariance);
  if (!L) return std::nullopt;
  return GaussianComponent(weight, std::move(mean), std::move(covariance), std::move(*L));
}

void GaussianComponent::set_weight(double w) {
  require(w >= 0.0 && w <= 1.0, "GaussianComponent: weight must be in [0, 1]");
  weight_ = w;
}

GmmParams::GmmParams(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  require(!components_.empty(), "GmmParams: need at least one component");
  const std::size_t d = components_.front().dim();
  double weight_sum = 0.0;
  for (const auto& c : components_) {
    require(c.dim() == d, "GmmParams: components have mixed dimensions");
    weight_sum += c.weight();
  }
  require(std::abs(weight_sum - 1.0) <= kWeightSumTol,
          "GmmParams: weights must sum to 1");
}

double gaussian_log_pdf(const Eigen::VectorXd& x, const GaussianComponent& comp) {
  require(x.size() == comp.mean().size(), "gaussian_log_pdf: dimension mismatch");
  Eigen::VectorXd v = x - comp.mean();
  comp.chol().triangularView<Eigen::Lower>().solveInPlace(v);
  return comp.log_norm_constant() - 0.5 * v.squaredNorm();
}

double mixture_log_pdf(const Eigen::VectorXd& x, const GmmParams& theta) {
  std::vector<double> terms(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const auto& c = theta.component(k);
    terms[k] = std::log(c.weight()) + gaussian_log_pdf(x, c);
  }
  return log_sum_exp(terms);
}

double log_likelihood(const DataMatrix& X, const GmmParams& theta) {
  double total = 0.0;
  for (std::size_t n = 0; n < X.size(); ++n) total += mixture_log_pdf(X.row(n), theta);
  return total;
}

double mahalanobis_sq(const Eigen::VectorXd& x, const GaussianComponent& comp) {
  require(x.size() == comp.mean().size(), "mahalanobis_sq: dimension mismatch");
  Eigen::VectorXd v = x - comp.mean();
  comp.chol().triangularView<Eigen::Lower>().solveInPlace(v);
  return v.squaredNorm();
}

double min_mahalanobis(const Eigen::VectorXd& x, const GmmParams& theta) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : theta.components()) best = std::min(best, mahalanobis_sq(x, c));
  return best;
}

Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& covariance) {
  if (cholesky(covariance)) return covariance;
  const Eigen::Index d = covariance.rows();
  // Spherical estimate: (1 / (D |C|)) sum ||x - mu||^2 == trace(Sigma) / D.
  const double spherical = covariance.trace() / static_cast<double>(d);
  Eigen::MatrixXd s = spherical * Eigen::MatrixXd::Identity(d, d);
  if (cholesky(s)) return s;
  return Eigen::MatrixXd::Identity(d, d);
}

GaussianComponent mle_single_gaussian(const DataMatrix& X) {
  const Eigen::VectorXd mean = X.points().colwise().mean();
  const Eigen::Index d = static_cast<Eigen::Index>(X.dim());
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t n = 0; n < X.size(); ++n) {
    const Eigen::VectorXd v = X.row(n) - mean;
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0);
  }
  Eigen::MatrixXd cov = scatter.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(X.size());
  return GaussianComponent(1.0, mean, regularize_covariance(cov));
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf) passes through
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace gmminit
