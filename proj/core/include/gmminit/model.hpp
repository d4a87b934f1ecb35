#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gmminit {

// N x D observation set, one point per row. Rows keep their index identity
// (initializers select rows, not abstract points).
class DataMatrix {
 public:
  // Throws std::invalid_argument on empty input or non-finite entries.
  explicit DataMatrix(Eigen::MatrixXd points);

  static DataMatrix from_rows(const std::vector<Eigen::VectorXd>& rows);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  Eigen::VectorXd row(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }
  const Eigen::MatrixXd& points() const { return points_; }

 private:
  Eigen::MatrixXd points_;
};

// Lower-triangular factor L with L L^T = m, or nullopt when m is not
// positive definite. A pivot counts as failed when it is <= 1e-12 times the
// largest diagonal entry of m. Throws on asymmetric input
// (relative tolerance 1e-12 on the largest magnitude entry).
std::optional<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m);

// One weighted Gaussian (w, mu, Sigma). The lower Cholesky factor of Sigma
// and the log normalization constant are cached at construction, so density
// evaluation is O(D^2) per point.
class GaussianComponent {
 public:
  // Throws std::invalid_argument when the covariance is asymmetric,
  // not positive definite, dimension-mismatched, or the weight is
  // outside [0, 1].
  GaussianComponent(double weight, Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  // Same checks, but a non-PD covariance yields nullopt instead of a throw.
  static std::optional<GaussianComponent> try_make(double weight, Eigen::VectorXd mean,
                                                   Eigen::MatrixXd covariance);

  double weight() const { return weight_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  // -(D/2) log(2 pi) - sum_d log(chol_dd)
  double log_norm_constant() const { return log_norm_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

  // Weights are adjusted freely (simplex projections, renormalization);
  // the cached factor only depends on the covariance.
  void set_weight(double w);

 private:
  GaussianComponent(double weight, Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                    Eigen::MatrixXd chol);

  double weight_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd chol_;
  double log_norm_;
};

// Full mixture parameter vector. Invariants checked at construction:
// K >= 1, equal component dimensions, weights sum to 1 within 1e-12.
class GmmParams {
 public:
  explicit GmmParams(std::vector<GaussianComponent> components);

  std::size_t size() const { return components_.size(); }
  std::size_t dim() const { return components_.front().dim(); }
  const GaussianComponent& component(std::size_t k) const { return components_[k]; }
  const std::vector<GaussianComponent>& components() const { return components_; }

 private:
  std::vector<GaussianComponent> components_;
};

// log N(x | mu, Sigma), evaluated through the cached Cholesky factor.
double gaussian_log_pdf(const Eigen::VectorXd& x, const GaussianComponent& comp);

// log sum_k w_k N(x | mu_k, Sigma_k), stabilized with log-sum-exp.
double mixture_log_pdf(const Eigen::VectorXd& x, const GmmParams& theta);

// L(X, theta) = sum_n log N(x_n | theta)
double log_likelihood(const DataMatrix& X, const GmmParams& theta);

// (x - mu)^T Sigma^{-1} (x - mu) via a triangular solve.
double mahalanobis_sq(const Eigen::VectorXd& x, const GaussianComponent& comp);

// Minimum of mahalanobis_sq over the mixture's components.
double min_mahalanobis(const Eigen::VectorXd& x, const GmmParams& theta);

// Closed-form 1-MLE: weight 1, sample mean, biased (1/N) covariance.
// A non-PD covariance falls back to the spherical trace/D estimate, then to
// the identity, mirroring the completion procedure's steps 5-6.
GaussianComponent mle_single_gaussian(const DataMatrix& X);

// Biased covariance if PD, else spherical (trace/D) * I, else I.
// Shared by the 1-MLE and the means-to-mixture completion.
Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& covariance);

double log_sum_exp(std::span<const double> values);

}  // namespace gmminit
