#pragma once

#include "gmminit/model.hpp"
#include "gmminit/rng.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gmminit {

enum class MethodKind {
  Uniform,
  KmeansPP,
  Gonzalez,
  Adaptive,
  GonzalezForGmm,
  KwedlosGonzalez,
  Agglomerative,
};

// One initialization configuration. alpha is meaningful only for Adaptive;
// sample_fraction only for the subsample-based methods (GonzalezForGmm,
// KwedlosGonzalez, Agglomerative).
struct MethodSpec {
  MethodKind kind = MethodKind::Uniform;
  std::optional<double> alpha;
  std::optional<double> sample_fraction;

  // Enforces the presence rules above; throws std::invalid_argument.
  void validate() const;

  // Stable identifier including hyperparameters, e.g. "adaptive(0.5)",
  // "kwedlo_gonzalez(0.1)", "kmeanspp". Used as rank-table row label and
  // in the benchmark seed chain.
  std::string label() const;
  // Kind name only ("adaptive"), the records-CSV method column.
  std::string kind_name() const;

  static MethodKind parse_kind(const std::string& name);

  static MethodSpec uniform();
  static MethodSpec kmeanspp();
  static MethodSpec gonzalez();
  static MethodSpec adaptive(double alpha);
  static MethodSpec gonzalez_for_gmm(double sample_fraction);
  static MethodSpec kwedlos_gonzalez(double sample_fraction);
  static MethodSpec agglomerative(double sample_fraction);

  // The eight configurations evaluated in the experiments:
  // uniform, kmeanspp, gonzalez, adaptive(1), adaptive(0.5),
  // gonzalez_gmm(0.1), kwedlo_gonzalez(0.1), agglomerative(0.1).
  static std::vector<MethodSpec> paper_roster();

  bool operator==(const MethodSpec&) const = default;
};

// Completes K candidate means into a full mixture: nearest-mean partition,
// per-cluster 1-MLE with the spherical-then-identity covariance fallback,
// weights = cluster fraction. An empty cluster keeps its seed mean with an
// identity covariance and weight 1/(2N), after which all weights are
// renormalized.
GmmParams means2gmm(const DataMatrix& X, const std::vector<Eigen::VectorXd>& means);

// K distinct rows drawn uniformly without replacement.
std::vector<Eigen::VectorXd> uniform_means(const DataMatrix& X, std::size_t k, Rng& rng);

// k-means++ seeding: first row uniform, then proportional to the squared
// Euclidean distance to the nearest chosen mean. Zero total cost falls back
// to a uniform draw over the not-yet-chosen rows.
std::vector<Eigen::VectorXd> kmeanspp_means(const DataMatrix& X, std::size_t k, Rng& rng);

// Farthest-point traversal: first row uniform, then the row maximizing the
// distance to its nearest chosen mean; ties break to the lowest row index.
std::vector<Eigen::VectorXd> gonzalez_means(const DataMatrix& X, std::size_t k, Rng& rng);

// Probability vector over the subset rows:
//   alpha * m1(x|theta) / sum_{y in S} m1(y|theta)  +  (1 - alpha) / |S|
// where m1 is the minimum squared Mahalanobis distance. When all m1 vanish
// the whole density degrades to uniform over S.
std::vector<double> sample_density(const DataMatrix& X, std::span<const std::size_t> subset,
                                   const GmmParams& theta, double alpha);

// k-means++ adapted to mixtures: grow from the 1-MLE, drawing each new mean
// from X according to sample_density (S = X) against the current model, and
// re-completing with means2gmm. A draw that duplicates an existing mean is
// redrawn at most N times, then accepted.
GmmParams adaptive_init(const DataMatrix& X, std::size_t k, double alpha, Rng& rng);

// Gonzalez adapted to mixtures: uniform subsample S of ceil(s N) rows, grow
// from the 1-MLE by the sample point extremizing m1 against the current
// model; means2gmm always runs on the full X.
GmmParams gonzalez_for_gmm(const DataMatrix& X, std::size_t k, double sample_fraction,
                           Rng& rng);

struct RandomCovariance {
  Eigen::MatrixXd covariance;
  bool degenerate = false;  // zero-trace input, covariance is 1e-6 * I
};

// Random covariance whose eigenvalues sum to trace(Sigma_X) / (10 D K) with
// max/min ratio <= 10: D values i.i.d. uniform in [1, 10] rescaled to the
// trace target, rotated by a random orthonormal Q (QR of a standard normal
// matrix).
RandomCovariance rand_covar(const DataMatrix& X, std::size_t k, Rng& rng);

// Kwedlo's Gonzalez variant: means by the m1 extremum scan over a uniform
// subsample, covariances from rand_covar, weights uniform in [0,1]
// normalized by their sum.
GmmParams kwedlos_gonzalez(const DataMatrix& X, std::size_t k, double sample_fraction,
                           Rng& rng);

// Average-linkage agglomerative clustering (squared Euclidean base distance)
// on a uniform subsample down to K clusters; the cluster centroids are
// completed with means2gmm on the full X.
GmmParams hac_init(const DataMatrix& X, std::size_t k, double sample_fraction, Rng& rng);

// Dispatch on MethodSpec. Uniform/KmeansPP/Gonzalez route their selected
// means through means2gmm.
GmmParams run_method(const DataMatrix& X, std::size_t k, const MethodSpec& spec, Rng& rng);

namespace detail {
// Exposed for tests: average-linkage merge schedule on a point set.
// Returns per-point cluster ids in [0, k) after merging down to k clusters.
std::vector<std::size_t> average_linkage_labels(const Eigen::MatrixXd& points, std::size_t k);
// Random orthonormal matrix via QR of i.i.d. standard normals, with the
// R-diagonal sign fix.
Eigen::MatrixXd random_orthonormal(std::size_t d, Rng& rng);
}  // namespace detail

}  // namespace gmminit
