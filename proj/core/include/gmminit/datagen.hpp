#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gmminit/model.hpp"
#include "gmminit/rng.hpp"

namespace gmminit {

inline constexpr int kNoiseLabel = -1;

// Controls the per-component minimum eigenvalue ladder.
enum class SizeMode { Constant, Different };

struct Eccentricity {
  bool is_range = false;
  // Target ratio of component standard deviations (square roots of the
  // covariance eigenvalues). Ignored in range mode, where each component
  // draws its own ratio uniformly from [1, 10].
  double value = 1.0;

  static Eccentricity fixed(double e) { return {false, e}; }
  static Eccentricity range() { return {true, 1.0}; }
  void validate() const;
};

struct GeneratorSpec {
  std::size_t k = 1;
  std::size_t d = 1;
  double separation = 1.0;
  // Weights are proportional to 2^(weight_exponent * i); 0 gives uniform.
  double weight_exponent = 0.0;
  Eccentricity eccentricity = Eccentricity::fixed(1.0);
  SizeMode size_mode = SizeMode::Constant;
  // Side of the cube the means are drawn from; 0 selects 100 * k^(1/d).
  // The final geometry only depends on it through rounding because the
  // means get rescaled to hit the separation target.
  double cube_side = 0.0;
  std::size_t n_points = 1;
  double noise_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double resolved_side() const;
};

struct LabeledDataset {
  DataMatrix data;
  std::vector<int> labels;
  GmmParams truth;
};

std::vector<double> weight_schedule(std::size_t k, double weight_exponent);

Eigen::MatrixXd random_covariance(std::size_t d, double lambda_min,
                                  const Eccentricity& ecc, Rng& rng);

GmmParams generate_gmm(const GeneratorSpec& spec, Rng& rng);

double separation(const GmmParams& theta);

// Ratio of the extreme standard deviations sqrt(lambda_max / lambda_min).
double eccentricity(const Eigen::MatrixXd& cov);

// Raw eigenvalue ratio lambda_max / lambda_min, exposed as a diagnostic.
double eigenvalue_ratio(const Eigen::MatrixXd& cov);

LabeledDataset sample_dataset(const GmmParams& theta, const GeneratorSpec& spec,
                              Rng& rng);

}  // namespace gmminit
