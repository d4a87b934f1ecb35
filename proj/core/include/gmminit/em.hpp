#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gmminit/model.hpp"
#include "gmminit/rng.hpp"

namespace gmminit {

struct EmConfig {
  std::size_t rounds = 50;
  // Components whose effective count drops below this are resampled. When
  // unset the bound defaults to d + 1, the smallest count that can support
  // a full-rank covariance estimate.
  std::optional<double> min_effective_count;

  double resolve_min_count(std::size_t dim) const {
    return min_effective_count ? *min_effective_count : static_cast<double>(dim) + 1.0;
  }
};

// Degeneracy repairs applied during one M-step.
struct EmStepReport {
  std::size_t resamples = 0;
  std::size_t mixes = 0;
  std::size_t keeps = 0;
};

struct EmTrace {
  // log_likelihood[r] is the value after round r+1; the list has exactly
  // one entry per executed round.
  std::vector<double> log_likelihood;
  std::size_t resample_events = 0;
  std::size_t covariance_mix_events = 0;
  std::size_t covariance_keep_events = 0;

  bool clean() const {
    return resample_events == 0 && covariance_mix_events == 0 &&
           covariance_keep_events == 0;
  }
};

std::pair<GmmParams, EmStepReport> em_step(const DataMatrix& X, const GmmParams& theta,
                                           const EmConfig& cfg, Rng& rng);

std::pair<GmmParams, EmTrace> em_run(const DataMatrix& X, const GmmParams& theta0,
                                     const EmConfig& cfg, Rng& rng);

}  // namespace gmminit
