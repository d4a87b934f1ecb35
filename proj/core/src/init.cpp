#include "gmminit/init.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gmminit {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// ceil(fraction * n) with a relative guard against cases like
// 0.1 * 10000 rounding up to 1001.
std::size_t sample_count(double fraction, std::size_t n) {
  const double t = fraction * static_cast<double>(n);
  const double c = std::ceil(t - 1e-9 * std::max(1.0, t));
  return static_cast<std::size_t>(std::max(c, 1.0));
}

std::vector<std::size_t> sorted_uniform_subset(const DataMatrix& X, double fraction,
                                               Rng& rng) {
  auto subset = rng.sample_indices(X.size(), sample_count(fraction, X.size()));
  std::sort(subset.begin(), subset.end());
  return subset;
}

std::vector<Eigen::VectorXd> model_means(const GmmParams& theta) {
  std::vector<Eigen::VectorXd> means;
  means.reserve(theta.size());
  for (const auto& c : theta.components()) means.push_back(c.mean());
  return means;
}

// The m1 extremum scan of the Gonzalez-style adaptions. Figs. 3-4 are read
// as arg max (the farthest-point intent); GMMINIT_GONZALEZ_ARGMIN flips to
// the literal arg min for replication runs. Ties break to the lowest row
// index; `subset` is kept sorted by the callers.
std::size_t mahalanobis_scan(const DataMatrix& X, std::span<const std::size_t> subset,
                             const GmmParams& theta) {
  std::size_t best_row = subset.front();
  double best = min_mahalanobis(X.row(best_row), theta);
  for (std::size_t i = 1; i < subset.size(); ++i) {
    const double v = min_mahalanobis(X.row(subset[i]), theta);
#ifdef GMMINIT_GONZALEZ_ARGMIN
    const bool better = v < best;
#else
    const bool better = v > best;
#endif
    if (better) {
      best = v;
      best_row = subset[i];
    }
  }
  return best_row;
}

}  // namespace

void MethodSpec::validate() const {
  const bool sampled = kind == MethodKind::GonzalezForGmm ||
                       kind == MethodKind::KwedlosGonzalez ||
                       kind == MethodKind::Agglomerative;
  if (kind == MethodKind::Adaptive) {
    require(alpha.has_value(), "MethodSpec: adaptive requires alpha");
    require(*alpha >= 0.0 && *alpha <= 1.0, "MethodSpec: alpha must be in [0, 1]");
  } else {
    require(!alpha.has_value(), "MethodSpec: alpha only applies to adaptive");
  }
  if (sampled) {
    require(sample_fraction.has_value(), "MethodSpec: method requires a sample fraction");
    require(*sample_fraction > 0.0 && *sample_fraction <= 1.0,
            "MethodSpec: sample fraction must be in (0, 1]");
  } else {
    require(!sample_fraction.has_value(),
            "MethodSpec: sample fraction does not apply to this method");
  }
}

std::string MethodSpec::kind_name() const {
  switch (kind) {
    case MethodKind::Uniform: return "uniform";
    case MethodKind::KmeansPP: return "kmeanspp";
    case MethodKind::Gonzalez: return "gonzalez";
    case MethodKind::Adaptive: return "adaptive";
    case MethodKind::GonzalezForGmm: return "gonzalez_gmm";
    case MethodKind::KwedlosGonzalez: return "kwedlo_gonzalez";
    case MethodKind::Agglomerative: return "agglomerative";
  }
  throw std::logic_error("MethodSpec: unknown kind");
}

std::string MethodSpec::label() const {
  if (alpha) return kind_name() + "(" + format_param(*alpha) + ")";
  if (sample_fraction) return kind_name() + "(" + format_param(*sample_fraction) + ")";
  return kind_name();
}

MethodKind MethodSpec::parse_kind(const std::string& name) {
  if (name == "uniform") return MethodKind::Uniform;
  if (name == "kmeanspp") return MethodKind::KmeansPP;
  if (name == "gonzalez") return MethodKind::Gonzalez;
  if (name == "adaptive") return MethodKind::Adaptive;
  if (name == "gonzalez_gmm") return MethodKind::GonzalezForGmm;
  if (name == "kwedlo_gonzalez") return MethodKind::KwedlosGonzalez;
  if (name == "agglomerative") return MethodKind::Agglomerative;
  throw std::invalid_argument("unknown method kind: " + name);
}

MethodSpec MethodSpec::uniform() { return {MethodKind::Uniform, {}, {}}; }
MethodSpec MethodSpec::kmeanspp() { return {MethodKind::KmeansPP, {}, {}}; }
MethodSpec MethodSpec::gonzalez() { return {MethodKind::Gonzalez, {}, {}}; }
MethodSpec MethodSpec::adaptive(double alpha) { return {MethodKind::Adaptive, alpha, {}}; }
MethodSpec MethodSpec::gonzalez_for_gmm(double s) {
  return {MethodKind::GonzalezForGmm, {}, s};
}
MethodSpec MethodSpec::kwedlos_gonzalez(double s) {
  return {MethodKind::KwedlosGonzalez, {}, s};
}
MethodSpec MethodSpec::agglomerative(double s) {
  return {MethodKind::Agglomerative, {}, s};
}

std::vector<MethodSpec> MethodSpec::paper_roster() {
  return {uniform(),          kmeanspp(),           gonzalez(),
          adaptive(1.0),      adaptive(0.5),        gonzalez_for_gmm(0.1),
          kwedlos_gonzalez(0.1), agglomerative(0.1)};
}

GmmParams means2gmm(const DataMatrix& X, const std::vector<Eigen::VectorXd>& means) {
  require(!means.empty(), "means2gmm: need at least one mean");
  const Eigen::Index d = static_cast<Eigen::Index>(X.dim());
  for (const auto& m : means)
    require(m.size() == d, "means2gmm: mean dimension mismatch");

  const std::size_t k = means.size();
  const std::size_t n = X.size();

  // Nearest-mean partition; ties go to the lowest mean index.
  std::vector<std::size_t> assign(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = X.row(i);
    std::size_t best = 0;
    double best_d = (x - means[0]).squaredNorm();
    for (std::size_t j = 1; j < k; ++j) {
      const double dj = (x - means[j]).squaredNorm();
      if (dj < best_d) {
        best_d = dj;
        best = j;
      }
    }
    assign[i] = best;
  }

  std::vector<std::size_t> counts(k, 0);
  for (std::size_t a : assign) ++counts[a];

  std::vector<GaussianComponent> comps;
  comps.reserve(k);
  std::vector<double> weights(k);
  bool any_empty = false;

  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) {
      // Keep the seed mean alive for the EM stage.
      any_empty = true;
      weights[j] = 0.5 / static_cast<double>(n);
      comps.emplace_back(*GaussianComponent::try_make(
          1.0, means[j], Eigen::MatrixXd::Identity(d, d)));
      continue;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < n; ++i)
      if (assign[i] == j) centroid += X.row(i);
    centroid /= static_cast<double>(counts[j]);

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] != j) continue;
      const Eigen::VectorXd v = X.row(i) - centroid;
      scatter.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0);
    }
    Eigen::MatrixXd cov = scatter.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(counts[j]);

    weights[j] = static_cast<double>(counts[j]) / static_cast<double>(n);
    comps.emplace_back(1.0, std::move(centroid), regularize_covariance(cov));
  }

  if (any_empty) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
  }
  for (std::size_t j = 0; j < k; ++j) comps[j].set_weight(weights[j]);
  return GmmParams(std::move(comps));
}

std::vector<Eigen::VectorXd> uniform_means(const DataMatrix& X, std::size_t k, Rng& rng) {
  require(k >= 1 && k <= X.size(), "uniform_means: need 1 <= k <= n");
  std::vector<Eigen::VectorXd> means;
  means.reserve(k);
  for (std::size_t idx : rng.sample_indices(X.size(), k)) means.push_back(X.row(idx));
  return means;
}

std::vector<Eigen::VectorXd> kmeanspp_means(const DataMatrix& X, std::size_t k, Rng& rng) {
  const std::size_t n = X.size();
  require(k >= 1 && k <= n, "kmeanspp_means: need 1 <= k <= n");

  std::vector<bool> chosen(n, false);
  std::vector<std::size_t> picks;
  picks.reserve(k);

  picks.push_back(rng.uniform_index(n));
  chosen[picks.back()] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i)
    d2[i] = (X.row(i) - X.row(picks.back())).squaredNorm();
  d2[picks.back()] = 0.0;

  while (picks.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t next;
    if (total > 0.0) {
      next = rng.discrete(d2);
    } else {
      // All residual cost is zero: uniform over the not-yet-chosen rows.
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) open.push_back(i);
      next = open[rng.uniform_index(open.size())];
    }
    picks.push_back(next);
    chosen[next] = true;
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (X.row(i) - X.row(next)).squaredNorm());
    d2[next] = 0.0;
  }

  std::vector<Eigen::VectorXd> means;
  means.reserve(k);
  for (std::size_t idx : picks) means.push_back(X.row(idx));
  return means;
}

std::vector<Eigen::VectorXd> gonzalez_means(const DataMatrix& X, std::size_t k, Rng& rng) {
  const std::size_t n = X.size();
  require(k >= 1 && k <= n, "gonzalez_means: need 1 <= k <= n");

  std::vector<bool> chosen(n, false);
  std::vector<std::size_t> picks;
  picks.reserve(k);
  picks.push_back(rng.uniform_index(n));
  chosen[picks.back()] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i)
    d2[i] = (X.row(i) - X.row(picks.back())).squaredNorm();

  while (picks.size() < k) {
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      if (d2[i] > best_d) {
        best_d = d2[i];
        best = i;
      }
    }
    picks.push_back(best);
    chosen[best] = true;
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (X.row(i) - X.row(best)).squaredNorm());
  }

  std::vector<Eigen::VectorXd> means;
  means.reserve(k);
  for (std::size_t idx : picks) means.push_back(X.row(idx));
  return means;
}

std::vector<double> sample_density(const DataMatrix& X, std::span<const std::size_t> subset,
                                   const GmmParams& theta, double alpha) {
  require(!subset.empty(), "sample_density: subset must be non-empty");
  require(alpha >= 0.0 && alpha <= 1.0, "sample_density: alpha must be in [0, 1]");

  const std::size_t m = subset.size();
  std::vector<double> density(m);
  std::vector<double> m1(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    m1[i] = min_mahalanobis(X.row(subset[i]), theta);
    total += m1[i];
  }
  const double uniform_part = (1.0 - alpha) / static_cast<double>(m);
  if (total <= 0.0) {
    // Every subset point sits exactly on a mean: fully uniform.
    std::fill(density.begin(), density.end(), 1.0 / static_cast<double>(m));
    return density;
  }
  for (std::size_t i = 0; i < m; ++i)
    density[i] = alpha * m1[i] / total + uniform_part;
  return density;
}

GmmParams adaptive_init(const DataMatrix& X, std::size_t k, double alpha, Rng& rng) {
  const std::size_t n = X.size();
  require(k >= 1 && k <= n, "adaptive_init: need 1 <= k <= n");
  require(alpha >= 0.0 && alpha <= 1.0, "adaptive_init: alpha must be in [0, 1]");

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  GmmParams theta(std::vector<GaussianComponent>{mle_single_gaussian(X)});
  for (std::size_t i = 2; i <= k; ++i) {
    const auto density = sample_density(X, all, theta, alpha);
    std::size_t pick = 0;
    for (std::size_t attempt = 0; attempt < n; ++attempt) {
      pick = rng.discrete(density);
      const Eigen::VectorXd p = X.row(pick);
      const bool duplicate =
          std::any_of(theta.components().begin(), theta.components().end(),
                      [&](const GaussianComponent& c) { return c.mean() == p; });
      if (!duplicate) break;
      // else redraw; after n attempts the duplicate is accepted and the
      // empty-cluster rule in means2gmm absorbs it
    }
    auto means = model_means(theta);
    means.push_back(X.row(pick));
    theta = means2gmm(X, means);
  }
  return theta;
}

GmmParams gonzalez_for_gmm(const DataMatrix& X, std::size_t k, double sample_fraction,
                           Rng& rng) {
  require(sample_fraction > 0.0 && sample_fraction <= 1.0,
          "gonzalez_for_gmm: sample fraction must be in (0, 1]");
  const auto subset = sorted_uniform_subset(X, sample_fraction, rng);
  require(k >= 1 && k <= subset.size(),
          "gonzalez_for_gmm: k exceeds the subsample size ceil(s*n)");

  GmmParams theta(std::vector<GaussianComponent>{mle_single_gaussian(X)});
  for (std::size_t i = 2; i <= k; ++i) {
    const std::size_t pick = mahalanobis_scan(X, subset, theta);
    auto means = model_means(theta);
    means.push_back(X.row(pick));
    theta = means2gmm(X, means);
  }
  return theta;
}

RandomCovariance rand_covar(const DataMatrix& X, std::size_t k, Rng& rng) {
  require(k >= 1, "rand_covar: k must be >= 1");
  const Eigen::Index d = static_cast<Eigen::Index>(X.dim());

  const Eigen::VectorXd mean = X.points().colwise().mean();
  double trace = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i)
    trace += (X.row(i) - mean).squaredNorm();
  trace /= static_cast<double>(X.size());

  if (trace <= 0.0)
    return {1e-6 * Eigen::MatrixXd::Identity(d, d), true};

  const double target = trace / (10.0 * static_cast<double>(d) * static_cast<double>(k));

  // Draws in [1, 10] keep the max/min ratio <= 10; rescaling to the trace
  // target preserves it.
  Eigen::VectorXd eig(d);
  for (Eigen::Index i = 0; i < d; ++i) eig[i] = rng.uniform(1.0, 10.0);
  eig *= target / eig.sum();

  const Eigen::MatrixXd q = detail::random_orthonormal(static_cast<std::size_t>(d), rng);
  Eigen::MatrixXd cov = q.transpose() * eig.asDiagonal() * q;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {std::move(cov), false};
}

GmmParams kwedlos_gonzalez(const DataMatrix& X, std::size_t k, double sample_fraction,
                           Rng& rng) {
  require(sample_fraction > 0.0 && sample_fraction <= 1.0,
          "kwedlos_gonzalez: sample fraction must be in (0, 1]");
  const auto subset = sorted_uniform_subset(X, sample_fraction, rng);
  require(k >= 1 && k <= subset.size(),
          "kwedlos_gonzalez: k exceeds the subsample size ceil(s*n)");

  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  means.push_back(X.row(subset[rng.uniform_index(subset.size())]));
  covs.push_back(rand_covar(X, k, rng).covariance);

  auto interim = [&]() {
    std::vector<GaussianComponent> comps;
    const double w = 1.0 / static_cast<double>(means.size());
    for (std::size_t j = 0; j < means.size(); ++j)
      comps.emplace_back(w, means[j], covs[j]);
    return GmmParams(std::move(comps));
  };

  for (std::size_t i = 2; i <= k; ++i) {
    const GmmParams theta = interim();
    means.push_back(X.row(mahalanobis_scan(X, subset, theta)));
    covs.push_back(rand_covar(X, k, rng).covariance);
  }

  std::vector<double> weights(k);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    weights[j] = rng.uniform01();
    total += weights[j];
  }
  std::vector<GaussianComponent> comps;
  comps.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double w = total > 0.0 ? weights[j] / total : 1.0 / static_cast<double>(k);
    comps.emplace_back(w, std::move(means[j]), std::move(covs[j]));
  }
  return GmmParams(std::move(comps));
}

GmmParams hac_init(const DataMatrix& X, std::size_t k, double sample_fraction, Rng& rng) {
  require(sample_fraction > 0.0 && sample_fraction <= 1.0,
          "hac_init: sample fraction must be in (0, 1]");
  const auto subset = sorted_uniform_subset(X, sample_fraction, rng);
  require(k >= 1 && k <= subset.size(), "hac_init: k exceeds the subsample size ceil(s*n)");

  Eigen::MatrixXd sample(static_cast<Eigen::Index>(subset.size()),
                         static_cast<Eigen::Index>(X.dim()));
  for (std::size_t i = 0; i < subset.size(); ++i)
    sample.row(static_cast<Eigen::Index>(i)) = X.row(subset[i]);

  const auto labels = detail::average_linkage_labels(sample, k);

  std::vector<Eigen::VectorXd> centroids(k, Eigen::VectorXd::Zero(sample.cols()));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    centroids[labels[i]] += sample.row(static_cast<Eigen::Index>(i));
    ++counts[labels[i]];
  }
  for (std::size_t j = 0; j < k; ++j)
    centroids[j] /= static_cast<double>(counts[j]);

  return means2gmm(X, centroids);
}

GmmParams run_method(const DataMatrix& X, std::size_t k, const MethodSpec& spec, Rng& rng) {
  spec.validate();
  switch (spec.kind) {
    case MethodKind::Uniform:
      return means2gmm(X, uniform_means(X, k, rng));
    case MethodKind::KmeansPP:
      return means2gmm(X, kmeanspp_means(X, k, rng));
    case MethodKind::Gonzalez:
      return means2gmm(X, gonzalez_means(X, k, rng));
    case MethodKind::Adaptive:
      return adaptive_init(X, k, *spec.alpha, rng);
    case MethodKind::GonzalezForGmm:
      return gonzalez_for_gmm(X, k, *spec.sample_fraction, rng);
    case MethodKind::KwedlosGonzalez:
      return kwedlos_gonzalez(X, k, *spec.sample_fraction, rng);
    case MethodKind::Agglomerative:
      return hac_init(X, k, *spec.sample_fraction, rng);
  }
  throw std::logic_error("run_method: unknown kind");
}

namespace detail {

Eigen::MatrixXd random_orthonormal(std::size_t d, Rng& rng) {
  const Eigen::Index di = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd g(di, di);
  for (Eigen::Index i = 0; i < di; ++i)
    for (Eigen::Index j = 0; j < di; ++j) g(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < di; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

std::vector<std::size_t> average_linkage_labels(const Eigen::MatrixXd& points,
                                                std::size_t k) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  require(k >= 1 && k <= n, "average_linkage_labels: need 1 <= k <= n");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    dist(i, i) = kInf;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = (points.row(static_cast<Eigen::Index>(i)) -
                         points.row(static_cast<Eigen::Index>(j)))
                            .squaredNorm();
      dist(i, j) = d2;
      dist(j, i) = d2;
    }
  }

  std::vector<bool> active(n, true);
  std::vector<double> size(n, 1.0);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);

  auto nearest_of = [&](std::size_t i) {
    std::size_t best = n;
    double best_d = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      if (dist(i, j) < best_d) {
        best_d = dist(i, j);
        best = j;
      }
    }
    return best;
  };

  std::vector<std::size_t> nn(n, n);
  for (std::size_t i = 0; i < n; ++i) nn[i] = nearest_of(i);

  std::size_t clusters = n;
  while (clusters > k) {
    std::size_t a = n;
    double best_d = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (dist(i, nn[i]) < best_d) {
        best_d = dist(i, nn[i]);
        a = i;
      }
    }
    std::size_t b = nn[a];
    if (b < a) std::swap(a, b);

    // Lance-Williams update for average linkage: the merged distance is the
    // size-weighted mean, so it never drops below min(d(a,.), d(b,.)) and
    // only rows pointing at a or b need a nearest-neighbor rescan.
    const double sa = size[a];
    const double sb = size[b];
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a || j == b) continue;
      const double merged = (sa * dist(a, j) + sb * dist(b, j)) / (sa + sb);
      dist(a, j) = merged;
      dist(j, a) = merged;
    }
    size[a] = sa + sb;
    active[b] = false;
    parent[b] = a;
    --clusters;
    if (clusters == k) break;

    nn[a] = nearest_of(a);
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a) continue;
      if (nn[j] == a || nn[j] == b) nn[j] = nearest_of(j);
    }
  }

  auto find_root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };

  // Cluster ids in order of lowest original row index.
  std::vector<std::size_t> root_id(n, n);
  std::size_t next_id = 0;
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find_root(i);
    if (root_id[r] == n) root_id[r] = next_id++;
    labels[i] = root_id[r];
  }
  return labels;
}

}  // namespace detail

}  // namespace gmminit
