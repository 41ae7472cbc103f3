// Copyright 2026 The tscox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TSCOX_SIMULATE_HPP
#define TSCOX_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tscox/covariance.hpp"
#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"
#include "tscox/integration.hpp"
#include "tscox/model.hpp"
#include "tscox/pattern.hpp"
#include "tscox/random.hpp"
#include "tscox/stats.hpp"

/// \file
/// Marked point pattern simulation by thinning a homogeneous Poisson process:
/// the two-stage model (marks and nonspatial covariates assigned after
/// thinning) and the bivariate mark model (nonspatial covariates drawn before
/// thinning, one process per mark).

namespace tscox {

struct NonspatialDistribution {
  enum class Kind { Uniform, Beta, Bernoulli, Normal };
  Kind kind = Kind::Uniform;
  double a = 0.0;
  double b = 1.0;

  static NonspatialDistribution uniform(double lo, double hi) {
    if (!(lo < hi)) fail(ErrorKind::InvalidArgument, "uniform needs lo < hi");
    return {Kind::Uniform, lo, hi};
  }
  static NonspatialDistribution beta(double shape1, double shape2) {
    if (!(shape1 > 0.0) || !(shape2 > 0.0)) fail(ErrorKind::InvalidArgument, "beta shapes must be positive");
    return {Kind::Beta, shape1, shape2};
  }
  static NonspatialDistribution bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidArgument, "bernoulli p must lie in [0, 1]");
    return {Kind::Bernoulli, p, 0.0};
  }
  static NonspatialDistribution normal(double mean, double sd) {
    if (!(sd > 0.0)) fail(ErrorKind::InvalidArgument, "normal sd must be positive");
    return {Kind::Normal, mean, sd};
  }

  [[nodiscard]] double draw(Rng& rng) const {
    switch (kind) {
      case Kind::Uniform: return std::uniform_real_distribution<double>(a, b)(rng);
      case Kind::Beta: return beta_draw(rng, a, b);
      case Kind::Bernoulli: return uniform01(rng) < a ? 1.0 : 0.0;
      case Kind::Normal: return std::normal_distribution<double>(a, b)(rng);
    }
    return 0.0;
  }

  /// Support of the distribution, when bounded.
  [[nodiscard]] std::optional<std::pair<double, double>> support() const {
    switch (kind) {
      case Kind::Uniform: return std::pair{a, b};
      case Kind::Beta: return std::pair{0.0, 1.0};
      case Kind::Bernoulli: return std::pair{0.0, 1.0};
      case Kind::Normal: return std::nullopt;
    }
    return std::nullopt;
  }

  /// Uniform over a bound, or Bernoulli(1/2) for a binary covariate.
  [[nodiscard]] bool is_flat_over(const CovariateBound& bound) const {
    if (bound.kind == CovariateBound::Kind::Binary) return kind == Kind::Bernoulli && a == 0.5;
    if (kind == Kind::Uniform) return a == bound.lower && b == bound.upper;
    if (kind == Kind::Beta) return a == 1.0 && b == 1.0 && bound.lower == 0.0 && bound.upper == 1.0;
    return false;
  }
};

using NonspatialDistributionSpec = std::vector<NonspatialDistribution>;

inline Eigen::VectorXd draw_nonspatial(const NonspatialDistributionSpec& dist, Rng& rng) {
  Eigen::VectorXd nu(static_cast<Eigen::Index>(dist.size()));
  for (std::size_t j = 0; j < dist.size(); ++j) nu(static_cast<Eigen::Index>(j)) = dist[j].draw(rng);
  return nu;
}

/// Regular sites clipped to the window, topped up so that every areal unit
/// holds at least one site.
inline std::vector<Location> make_lattice(const CovariateField& field, std::size_t target = 400) {
  auto sites = regular_sites(field.window(), target);
  if (!field.is_grid()) {
    std::vector<bool> covered(field.unit_count(), false);
    for (const auto& s : sites) {
      if (auto u = field.unit_of(s)) covered[*u] = true;
    }
    for (std::size_t u = 0; u < covered.size(); ++u) {
      if (!covered[u]) sites.push_back(field.unit_interior_point(u));
    }
  }
  return sites;
}

/// Nearest-site lookup over a bucket grid.
class NearestSite {
 public:
  explicit NearestSite(std::span<const Location> sites) : sites_(sites.begin(), sites.end()) {
    if (sites_.empty()) fail(ErrorKind::InvalidArgument, "no sites to affiliate with");
    bbox_ = {sites_[0].x, sites_[0].y, sites_[0].x, sites_[0].y};
    for (const auto& s : sites_) {
      bbox_.xmin = std::min(bbox_.xmin, s.x);
      bbox_.ymin = std::min(bbox_.ymin, s.y);
      bbox_.xmax = std::max(bbox_.xmax, s.x);
      bbox_.ymax = std::max(bbox_.ymax, s.y);
    }
    const double span = std::max({bbox_.width(), bbox_.height(), 1e-300});
    side_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(sites_.size()))));
    cell_ = span / static_cast<double>(side_);
    buckets_.assign(side_ * side_, {});
    for (std::size_t i = 0; i < sites_.size(); ++i) buckets_[bucket(sites_[i])].push_back(i);
  }

  /// Index of the nearest site; exact ties go to the lower index.
  [[nodiscard]] std::size_t operator()(const Location& s) const {
    const auto [bi, bj] = coords(s);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t ring = 0; ring <= side_; ++ring) {
      const long lo_i = static_cast<long>(bi) - static_cast<long>(ring);
      const long hi_i = static_cast<long>(bi) + static_cast<long>(ring);
      const long lo_j = static_cast<long>(bj) - static_cast<long>(ring);
      const long hi_j = static_cast<long>(bj) + static_cast<long>(ring);
      for (long j = lo_j; j <= hi_j; ++j) {
        for (long i = lo_i; i <= hi_i; ++i) {
          if (i != lo_i && i != hi_i && j != lo_j && j != hi_j) continue;
          if (i < 0 || j < 0 || i >= static_cast<long>(side_) || j >= static_cast<long>(side_)) continue;
          for (auto k : buckets_[static_cast<std::size_t>(j) * side_ + static_cast<std::size_t>(i)]) {
            const double d = distance(s, sites_[k]);
            if (d < best_d || (d == best_d && k < best)) {
              best_d = d;
              best = k;
            }
          }
        }
      }
      // Every unvisited bucket is at least `ring * cell_` away from s.
      if (best_d < static_cast<double>(ring) * cell_) break;
    }
    return best;
  }

 private:
  [[nodiscard]] std::pair<std::size_t, std::size_t> coords(const Location& s) const {
    auto axis = [&](double v, double lo) {
      const double k = std::floor((v - lo) / cell_);
      return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(side_ - 1)));
    };
    return {axis(s.x, bbox_.xmin), axis(s.y, bbox_.ymin)};
  }
  [[nodiscard]] std::size_t bucket(const Location& s) const {
    const auto [i, j] = coords(s);
    return j * side_ + i;
  }

  std::vector<Location> sites_;
  BoundingBox bbox_;
  std::size_t side_ = 1;
  double cell_ = 1.0;
  std::vector<std::vector<std::size_t>> buckets_;
};

struct TwoStageSimulationSpec {
  Design stage1;
  Design stage2;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  Eigen::VectorXd alpha;
  MarkFamily marks = MarkFamily::Logistic;
  std::optional<double> sigma_iid;
  NonspatialDistributionSpec nu;
  std::vector<std::string> nu_names;
};

struct BivariateSimulationSpec {
  Design design;
  std::array<Eigen::VectorXd, 2> beta;
  std::array<Eigen::VectorXd, 2> alpha;
  NonspatialDistributionSpec nu;
  NonspatialBounds bounds;
  std::vector<std::string> nu_names;
};

struct SimulationResult {
  PointPattern pattern;
  /// Per process: one entry for the two-stage model, one per mark otherwise.
  std::vector<double> lambda_max;
  std::vector<std::size_t> proposed;
  /// Proposals whose intensity exceeded the lattice maximum (retained with probability 1).
  std::size_t clamped = 0;
  /// Events in the retained pattern per covariate unit.
  std::vector<std::size_t> unit_counts;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<Location> homogeneous_poisson(const Window& window, double rate, Rng& rng) {
  const double mean = rate * window.area();
  if (!std::isfinite(mean)) fail(ErrorKind::NonFiniteIntensity, "maximum intensity is not finite");
  const auto n = std::poisson_distribution<long long>(mean)(rng);
  std::vector<Location> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) pts.push_back(window.boundary().sample_uniform(rng));
  return pts;
}

inline void check_lattice_layout(const std::optional<GPRealization>& gp, std::size_t blocks) {
  if (!gp) return;
  const auto n = gp->locations.size();
  if (n == 0) fail(ErrorKind::InvalidArgument, "latent realization has no locations");
  if (static_cast<std::size_t>(gp->values.size()) != blocks * n &&
      !(blocks == 1 && static_cast<std::size_t>(gp->values.size()) == 2 * n)) {
    fail(ErrorKind::InvalidArgument, "latent realization has the wrong length for its locations");
  }
  if (!gp->values.allFinite()) fail(ErrorKind::NonFiniteIntensity, "latent realization is not finite");
}

}  // namespace detail

/// Two-stage thinning. `gp` holds the latent values on the lattice: length n
/// drives the location stage only, length 2n the location stage then the mark
/// stage. Without `gp` the lattice defaults to make_lattice(field).
inline SimulationResult simulate_two_stage(const TwoStageSimulationSpec& spec, const CovariateField& field,
                                           const std::optional<GPRealization>& gp, std::uint64_t seed,
                                           std::span<const Location> lattice = {}) {
  const DesignRow row1(spec.stage1, field);
  const DesignRow row2(spec.stage2, field);
  if (static_cast<std::size_t>(spec.beta.size()) != row1.width()) fail(ErrorKind::InvalidArgument, "beta length mismatch");
  if (static_cast<std::size_t>(spec.gamma.size()) != row2.width()) fail(ErrorKind::InvalidArgument, "gamma length mismatch");
  if (static_cast<std::size_t>(spec.alpha.size()) != spec.nu.size()) fail(ErrorKind::InvalidArgument, "alpha length mismatch");
  if (spec.marks == MarkFamily::Linear && (!spec.sigma_iid || !(*spec.sigma_iid > 0.0))) {
    fail(ErrorKind::InvalidArgument, "linear marks need a positive sigma_iid");
  }
  detail::check_lattice_layout(gp, 1);

  std::vector<Location> sites;
  if (gp) {
    sites = gp->locations;
  } else if (!lattice.empty()) {
    sites.assign(lattice.begin(), lattice.end());
  } else {
    sites = make_lattice(field);
  }
  const auto n_sites = static_cast<Eigen::Index>(sites.size());
  const bool stage2_gp = gp && gp->values.size() == 2 * n_sites;
  auto omega1 = [&](std::size_t k) { return gp ? gp->values(static_cast<Eigen::Index>(k)) : 0.0; };
  auto omega2 = [&](std::size_t k) { return stage2_gp ? gp->values(n_sites + static_cast<Eigen::Index>(k)) : 0.0; };

  // Maximum log intensity over the lattice sites.
  double log_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const auto u = field.unit_of(sites[k]);
    if (!u) continue;
    log_max = std::max(log_max, row1(field.unit_covariates(*u)).dot(spec.beta) + omega1(k));
  }
  if (!gp) {
    // Without a latent process the maximum over units is exact.
    for (std::size_t u = 0; u < field.unit_count(); ++u) {
      log_max = std::max(log_max, row1(field.unit_covariates(u)).dot(spec.beta));
    }
  }
  if (!std::isfinite(log_max) || !std::isfinite(std::exp(log_max))) {
    fail(ErrorKind::NonFiniteIntensity, "maximum intensity over the lattice is not finite");
  }

  auto rng = make_rng(seed, 0x7473);
  SimulationResult result;
  result.lambda_max = {std::exp(log_max)};
  result.unit_counts.assign(field.unit_count(), 0);
  result.pattern = PointPattern(field.window(), spec.marks == MarkFamily::Logistic ? MarkKind::Binary : MarkKind::Real,
                                spec.nu.size(), spec.nu_names);

  const auto proposals = detail::homogeneous_poisson(field.window(), result.lambda_max[0], rng);
  result.proposed = {proposals.size()};
  std::optional<NearestSite> nearest;
  if (gp) nearest.emplace(sites);

  struct Kept {
    Location s;
    std::size_t unit;
    std::size_t site;
  };
  std::vector<Kept> kept;
  for (const auto& s : proposals) {
    const auto u = field.unit_of(s);
    if (!u) continue;  // masked grid cell or boundary sliver: zero intensity
    const std::size_t site = nearest ? (*nearest)(s) : 0;
    const double log_ratio = row1(field.unit_covariates(*u)).dot(spec.beta) + omega1(site) - log_max;
    if (log_ratio > 0.0) ++result.clamped;
    if (log_ratio >= 0.0 || uniform01(rng) < std::exp(log_ratio)) kept.push_back({s, *u, site});
  }

  // Nonspatial covariates and marks are assigned after thinning.
  for (const auto& k : kept) {
    Eigen::VectorXd nu = draw_nonspatial(spec.nu, rng);
    const double eta = row2(field.unit_covariates(k.unit)).dot(spec.gamma) + nu.dot(spec.alpha) + omega2(k.site);
    double mark = 0.0;
    if (spec.marks == MarkFamily::Logistic) {
      mark = uniform01(rng) < stats::sigmoid(eta) ? 1.0 : 0.0;
    } else {
      mark = eta + *spec.sigma_iid * standard_normal(rng);
    }
    result.pattern.add(Event{k.s, mark, std::move(nu)});
    ++result.unit_counts[k.unit];
  }
  return result;
}

/// Bivariate mark model thinning. Every continuous nonspatial distribution
/// must be bounded inside its recorded bound; `gp`, when present, carries the
/// two mark processes in block layout.
inline SimulationResult simulate_bivariate(const BivariateSimulationSpec& spec, const CovariateField& field,
                                           const std::optional<GPRealization>& gp, std::uint64_t seed,
                                           std::span<const Location> lattice = {}) {
  const DesignRow row(spec.design, field);
  if (spec.bounds.size() != spec.nu.size()) {
    fail(ErrorKind::UnboundedCovariate, "every nonspatial covariate needs a recorded bound");
  }
  SimulationResult result;
  for (std::size_t j = 0; j < spec.nu.size(); ++j) {
    const auto& d = spec.nu[j];
    const auto& b = spec.bounds[j];
    const auto support = d.support();
    if (!support) fail(ErrorKind::UnboundedCovariate, "nonspatial covariate " + std::to_string(j + 1) + " is unbounded");
    if (b.kind == CovariateBound::Kind::Binary) {
      if (d.kind != NonspatialDistribution::Kind::Bernoulli) {
        fail(ErrorKind::UnboundedCovariate, "binary bound on a non-Bernoulli covariate " + std::to_string(j + 1));
      }
    } else if (support->first < b.lower || support->second > b.upper) {
      fail(ErrorKind::UnboundedCovariate, "nonspatial covariate " + std::to_string(j + 1) + " exceeds its bound");
    }
    if (!d.is_flat_over(b)) {
      result.warnings.push_back("nonspatial covariate " + std::to_string(j + 1) +
                                " is not uniform/equal-probability over its bound; its coefficients may not be "
                                "recoverable with the bivariate mark model");
    }
  }
  for (int k = 0; k < 2; ++k) {
    if (static_cast<std::size_t>(spec.beta[k].size()) != row.width()) fail(ErrorKind::InvalidArgument, "beta length mismatch");
    if (static_cast<std::size_t>(spec.alpha[k].size()) != spec.nu.size()) fail(ErrorKind::InvalidArgument, "alpha length mismatch");
  }
  if (gp && static_cast<std::size_t>(gp->values.size()) != 2 * gp->locations.size()) {
    fail(ErrorKind::InvalidArgument, "bivariate simulation needs a two-process latent realization");
  }

  std::vector<Location> sites;
  if (gp) {
    sites = gp->locations;
  } else if (!lattice.empty()) {
    sites.assign(lattice.begin(), lattice.end());
  } else {
    sites = make_lattice(field);
  }
  const auto n_sites = static_cast<Eigen::Index>(sites.size());
  auto omega = [&](int k, std::size_t site) {
    return gp ? gp->values(k * n_sites + static_cast<Eigen::Index>(site)) : 0.0;
  };
  std::optional<NearestSite> nearest;
  if (gp) nearest.emplace(sites);

  auto rng = make_rng(seed, 0x6276);
  result.unit_counts.assign(field.unit_count(), 0);
  result.pattern = PointPattern(field.window(), MarkKind::Category, spec.nu.size(), spec.nu_names);

  for (int k = 0; k < 2; ++k) {
    double log_max = -std::numeric_limits<double>::infinity();
    for (std::size_t site = 0; site < sites.size(); ++site) {
      const auto u = field.unit_of(sites[site]);
      if (!u) continue;
      log_max = std::max(log_max, row(field.unit_covariates(*u)).dot(spec.beta[k]) + omega(k, site));
    }
    if (!gp) {
      for (std::size_t u = 0; u < field.unit_count(); ++u) {
        log_max = std::max(log_max, row(field.unit_covariates(u)).dot(spec.beta[k]));
      }
    }
    log_max += max_nonspatial_contribution(spec.alpha[k], spec.bounds);
    if (!std::isfinite(log_max) || !std::isfinite(std::exp(log_max))) {
      fail(ErrorKind::NonFiniteIntensity, "maximum intensity for mark " + std::to_string(k + 1) + " is not finite");
    }
    result.lambda_max.push_back(std::exp(log_max));
    const auto proposals = detail::homogeneous_poisson(field.window(), result.lambda_max.back(), rng);
    result.proposed.push_back(proposals.size());
    for (const auto& s : proposals) {
      // Nonspatial covariates are drawn before thinning and shape the retention.
      Eigen::VectorXd nu = draw_nonspatial(spec.nu, rng);
      const auto u = field.unit_of(s);
      if (!u) continue;
      const std::size_t site = nearest ? (*nearest)(s) : 0;
      const double log_ratio =
          row(field.unit_covariates(*u)).dot(spec.beta[k]) + nu.dot(spec.alpha[k]) + omega(k, site) - log_max;
      if (log_ratio > 0.0) ++result.clamped;
      if (log_ratio >= 0.0 || uniform01(rng) < std::exp(log_ratio)) {
        result.pattern.add(Event{s, static_cast<double>(k + 1), std::move(nu)});
        ++result.unit_counts[*u];
      }
    }
  }
  return result;
}

}  // namespace tscox

#endif  // TSCOX_SIMULATE_HPP
