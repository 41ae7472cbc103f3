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

#ifndef TSCOX_INTEGRATION_HPP
#define TSCOX_INTEGRATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"
#include "tscox/random.hpp"

/// \file
/// Integration points for the intensity integral over the window, and the
/// closed-form integral over bounded nonspatial covariates.

namespace tscox {

struct IntegrationScheme {
  std::vector<Location> points;
  std::vector<double> weights;
  /// Areal unit (or grid cell) of each point; -1 when unknown.
  std::vector<long> unit_index;

  [[nodiscard]] std::size_t size() const { return points.size(); }

  [[nodiscard]] double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  void validate() const {
    if (points.size() != weights.size()) fail(ErrorKind::InvalidArgument, "scheme points and weights differ in length");
    if (!unit_index.empty() && unit_index.size() != points.size()) {
      fail(ErrorKind::InvalidArgument, "scheme unit index has the wrong length");
    }
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidArgument, "integration weights must be positive");
    }
  }
};

/// Points per unit: max(1, round(budget * area_u / total area)).
inline std::vector<std::size_t> allocate_points(const std::vector<double>& areas, std::size_t budget) {
  if (budget < areas.size()) {
    fail(ErrorKind::InsufficientBudget, "integration budget " + std::to_string(budget) + " is below the unit count " +
                                            std::to_string(areas.size()));
  }
  double total = 0.0;
  for (double a : areas) total += a;
  std::vector<std::size_t> counts;
  counts.reserve(areas.size());
  for (double a : areas) {
    const double share = std::round(static_cast<double>(budget) * a / total);
    counts.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(share)));
  }
  return counts;
}

/// Uniform random points inside each unit, with each point weighted by its
/// unit's area over its unit's point count.
inline IntegrationScheme place_integration_points(const CovariateField& field, std::size_t budget,
                                                  std::uint64_t seed) {
  std::vector<double> areas;
  areas.reserve(field.unit_count());
  for (std::size_t u = 0; u < field.unit_count(); ++u) areas.push_back(field.unit_area(u));
  const auto counts = allocate_points(areas, budget);
  auto rng = make_rng(seed, 0x696e74);
  IntegrationScheme scheme;
  for (std::size_t u = 0; u < counts.size(); ++u) {
    const double w = areas[u] / static_cast<double>(counts[u]);
    for (std::size_t k = 0; k < counts[u]; ++k) {
      scheme.points.push_back(field.sample_in_unit(u, rng));
      scheme.weights.push_back(w);
      scheme.unit_index.push_back(static_cast<long>(u));
    }
  }
  return scheme;
}

inline IntegrationScheme place_integration_points(const ArealPartition& partition, std::size_t budget,
                                                  std::uint64_t seed) {
  return place_integration_points(CovariateField(partition), budget, seed);
}

/// Quasi-Monte-Carlo estimate sum_i w_i exp(log_intensity_at(p_i)).
template <class LogIntensity>
double integrate_intensity(const IntegrationScheme& scheme, LogIntensity&& log_intensity_at) {
  double total = 0.0;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const double v = std::exp(log_intensity_at(scheme.points[i]));
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteIntensity, "intensity is not finite at an integration point");
    total += scheme.weights[i] * v;
  }
  return total;
}

/// Same estimate from precomputed log intensities at the scheme points.
inline double integrate_intensity(const IntegrationScheme& scheme, const Eigen::VectorXd& log_intensity) {
  double total = 0.0;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    total += scheme.weights[i] * std::exp(log_intensity(static_cast<Eigen::Index>(i)));
  }
  if (!std::isfinite(total)) fail(ErrorKind::NonFiniteIntensity, "intensity integral is not finite");
  return total;
}

struct CovariateBound {
  enum class Kind { Continuous, Binary };
  Kind kind = Kind::Continuous;
  double lower = 0.0;
  double upper = 1.0;

  static CovariateBound continuous(double lower, double upper) {
    if (!(lower < upper)) fail(ErrorKind::InvalidArgument, "covariate bound needs lower < upper");
    return {Kind::Continuous, lower, upper};
  }
  static CovariateBound binary() { return {Kind::Binary, 0.0, 1.0}; }
};

using NonspatialBounds = std::vector<CovariateBound>;

/// Integral of exp(nu' alpha) over the bounded nonspatial domain: continuous
/// covariates integrate over [lower, upper], binary ones sum over {0, 1}.
inline double nonspatial_integral(const Eigen::VectorXd& alpha, const NonspatialBounds& bounds) {
  if (static_cast<std::size_t>(alpha.size()) != bounds.size()) {
    fail(ErrorKind::InvalidArgument, "nonspatial bounds do not cover every coefficient");
  }
  double out = 1.0;
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    const double a = alpha(static_cast<Eigen::Index>(j));
    const auto& b = bounds[j];
    if (b.kind == CovariateBound::Kind::Binary) {
      out *= std::exp(a) + 1.0;
    } else if (std::abs(a) < 1e-10) {
      out *= b.upper - b.lower;
    } else {
      out *= (std::exp(b.upper * a) - std::exp(b.lower * a)) / a;
    }
  }
  return out;
}

/// max over the bounded domain of nu' alpha.
inline double max_nonspatial_contribution(const Eigen::VectorXd& alpha, const NonspatialBounds& bounds) {
  if (static_cast<std::size_t>(alpha.size()) != bounds.size()) {
    fail(ErrorKind::InvalidArgument, "nonspatial bounds do not cover every coefficient");
  }
  double out = 0.0;
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    const double a = alpha(static_cast<Eigen::Index>(j));
    out += std::max(a * bounds[j].lower, a * bounds[j].upper);
  }
  return out;
}

}  // namespace tscox

#endif  // TSCOX_INTEGRATION_HPP
