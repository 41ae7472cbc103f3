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

// Shared builders for unit and acceptance tests.

#ifndef TSCOX_TESTS_FIXTURES_HPP
#define TSCOX_TESTS_FIXTURES_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tscox/tscox.hpp"

namespace tscox::testing {

/// Window [0, n*width] x [0, height] cut into n vertical strips, strip u
/// carrying the single covariate value z[u].
inline CovariateField strip_partition(const std::vector<double>& z, double width, double height,
                                      const std::string& name = "z") {
  std::vector<ArealUnit> units;
  for (std::size_t u = 0; u < z.size(); ++u) {
    Eigen::VectorXd v(1);
    v << z[u];
    const double x0 = width * static_cast<double>(u);
    units.push_back(ArealUnit{Polygon::rectangle(x0, 0.0, x0 + width, height), v});
  }
  const Window w = Window::rectangle(0.0, 0.0, width * static_cast<double>(z.size()), height);
  return CovariateField(ArealPartition(std::move(units), w, {name}));
}

/// Window [0, nx*side] x [0, ny*side] cut into square tracts with two
/// covariates drawn once from a fixed seed.
inline CovariateField tract_partition(std::size_t nx, std::size_t ny, double side, std::uint64_t seed) {
  Rng rng = make_rng(seed, 7);
  std::vector<ArealUnit> units;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      Eigen::VectorXd v(2);
      v << standard_normal(rng), uniform01(rng);
      const double x0 = side * static_cast<double>(i);
      const double y0 = side * static_cast<double>(j);
      units.push_back(ArealUnit{Polygon::rectangle(x0, y0, x0 + side, y0 + side), v});
    }
  }
  const Window w = Window::rectangle(0.0, 0.0, side * static_cast<double>(nx), side * static_cast<double>(ny));
  return CovariateField(ArealPartition(std::move(units), w, {"z1", "z2"}));
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace tscox::testing

#endif  // TSCOX_TESTS_FIXTURES_HPP
