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

#ifndef TSCOX_MODEL_HPP
#define TSCOX_MODEL_HPP

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tscox/covariance.hpp"
#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"

/// \file
/// Model specifications and the parameter state shared by simulation,
/// likelihood and inference.

namespace tscox {

enum class ModelFamily { TwoStage, Bivariate };

/// Second-stage (mark) regression family.
enum class MarkFamily { Logistic, Linear };

/// Spatial covariate selection for one linear predictor.
struct Design {
  bool intercept = true;
  std::vector<std::string> covariates;

  [[nodiscard]] std::size_t width() const { return covariates.size() + (intercept ? 1 : 0); }

  [[nodiscard]] std::vector<std::string> coefficient_names() const {
    std::vector<std::string> out;
    if (intercept) out.emplace_back("intercept");
    for (const auto& c : covariates) out.push_back(c);
    return out;
  }
};

/// Design bound to a field's columns; turns an attribute vector into a design row.
class DesignRow {
 public:
  DesignRow() = default;
  DesignRow(const Design& design, const CovariateField& field)
      : intercept_(design.intercept), columns_(field.columns(design.covariates)) {}

  [[nodiscard]] std::size_t width() const { return columns_.size() + (intercept_ ? 1 : 0); }

  [[nodiscard]] Eigen::VectorXd operator()(const Eigen::VectorXd& z) const {
    Eigen::VectorXd row(static_cast<Eigen::Index>(width()));
    Eigen::Index k = 0;
    if (intercept_) row(k++) = 1.0;
    for (auto c : columns_) row(k++) = z(static_cast<Eigen::Index>(c));
    return row;
  }

 private:
  bool intercept_ = true;
  std::vector<std::size_t> columns_;
};

/// Two-stage models:
///   1 - no latent process;
///   2 - latent process in the location stage only;
///   3 - independent latent processes in both stages;
///   4 - cross-correlated (bivariate) latent process across stages.
/// The bivariate mark model has one intensity per mark with optional
/// cross-correlated latent processes.
struct ModelSpec {
  ModelFamily family = ModelFamily::TwoStage;
  int model = 1;
  MarkFamily marks = MarkFamily::Logistic;
  bool with_gp = false;
  /// Location-stage covariates; also used by both marks of the bivariate model.
  Design stage1;
  /// Spatial covariates of the mark stage.
  Design stage2;
  /// Nonspatial covariate names, in pattern column order.
  std::vector<std::string> nonspatial;
  /// Knot layout and fixed range; the sigmas and rho here are not used for fitting.
  std::optional<GPSpec> gp;

  static ModelSpec two_stage(int model, MarkFamily marks) {
    ModelSpec s;
    s.family = ModelFamily::TwoStage;
    s.model = model;
    s.marks = marks;
    return s;
  }

  static ModelSpec bivariate(bool with_gp) {
    ModelSpec s;
    s.family = ModelFamily::Bivariate;
    s.with_gp = with_gp;
    s.stage2 = Design{false, {}};
    return s;
  }

  [[nodiscard]] bool is_two_stage() const { return family == ModelFamily::TwoStage; }
  [[nodiscard]] bool has_gp() const { return is_two_stage() ? model >= 2 : with_gp; }
  /// Number of latent processes carried by each replicate's knot vector.
  [[nodiscard]] int latent_processes() const {
    if (!has_gp()) return 0;
    if (is_two_stage()) return model == 2 ? 1 : 2;
    return 2;
  }
  [[nodiscard]] bool uses_sigma2() const { return latent_processes() == 2; }
  [[nodiscard]] bool uses_rho() const { return has_gp() && (is_two_stage() ? model == 4 : true); }
  [[nodiscard]] bool uses_sigma_iid() const { return is_two_stage() && marks == MarkFamily::Linear; }

  void validate() const {
    if (is_two_stage() && (model < 1 || model > 4)) fail(ErrorKind::Config, "two-stage model must be 1, 2, 3 or 4");
    if (has_gp()) {
      if (!gp) fail(ErrorKind::Config, "model with a latent process needs a knot layout and range");
      if (gp->knots.empty()) fail(ErrorKind::Config, "knot layout is empty");
      if (!(gp->phi > 0.0)) fail(ErrorKind::Config, "range phi must be positive");
    }
  }
};

/// One point in parameter space. Two-stage models use beta, gamma, alpha and
/// sigma_iid (linear marks); the bivariate mark model uses beta_mark and
/// alpha_mark. omega_star holds each replicate's knot values in block layout.
struct ParameterState {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  Eigen::VectorXd alpha;
  std::array<Eigen::VectorXd, 2> beta_mark;
  std::array<Eigen::VectorXd, 2> alpha_mark;
  double sigma_iid = 1.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;
  std::vector<Eigen::VectorXd> omega_star;
};

}  // namespace tscox

#endif  // TSCOX_MODEL_HPP
