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

#ifndef TSCOX_LIKELIHOOD_HPP
#define TSCOX_LIKELIHOOD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tscox/covariance.hpp"
#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"
#include "tscox/integration.hpp"
#include "tscox/model.hpp"
#include "tscox/pattern.hpp"
#include "tscox/stats.hpp"

/// \file
/// Log-likelihoods of the two-stage models and the bivariate mark model, with
/// pointwise contributions for WAIC and the log prior.
///
/// Pointwise terms spread each replicate's intensity integral evenly over its
/// events, so the pointwise entries always sum to the total whenever every
/// replicate has at least one event.

namespace tscox {

struct LogLikelihood {
  double total = 0.0;
  Eigen::VectorXd pointwise;
  /// Logistic probabilities clamped to [1e-12, 1 - 1e-12].
  std::size_t clamped = 0;
};

namespace detail {

constexpr double kProbabilityFloor = 1e-12;

inline double bernoulli_log(double y, double eta, std::size_t* clamped) {
  const double p = stats::sigmoid(eta);
  if (p < kProbabilityFloor || p > 1.0 - kProbabilityFloor) {
    if (clamped) ++*clamped;
    const double pc = std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
    return y > 0.5 ? std::log(pc) : std::log1p(-pc);
  }
  return y > 0.5 ? stats::log_sigmoid(eta) : stats::log_sigmoid(-eta);
}

inline double normal_log(double y, double mu, double sigma) {
  const double z = (y - mu) / sigma;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma) - 0.5 * z * z;
}

inline Eigen::MatrixXd design_matrix(const DesignRow& row, const CovariateField& field,
                                     std::span<const Location> locs) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(locs.size()), static_cast<Eigen::Index>(row.width()));
  for (std::size_t i = 0; i < locs.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = row(field.covariates_at(locs[i])).transpose();
  }
  return x;
}

struct ReplicateData {
  Eigen::MatrixXd x1;     // location-stage design at events
  Eigen::MatrixXd x2;     // mark-stage spatial design at events
  Eigen::MatrixXd nu;     // nonspatial covariates at events
  Eigen::VectorXd marks;  // observed marks
  Eigen::MatrixXd basis;  // predictive-process weights at events
  std::size_t n = 0;
};

inline ReplicateData prepare_replicate(const PointPattern& pattern, const CovariateField& field, const DesignRow& row1,
                                       const DesignRow* row2, const KnotCorrelation* knots) {
  ReplicateData d;
  const auto locs = pattern.locations();
  d.n = locs.size();
  d.x1 = design_matrix(row1, field, locs);
  if (row2) d.x2 = design_matrix(*row2, field, locs);
  const auto n = static_cast<Eigen::Index>(d.n);
  d.nu.resize(n, static_cast<Eigen::Index>(pattern.nu_dim()));
  d.marks.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = pattern.events()[static_cast<std::size_t>(i)];
    if (pattern.nu_dim() > 0) d.nu.row(i) = e.nu.transpose();
    d.marks(i) = e.mark;
  }
  if (knots) d.basis = knots->basis(locs);
  return d;
}

inline std::optional<KnotCorrelation> knots_for(const ModelSpec& spec) {
  if (!spec.has_gp()) return std::nullopt;
  return KnotCorrelation(spec.gp->knots, spec.gp->phi);
}

}  // namespace detail

/// Precomputed designs for the two-stage likelihood: replicates share the
/// window, the integration scheme and the parameters, but each carries its
/// own latent knot values.
class TwoStageLikelihood {
 public:
  TwoStageLikelihood(ModelSpec spec, const CovariateField& field, std::vector<PointPattern> replicates,
                     IntegrationScheme scheme)
      : spec_(std::move(spec)), scheme_(std::move(scheme)) {
    if (!spec_.is_two_stage()) fail(ErrorKind::InvalidArgument, "not a two-stage model");
    spec_.validate();
    scheme_.validate();
    if (replicates.empty()) fail(ErrorKind::InvalidArgument, "no replicates to fit");
    knots_ = detail::knots_for(spec_);
    const DesignRow row1(spec_.stage1, field);
    const DesignRow row2(spec_.stage2, field);
    x1_int_ = detail::design_matrix(row1, field, scheme_.points);
    weights_ = Eigen::Map<const Eigen::VectorXd>(scheme_.weights.data(), static_cast<Eigen::Index>(scheme_.size()));
    if (knots_) basis_int_ = knots_->basis(scheme_.points);
    for (const auto& p : replicates) {
      if (p.nu_dim() != spec_.nonspatial.size()) {
        fail(ErrorKind::InvalidArgument, "pattern has " + std::to_string(p.nu_dim()) +
                                             " nonspatial covariates, model expects " +
                                             std::to_string(spec_.nonspatial.size()));
      }
      for (const auto& e : p.events()) {
        if (spec_.marks == MarkFamily::Logistic && e.mark != 0.0 && e.mark != 1.0) {
          fail(ErrorKind::InvalidMark, "logistic marks must be 0 or 1");
        }
      }
      data_.push_back(detail::prepare_replicate(p, field, row1, &row2, knots_ ? &*knots_ : nullptr));
      event_count_ += p.size();
    }
  }

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t replicate_count() const { return data_.size(); }
  [[nodiscard]] std::size_t event_count() const { return event_count_; }
  [[nodiscard]] std::size_t events_in(std::size_t r) const { return data_[r].n; }
  [[nodiscard]] const KnotCorrelation* knots() const { return knots_ ? &*knots_ : nullptr; }
  [[nodiscard]] std::size_t knot_count() const { return knots_ ? knots_->size() : 0; }
  [[nodiscard]] Eigen::Index stage1_width() const { return x1_int_.cols(); }
  [[nodiscard]] Eigen::Index stage2_width() const { return data_.front().x2.cols(); }

  /// Location-stage log-likelihood of replicate r.
  [[nodiscard]] double stage1(const ParameterState& st, std::size_t r, Eigen::VectorXd* pointwise = nullptr) const {
    const auto& d = data_[r];
    Eigen::VectorXd log_int = x1_int_ * st.beta;
    Eigen::VectorXd log_ev = d.x1 * st.beta;
    if (spec_.has_gp()) {
      const auto m = static_cast<Eigen::Index>(knot_count());
      log_int.noalias() += basis_int_ * st.omega_star[r].head(m);
      log_ev.noalias() += d.basis * st.omega_star[r].head(m);
    }
    const double integral = weights_.dot(log_int.array().exp().matrix());
    if (pointwise) *pointwise = log_ev.array() - (d.n > 0 ? integral / static_cast<double>(d.n) : 0.0);
    return log_ev.sum() - integral;
  }

  /// Mark-stage log-likelihood of replicate r.
  [[nodiscard]] double stage2(const ParameterState& st, std::size_t r, Eigen::VectorXd* pointwise = nullptr,
                              std::size_t* clamped = nullptr) const {
    const auto& d = data_[r];
    Eigen::VectorXd eta = d.x2 * st.gamma;
    if (d.nu.cols() > 0) eta.noalias() += d.nu * st.alpha;
    if (spec_.latent_processes() == 2) {
      const auto m = static_cast<Eigen::Index>(knot_count());
      eta.noalias() += d.basis * st.omega_star[r].tail(m);
    }
    if (pointwise) pointwise->resize(static_cast<Eigen::Index>(d.n));
    double total = 0.0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d.n); ++i) {
      const double term = spec_.marks == MarkFamily::Logistic ? detail::bernoulli_log(d.marks(i), eta(i), clamped)
                                                              : detail::normal_log(d.marks(i), eta(i), st.sigma_iid);
      if (pointwise) (*pointwise)(i) = term;
      total += term;
    }
    return total;
  }

  [[nodiscard]] LogLikelihood evaluate(const ParameterState& st, bool with_pointwise = true) const {
    check_state(st);
    LogLikelihood out;
    if (with_pointwise) out.pointwise.resize(static_cast<Eigen::Index>(event_count_));
    Eigen::Index offset = 0;
    for (std::size_t r = 0; r < data_.size(); ++r) {
      Eigen::VectorXd p1;
      Eigen::VectorXd p2;
      out.total += stage1(st, r, with_pointwise ? &p1 : nullptr);
      out.total += stage2(st, r, with_pointwise ? &p2 : nullptr, &out.clamped);
      const auto n = static_cast<Eigen::Index>(data_[r].n);
      if (with_pointwise && n > 0) out.pointwise.segment(offset, n) = p1 + p2;
      offset += n;
    }
    return out;
  }

  void check_state(const ParameterState& st) const {
    if (st.beta.size() != stage1_width()) fail(ErrorKind::InvalidArgument, "beta has the wrong length");
    if (st.gamma.size() != stage2_width()) fail(ErrorKind::InvalidArgument, "gamma has the wrong length");
    if (static_cast<std::size_t>(st.alpha.size()) != spec_.nonspatial.size()) {
      fail(ErrorKind::InvalidArgument, "alpha has the wrong length");
    }
    if (spec_.has_gp()) {
      if (st.omega_star.size() != data_.size()) fail(ErrorKind::InvalidArgument, "one knot vector per replicate expected");
      for (const auto& w : st.omega_star) {
        if (static_cast<std::size_t>(w.size()) != knot_count() * static_cast<std::size_t>(spec_.latent_processes())) {
          fail(ErrorKind::InvalidArgument, "knot vector has the wrong length");
        }
      }
    }
  }

 private:
  ModelSpec spec_;
  IntegrationScheme scheme_;
  std::optional<KnotCorrelation> knots_;
  Eigen::MatrixXd x1_int_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd basis_int_;
  std::vector<detail::ReplicateData> data_;
  std::size_t event_count_ = 0;
};

/// Bivariate mark model: one intensity per mark over space and the bounded
/// nonspatial domain, the integral separating into a spatial estimate times
/// the closed-form nonspatial factor.
class BivariateLikelihood {
 public:
  BivariateLikelihood(ModelSpec spec, const CovariateField& field, std::vector<PointPattern> replicates,
                      IntegrationScheme scheme, NonspatialBounds bounds)
      : spec_(std::move(spec)), scheme_(std::move(scheme)), bounds_(std::move(bounds)) {
    if (spec_.is_two_stage()) fail(ErrorKind::InvalidArgument, "not a bivariate mark model");
    spec_.validate();
    scheme_.validate();
    if (replicates.empty()) fail(ErrorKind::InvalidArgument, "no replicates to fit");
    if (bounds_.size() != spec_.nonspatial.size()) {
      fail(ErrorKind::UnboundedCovariate, "every nonspatial covariate needs a bound");
    }
    knots_ = detail::knots_for(spec_);
    const DesignRow row(spec_.stage1, field);
    x_int_ = detail::design_matrix(row, field, scheme_.points);
    weights_ = Eigen::Map<const Eigen::VectorXd>(scheme_.weights.data(), static_cast<Eigen::Index>(scheme_.size()));
    if (knots_) basis_int_ = knots_->basis(scheme_.points);
    for (const auto& p : replicates) {
      if (p.nu_dim() != bounds_.size()) fail(ErrorKind::InvalidArgument, "pattern nonspatial dimension mismatch");
      for (const auto& e : p.events()) {
        if (e.mark != 1.0 && e.mark != 2.0) {
          fail(ErrorKind::InvalidMark, "bivariate marks must be 1 or 2, got " + std::to_string(e.mark));
        }
      }
      data_.push_back(detail::prepare_replicate(p, field, row, nullptr, knots_ ? &*knots_ : nullptr));
      event_count_ += p.size();
    }
  }

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] const NonspatialBounds& bounds() const { return bounds_; }
  [[nodiscard]] std::size_t replicate_count() const { return data_.size(); }
  [[nodiscard]] std::size_t event_count() const { return event_count_; }
  [[nodiscard]] const KnotCorrelation* knots() const { return knots_ ? &*knots_ : nullptr; }
  [[nodiscard]] std::size_t knot_count() const { return knots_ ? knots_->size() : 0; }
  [[nodiscard]] Eigen::Index design_width() const { return x_int_.cols(); }

  /// Contribution of mark k (0 or 1) in replicate r. Pointwise entries are
  /// written only for events of that mark; `integral` receives the mark's
  /// full intensity integral.
  [[nodiscard]] double mark_term(const ParameterState& st, std::size_t r, int k, Eigen::VectorXd* pointwise = nullptr,
                                 double* integral = nullptr) const {
    const auto& d = data_[r];
    const auto& beta = st.beta_mark[static_cast<std::size_t>(k)];
    const auto& alpha = st.alpha_mark[static_cast<std::size_t>(k)];
    const auto m = static_cast<Eigen::Index>(knot_count());
    Eigen::VectorXd log_int = x_int_ * beta;
    if (spec_.has_gp()) log_int.noalias() += basis_int_ * st.omega_star[r].segment(k * m, m);
    const double spatial = weights_.dot(log_int.array().exp().matrix());
    const double mark_integral = spatial * nonspatial_integral(alpha, bounds_);
    if (integral) *integral = mark_integral;
    double sum = 0.0;
    const double label = static_cast<double>(k + 1);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d.n); ++i) {
      if (d.marks(i) != label) continue;
      double v = d.x1.row(i).dot(beta);
      if (d.nu.cols() > 0) v += d.nu.row(i).dot(alpha);
      if (spec_.has_gp()) v += d.basis.row(i).dot(st.omega_star[r].segment(k * m, m));
      if (pointwise) (*pointwise)(i) = v;
      sum += v;
    }
    if (!std::isfinite(mark_integral)) return -std::numeric_limits<double>::infinity();
    return sum - mark_integral;
  }

  [[nodiscard]] LogLikelihood evaluate(const ParameterState& st, bool with_pointwise = true) const {
    check_state(st);
    LogLikelihood out;
    if (with_pointwise) out.pointwise.resize(static_cast<Eigen::Index>(event_count_));
    Eigen::Index offset = 0;
    for (std::size_t r = 0; r < data_.size(); ++r) {
      const auto n = static_cast<Eigen::Index>(data_[r].n);
      Eigen::VectorXd logs = Eigen::VectorXd::Zero(n);
      double integrals = 0.0;
      for (int k = 0; k < 2; ++k) {
        double integral = 0.0;
        out.total += mark_term(st, r, k, &logs, &integral);
        integrals += integral;
      }
      if (with_pointwise && n > 0) out.pointwise.segment(offset, n) = logs.array() - integrals / static_cast<double>(n);
      offset += n;
    }
    return out;
  }

  void check_state(const ParameterState& st) const {
    for (std::size_t k = 0; k < 2; ++k) {
      if (st.beta_mark[k].size() != design_width()) fail(ErrorKind::InvalidArgument, "beta_mark has the wrong length");
      if (static_cast<std::size_t>(st.alpha_mark[k].size()) != bounds_.size()) {
        fail(ErrorKind::InvalidArgument, "alpha_mark has the wrong length");
      }
    }
    if (spec_.has_gp()) {
      if (st.omega_star.size() != data_.size()) fail(ErrorKind::InvalidArgument, "one knot vector per replicate expected");
      for (const auto& w : st.omega_star) {
        if (static_cast<std::size_t>(w.size()) != 2 * knot_count()) {
          fail(ErrorKind::InvalidArgument, "knot vector has the wrong length");
        }
      }
    }
  }

 private:
  ModelSpec spec_;
  IntegrationScheme scheme_;
  NonspatialBounds bounds_;
  std::optional<KnotCorrelation> knots_;
  Eigen::MatrixXd x_int_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd basis_int_;
  std::vector<detail::ReplicateData> data_;
  std::size_t event_count_ = 0;
};

inline LogLikelihood loglik_two_stage(const ModelSpec& spec, const ParameterState& state, const PointPattern& pattern,
                                      const IntegrationScheme& scheme, const CovariateField& field) {
  return TwoStageLikelihood(spec, field, {pattern}, scheme).evaluate(state);
}

inline LogLikelihood loglik_bivariate(const ModelSpec& spec, const ParameterState& state, const PointPattern& pattern,
                                      const IntegrationScheme& scheme, const NonspatialBounds& bounds,
                                      const CovariateField& field) {
  return BivariateLikelihood(spec, field, {pattern}, scheme, bounds).evaluate(state);
}

namespace prior {

constexpr double kCoefficientVariance = 100.0;
constexpr double kScaleShape = 2.0;
constexpr double kScaleRate = 0.5;
constexpr double kRhoBound = 0.999;

inline double coefficient(double c) {
  return -0.5 * std::log(2.0 * std::numbers::pi * kCoefficientVariance) - c * c / (2.0 * kCoefficientVariance);
}

inline double coefficients(const Eigen::VectorXd& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += coefficient(c(i));
  return s;
}

/// Inverse-gamma(shape 2, rate 0.5) log density at sigma.
inline double scale(double sigma) {
  if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
  return kScaleShape * std::log(kScaleRate) - std::lgamma(kScaleShape) - (kScaleShape + 1.0) * std::log(sigma) -
         kScaleRate / sigma;
}

inline double correlation(double rho) {
  if (!(std::abs(rho) < kRhoBound)) return -std::numeric_limits<double>::infinity();
  return -std::log(2.0 * kRhoBound);
}

}  // namespace prior

/// Log prior density: N(0, 100) per regression coefficient, inverse-gamma(2, 0.5)
/// per scale parameter, uniform(-0.999, 0.999) for rho, plus the Gaussian
/// density of the knot values under the current cross-covariance.
inline double logprior(const ModelSpec& spec, const ParameterState& st, const KnotCorrelation* knots = nullptr) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double lp = 0.0;
  if (spec.is_two_stage()) {
    lp += prior::coefficients(st.beta) + prior::coefficients(st.gamma) + prior::coefficients(st.alpha);
    if (spec.uses_sigma_iid()) lp += prior::scale(st.sigma_iid);
  } else {
    for (std::size_t k = 0; k < 2; ++k) lp += prior::coefficients(st.beta_mark[k]) + prior::coefficients(st.alpha_mark[k]);
  }
  if (spec.has_gp()) lp += prior::scale(st.sigma1);
  if (spec.uses_sigma2()) lp += prior::scale(st.sigma2);
  if (spec.uses_rho()) lp += prior::correlation(st.rho);
  if (!std::isfinite(lp)) return kNegInf;
  if (spec.has_gp() && knots) {
    const auto m = static_cast<Eigen::Index>(knots->size());
    for (const auto& w : st.omega_star) {
      if (spec.uses_rho()) {
        lp += gp_log_density(*knots, cross_covariance(st.sigma1, st.sigma2, st.rho), w);
      } else {
        lp += gp_log_density(*knots, st.sigma1, w.head(m));
        if (spec.uses_sigma2()) lp += gp_log_density(*knots, st.sigma2, w.tail(m));
      }
    }
  }
  return std::isfinite(lp) ? lp : kNegInf;
}

}  // namespace tscox

#endif  // TSCOX_LIKELIHOOD_HPP
