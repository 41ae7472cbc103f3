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

#ifndef TSCOX_COVARIANCE_HPP
#define TSCOX_COVARIANCE_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"
#include "tscox/random.hpp"
#include "tscox/stats.hpp"

/// \file
/// Exponential correlation, the 2x2 cross-covariance between the two latent
/// processes, fixing the range parameter from the data geometry, Gaussian
/// process simulation and the predictive-process interpolation from knots.
///
/// Bivariate vectors are laid out block-wise: every first-process entry, then
/// every second-process entry.

namespace tscox {

inline double exp_correlation(double d, double phi) { return std::exp(-d / phi); }

/// Range fixed so that the 95th percentile of the pairwise distances has
/// correlation 0.05 and the 5th percentile has correlation 0.95, averaged.
inline double fix_phi(const Eigen::MatrixXd& distances) {
  const auto n = distances.rows();
  if (n < 2 || distances.cols() != n) {
    fail(ErrorKind::DegenerateGeometry, "range fixing needs at least two locations");
  }
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back(distances(i, j));
  }
  std::sort(d.begin(), d.end());
  if (d.back() <= 0.0) fail(ErrorKind::DegenerateGeometry, "all pairwise distances are zero");
  const double d95 = stats::quantile_sorted(d, 0.95);
  const double d5 = stats::quantile_sorted(d, 0.05);
  return (d95 / -std::log(0.05) + d5 / -std::log(0.95)) / 2.0;
}

inline double fix_phi(std::span<const Location> locs) { return fix_phi(pairwise_distances(locs)); }

struct GPSpec {
  double sigma1 = 1.0;
  std::optional<double> sigma2;
  std::optional<double> rho;
  double phi = 1.0;
  std::vector<Location> knots;

  void validate(bool bivariate) const {
    if (!(sigma1 > 0.0)) fail(ErrorKind::InvalidArgument, "sigma1 must be positive");
    if (sigma2 && !(*sigma2 > 0.0)) fail(ErrorKind::InvalidArgument, "sigma2 must be positive");
    if (rho && !(std::abs(*rho) < 1.0)) fail(ErrorKind::InvalidArgument, "rho must lie in (-1, 1)");
    if (!(phi > 0.0)) fail(ErrorKind::InvalidArgument, "phi must be positive");
    if (bivariate && (!sigma2 || !rho)) fail(ErrorKind::InvalidArgument, "bivariate layout needs sigma2 and rho");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      for (std::size_t j = i + 1; j < knots.size(); ++j) {
        if (knots[i] == knots[j]) fail(ErrorKind::InvalidArgument, "knots must be pairwise distinct");
      }
    }
  }
};

struct GPRealization {
  std::vector<Location> locations;
  Eigen::VectorXd values;

  [[nodiscard]] bool bivariate() const {
    return static_cast<std::size_t>(values.size()) == 2 * locations.size() && !locations.empty();
  }
};

inline Eigen::Matrix2d cross_covariance(double sigma1, double sigma2, double rho) {
  Eigen::Matrix2d lambda;
  lambda << sigma1 * sigma1, rho * sigma1 * sigma2, rho * sigma1 * sigma2, sigma2 * sigma2;
  return lambda;
}

inline Eigen::MatrixXd correlation_matrix(std::span<const Location> a, std::span<const Location> b, double phi) {
  Eigen::MatrixXd r(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = exp_correlation(distance(a[i], b[j]), phi);
    }
  }
  return r;
}

inline Eigen::MatrixXd correlation_matrix(std::span<const Location> locs, double phi) {
  return correlation_matrix(locs, locs, phi);
}

/// Lambda (x) R with the block layout described above.
inline Eigen::MatrixXd kron_blocks(const Eigen::Matrix2d& lambda, const Eigen::MatrixXd& r) {
  const auto n = r.rows();
  const auto m = r.cols();
  Eigen::MatrixXd out(2 * n, 2 * m);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) out.block(a * n, b * m, n, m) = lambda(a, b) * r;
  }
  return out;
}

inline Eigen::MatrixXd build_covariance(const GPSpec& spec, std::span<const Location> locs, bool bivariate) {
  spec.validate(bivariate);
  const Eigen::MatrixXd r = correlation_matrix(locs, spec.phi);
  if (!bivariate) return spec.sigma1 * spec.sigma1 * r;
  return kron_blocks(cross_covariance(spec.sigma1, *spec.sigma2, *spec.rho), r);
}

/// Cholesky factor of a correlation matrix. An unjittered factorization is
/// tried first, then relative jitter 1e-8, 1e-7, ..., 1e-4 on the diagonal.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

inline JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& r) {
  const double scale = r.diagonal().maxCoeff();
  JitteredCholesky out;
  out.llt.compute(r);
  if (out.llt.info() == Eigen::Success) return out;
  for (double rel = 1e-8; rel <= 1e-4 * 1.0000001; rel *= 10.0) {
    Eigen::MatrixXd shifted = r;
    shifted.diagonal().array() += rel * scale;
    out.llt.compute(shifted);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = rel * scale;
      return out;
    }
  }
  fail(ErrorKind::SingularCovariance, "covariance is not positive definite after maximum jitter");
}

inline GPRealization simulate_gp(const GPSpec& spec, std::span<const Location> locs, bool bivariate,
                                 std::uint64_t seed) {
  spec.validate(bivariate);
  const auto n = static_cast<Eigen::Index>(locs.size());
  const auto chol = jittered_cholesky(correlation_matrix(locs, spec.phi));
  const Eigen::MatrixXd l = chol.llt.matrixL();
  auto rng = make_rng(seed, 0x6770);
  auto draw = [&] {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = standard_normal(rng);
    return Eigen::VectorXd(l * z);
  };
  GPRealization out{{locs.begin(), locs.end()}, {}};
  if (!bivariate) {
    out.values = spec.sigma1 * draw();
    return out;
  }
  // chol(Lambda (x) R) = chol(Lambda) (x) chol(R).
  const Eigen::Matrix2d lam = Eigen::LLT<Eigen::Matrix2d>(cross_covariance(spec.sigma1, *spec.sigma2, *spec.rho))
                                  .matrixL();
  const Eigen::VectorXd u1 = draw();
  const Eigen::VectorXd u2 = draw();
  out.values.resize(2 * n);
  out.values.head(n) = lam(0, 0) * u1;
  out.values.tail(n) = lam(1, 0) * u1 + lam(1, 1) * u2;
  return out;
}

/// Factorized knot correlation matrix for a fixed range. Because the
/// cross-covariance is Lambda (x) R, the predictive-process interpolation
/// weights R_tk R_kk^{-1} do not depend on sigma1, sigma2 or rho and can be
/// computed once per fit.
class KnotCorrelation {
 public:
  KnotCorrelation() = default;

  KnotCorrelation(std::vector<Location> knots, double phi) : knots_(std::move(knots)), phi_(phi) {
    if (knots_.empty()) fail(ErrorKind::InvalidArgument, "predictive process needs at least one knot");
    if (!(phi_ > 0.0)) fail(ErrorKind::InvalidArgument, "phi must be positive");
    auto chol = jittered_cholesky(correlation_matrix(knots_, phi_));
    jitter_ = chol.jitter;
    llt_ = std::move(chol.llt);
    lower_ = llt_.matrixL();
    log_det_ = 2.0 * lower_.diagonal().array().log().sum();
  }

  [[nodiscard]] const std::vector<Location>& knots() const { return knots_; }
  [[nodiscard]] std::size_t size() const { return knots_.size(); }
  [[nodiscard]] double phi() const { return phi_; }
  [[nodiscard]] double jitter() const { return jitter_; }
  [[nodiscard]] const Eigen::MatrixXd& lower() const { return lower_; }
  [[nodiscard]] double log_det() const { return log_det_; }

  /// Interpolation weights, one row per target: R_tk R_kk^{-1}.
  [[nodiscard]] Eigen::MatrixXd basis(std::span<const Location> targets) const {
    const Eigen::MatrixXd r_kt = correlation_matrix(knots_, targets, phi_);
    return llt_.solve(r_kt).transpose();
  }

  /// r' R_kk^{-1} r per target; the predictive variance divided by sigma^2.
  [[nodiscard]] Eigen::VectorXd variance_ratio(std::span<const Location> targets) const {
    const Eigen::MatrixXd r_kt = correlation_matrix(knots_, targets, phi_);
    const Eigen::MatrixXd half = lower_.triangularView<Eigen::Lower>().solve(r_kt);
    return half.colwise().squaredNorm().transpose();
  }

  /// Whitened values L^{-1} w for an m x k matrix of knot values.
  [[nodiscard]] Eigen::MatrixXd whiten(const Eigen::MatrixXd& w) const {
    return lower_.triangularView<Eigen::Lower>().solve(w);
  }

 private:
  std::vector<Location> knots_;
  double phi_ = 1.0;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd lower_;
  double log_det_ = 0.0;
};

/// Predictive-process realization C_tk C_kk^{-1} w* at each target.
inline GPRealization predictive_process(const GPSpec& spec, const Eigen::VectorXd& omega_star,
                                        std::span<const Location> targets, bool bivariate) {
  spec.validate(bivariate);
  const auto m = static_cast<Eigen::Index>(spec.knots.size());
  if (omega_star.size() != (bivariate ? 2 * m : m)) {
    fail(ErrorKind::InvalidArgument, "knot values have the wrong length");
  }
  const KnotCorrelation kc(spec.knots, spec.phi);
  const Eigen::MatrixXd b = kc.basis(targets);
  GPRealization out{{targets.begin(), targets.end()}, {}};
  if (!bivariate) {
    out.values = b * omega_star;
  } else {
    const auto n = static_cast<Eigen::Index>(targets.size());
    out.values.resize(2 * n);
    out.values.head(n) = b * omega_star.head(m);
    out.values.tail(n) = b * omega_star.tail(m);
  }
  return out;
}

/// Predictive variance c' C_kk^{-1} c of the first process at each target.
inline Eigen::VectorXd predictive_variance(const GPSpec& spec, std::span<const Location> targets) {
  spec.validate(false);
  const KnotCorrelation kc(spec.knots, spec.phi);
  return spec.sigma1 * spec.sigma1 * kc.variance_ratio(targets);
}

/// log N(w; 0, sigma^2 R) for univariate knot values.
inline double gp_log_density(const KnotCorrelation& kc, double sigma, const Eigen::VectorXd& w) {
  const auto m = static_cast<double>(kc.size());
  const double quad = kc.whiten(w).squaredNorm();
  return -0.5 * (m * std::log(2.0 * std::numbers::pi) + 2.0 * m * std::log(sigma) + kc.log_det() +
                 quad / (sigma * sigma));
}

/// log N(w; 0, Lambda (x) R) for bivariate knot values in block layout.
inline double gp_log_density(const KnotCorrelation& kc, const Eigen::Matrix2d& lambda, const Eigen::VectorXd& w) {
  const auto m = static_cast<Eigen::Index>(kc.size());
  Eigen::MatrixXd wm(m, 2);
  wm.col(0) = w.head(m);
  wm.col(1) = w.tail(m);
  const Eigen::MatrixXd u = kc.whiten(wm);
  const Eigen::Matrix2d g = u.transpose() * u;
  const double det = lambda.determinant();
  if (!(det > 0.0)) return -std::numeric_limits<double>::infinity();
  const double quad = (lambda.inverse() * g).trace();
  const double md = static_cast<double>(m);
  return -0.5 * (2.0 * md * std::log(2.0 * std::numbers::pi) + md * std::log(det) + 2.0 * kc.log_det() + quad);
}

/// Knots on a regular grid clipped to the window.
inline std::vector<Location> default_knots(const Window& window, std::size_t count = 100) {
  return regular_sites(window, count);
}

}  // namespace tscox

#endif  // TSCOX_COVARIANCE_HPP
