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

#ifndef TSCOX_POSTERIOR_HPP
#define TSCOX_POSTERIOR_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tscox/errors.hpp"
#include "tscox/likelihood.hpp"
#include "tscox/model.hpp"

/// \file
/// Binds a likelihood and the prior into an unnormalized log posterior whose
/// value is cached as a sum of separately recomputable terms, so that each
/// Metropolis update only re-evaluates what it touches.

namespace tscox {

/// Scale on which a scalar parameter is random-walked.
enum class Transform { Identity, Log, FisherZ };

inline double to_unconstrained(Transform t, double x) {
  switch (t) {
    case Transform::Log: return std::log(x);
    case Transform::FisherZ: return std::atanh(x);
    default: return x;
  }
}

inline double from_unconstrained(Transform t, double y) {
  switch (t) {
    case Transform::Log: return std::exp(y);
    case Transform::FisherZ: return std::tanh(y);
    default: return y;
  }
}

/// log |dx/dy| at unconstrained value y.
inline double log_jacobian(Transform t, double y) {
  switch (t) {
    case Transform::Log: return y;
    case Transform::FisherZ: {
      const double x = std::tanh(y);
      return std::log1p(-x * x);
    }
    default: return 0.0;
  }
}

struct ScalarSlot {
  std::string name;
  Transform transform = Transform::Identity;
  /// Indices of the cached terms that depend on this parameter.
  std::vector<std::size_t> terms;
  std::function<double&(ParameterState&)> ref;

  [[nodiscard]] double get(const ParameterState& s) const { return ref(const_cast<ParameterState&>(s)); }
};

/// A contiguous slice of one replicate's knot vector, updated jointly.
struct LatentBlock {
  std::string name;
  /// Blocks sharing a group name pool their acceptance statistics.
  std::string group;
  std::size_t replicate = 0;
  Eigen::Index offset = 0;
  Eigen::Index length = 0;
  std::vector<std::size_t> terms;
  /// Proposal factor: per-process lower Cholesky factor of the current prior covariance.
  std::function<Eigen::Matrix2d(const ParameterState&)> scale;
  int processes = 1;
  /// Whether the block's values appear in flattened states; false for blocks
  /// overlapping others.
  bool recorded = true;
};

/// Unnormalized log posterior as a sum of cached terms.
class Posterior {
 public:
  virtual ~Posterior() = default;

  [[nodiscard]] virtual const std::vector<ScalarSlot>& slots() const = 0;
  [[nodiscard]] virtual const std::vector<LatentBlock>& blocks() const = 0;
  /// Knot-correlation Cholesky factor used by latent-block proposals.
  [[nodiscard]] virtual const Eigen::MatrixXd* knot_lower() const { return nullptr; }
  [[nodiscard]] virtual ParameterState initial_state() const = 0;
  [[nodiscard]] virtual std::size_t term_count() const = 0;
  [[nodiscard]] virtual double term(const ParameterState& s, std::size_t index) const = 0;
  [[nodiscard]] virtual LogLikelihood log_likelihood(const ParameterState& s, bool pointwise) const = 0;
  [[nodiscard]] virtual std::size_t event_count() const = 0;

  /// Names of the flattened state: scalar slots first, then knot values.
  [[nodiscard]] virtual std::vector<std::string> column_names() const {
    std::vector<std::string> out;
    for (const auto& s : slots()) out.push_back(s.name);
    for (const auto& b : blocks()) {
      if (!b.recorded) continue;
      for (Eigen::Index j = 0; j < b.length; ++j) out.push_back(b.name + "[" + std::to_string(j) + "]");
    }
    return out;
  }

  [[nodiscard]] std::size_t scalar_count() const { return slots().size(); }

  [[nodiscard]] Eigen::VectorXd flatten(const ParameterState& s) const {
    std::size_t len = slots().size();
    for (const auto& b : blocks()) {
      if (b.recorded) len += static_cast<std::size_t>(b.length);
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(len));
    Eigen::Index k = 0;
    for (const auto& slot : slots()) out(k++) = slot.get(s);
    for (const auto& b : blocks()) {
      if (!b.recorded) continue;
      out.segment(k, b.length) = s.omega_star[b.replicate].segment(b.offset, b.length);
      k += b.length;
    }
    return out;
  }

  [[nodiscard]] ParameterState unflatten(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    ParameterState s = initial_state();
    Eigen::Index k = 0;
    for (const auto& slot : slots()) slot.ref(s) = v(k++);
    for (const auto& b : blocks()) {
      if (!b.recorded) continue;
      s.omega_star[b.replicate].segment(b.offset, b.length) = v.segment(k, b.length);
      k += b.length;
    }
    return s;
  }

  [[nodiscard]] std::vector<double> evaluate_terms(const ParameterState& s) const {
    std::vector<double> t(term_count());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = term(s, i);
    return t;
  }

  [[nodiscard]] double log_density(const ParameterState& s) const {
    double total = 0.0;
    for (std::size_t i = 0; i < term_count(); ++i) total += term(s, i);
    return std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
  }
};

/// Posterior of a two-stage model or of the bivariate mark model.
///
/// Terms: [0] coefficient and scale priors; then per replicate r
/// [1 + 3r] first likelihood part (location stage, or mark 1),
/// [2 + 3r] second part (mark stage, or mark 2),
/// [3 + 3r] knot-value prior.
class ModelPosterior final : public Posterior {
 public:
  explicit ModelPosterior(TwoStageLikelihood lik) : lik_(std::move(lik)) { build(); }
  explicit ModelPosterior(BivariateLikelihood lik) : lik_(std::move(lik)) { build(); }

  [[nodiscard]] const ModelSpec& spec() const {
    return std::visit([](const auto& l) -> const ModelSpec& { return l.spec(); }, lik_);
  }
  [[nodiscard]] std::size_t replicate_count() const {
    return std::visit([](const auto& l) { return l.replicate_count(); }, lik_);
  }
  [[nodiscard]] const KnotCorrelation* knots() const {
    return std::visit([](const auto& l) { return l.knots(); }, lik_);
  }

  [[nodiscard]] const std::vector<ScalarSlot>& slots() const override { return slots_; }
  [[nodiscard]] const std::vector<LatentBlock>& blocks() const override { return blocks_; }
  [[nodiscard]] const Eigen::MatrixXd* knot_lower() const override { return knots() ? &knots()->lower() : nullptr; }
  [[nodiscard]] std::size_t term_count() const override { return 1 + 3 * replicate_count(); }
  [[nodiscard]] std::size_t event_count() const override {
    return std::visit([](const auto& l) { return l.event_count(); }, lik_);
  }

  [[nodiscard]] ParameterState initial_state() const override {
    ParameterState s;
    const auto& sp = spec();
    if (const auto* two = std::get_if<TwoStageLikelihood>(&lik_)) {
      s.beta = Eigen::VectorXd::Zero(two->stage1_width());
      s.gamma = Eigen::VectorXd::Zero(two->stage2_width());
      s.alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sp.nonspatial.size()));
    } else {
      const auto& bi = std::get<BivariateLikelihood>(lik_);
      for (std::size_t k = 0; k < 2; ++k) {
        s.beta_mark[k] = Eigen::VectorXd::Zero(bi.design_width());
        s.alpha_mark[k] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bi.bounds().size()));
      }
    }
    if (sp.has_gp()) {
      const auto len = static_cast<Eigen::Index>(knots()->size()) * sp.latent_processes();
      s.omega_star.assign(replicate_count(), Eigen::VectorXd::Zero(len));
    }
    return s;
  }

  [[nodiscard]] double term(const ParameterState& s, std::size_t index) const override {
    if (index == 0) return base_prior(s);
    const std::size_t r = (index - 1) / 3;
    const std::size_t part = (index - 1) % 3;
    if (part == 2) return knot_prior(s, r);
    if (const auto* two = std::get_if<TwoStageLikelihood>(&lik_)) {
      return part == 0 ? two->stage1(s, r) : two->stage2(s, r);
    }
    if (!support_ok(s)) return -std::numeric_limits<double>::infinity();
    return std::get<BivariateLikelihood>(lik_).mark_term(s, r, static_cast<int>(part));
  }

  [[nodiscard]] LogLikelihood log_likelihood(const ParameterState& s, bool pointwise) const override {
    return std::visit([&](const auto& l) { return l.evaluate(s, pointwise); }, lik_);
  }

 private:
  [[nodiscard]] bool support_ok(const ParameterState& s) const {
    const auto& sp = spec();
    if (sp.uses_sigma_iid() && !(s.sigma_iid > 0.0)) return false;
    return true;
  }

  [[nodiscard]] double base_prior(const ParameterState& s) const {
    // The knot density is accounted per replicate in its own term.
    return logprior(spec(), s, nullptr);
  }

  [[nodiscard]] double knot_prior(const ParameterState& s, std::size_t r) const {
    const auto& sp = spec();
    if (!sp.has_gp()) return 0.0;
    const auto* kc = knots();
    const auto m = static_cast<Eigen::Index>(kc->size());
    const auto& w = s.omega_star[r];
    if (!(s.sigma1 > 0.0) || (sp.uses_sigma2() && !(s.sigma2 > 0.0))) return -std::numeric_limits<double>::infinity();
    if (sp.uses_rho()) {
      if (!(std::abs(s.rho) < prior::kRhoBound)) return -std::numeric_limits<double>::infinity();
      return gp_log_density(*kc, cross_covariance(s.sigma1, s.sigma2, s.rho), w);
    }
    double lp = gp_log_density(*kc, s.sigma1, w.head(m));
    if (sp.uses_sigma2()) lp += gp_log_density(*kc, s.sigma2, w.tail(m));
    return lp;
  }

  void add_vector(const std::string& prefix, const std::vector<std::string>& names,
                  std::function<Eigen::VectorXd&(ParameterState&)> vec, std::vector<std::size_t> terms) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      slots_.push_back(ScalarSlot{prefix + "." + names[j], Transform::Identity, terms,
                                  [vec, j](ParameterState& s) -> double& {
                                    return vec(s)(static_cast<Eigen::Index>(j));
                                  }});
    }
  }

  [[nodiscard]] std::vector<std::size_t> part_terms(std::size_t part, bool with_base) const {
    std::vector<std::size_t> t;
    if (with_base) t.push_back(0);
    for (std::size_t r = 0; r < replicate_count(); ++r) t.push_back(1 + 3 * r + part);
    return t;
  }

  void build() {
    const auto& sp = spec();
    const std::size_t reps = replicate_count();
    if (sp.is_two_stage()) {
      add_vector("beta", sp.stage1.coefficient_names(), [](ParameterState& s) -> Eigen::VectorXd& { return s.beta; },
                 part_terms(0, true));
      add_vector("gamma", sp.stage2.coefficient_names(),
                 [](ParameterState& s) -> Eigen::VectorXd& { return s.gamma; }, part_terms(1, true));
      add_vector("alpha", sp.nonspatial, [](ParameterState& s) -> Eigen::VectorXd& { return s.alpha; },
                 part_terms(1, true));
      if (sp.uses_sigma_iid()) {
        slots_.push_back(ScalarSlot{"sigma_iid", Transform::Log, part_terms(1, true),
                                    [](ParameterState& s) -> double& { return s.sigma_iid; }});
      }
    } else {
      for (int k = 0; k < 2; ++k) {
        const std::string idx = std::to_string(k + 1);
        add_vector("beta" + idx, sp.stage1.coefficient_names(),
                   [k](ParameterState& s) -> Eigen::VectorXd& { return s.beta_mark[static_cast<std::size_t>(k)]; },
                   part_terms(static_cast<std::size_t>(k), true));
        add_vector("alpha" + idx, sp.nonspatial,
                   [k](ParameterState& s) -> Eigen::VectorXd& { return s.alpha_mark[static_cast<std::size_t>(k)]; },
                   part_terms(static_cast<std::size_t>(k), true));
      }
    }
    if (!sp.has_gp()) return;
    const auto gp_terms = part_terms(2, true);
    slots_.push_back(ScalarSlot{"sigma1", Transform::Log, gp_terms,
                                [](ParameterState& s) -> double& { return s.sigma1; }});
    if (sp.uses_sigma2()) {
      slots_.push_back(ScalarSlot{"sigma2", Transform::Log, gp_terms,
                                  [](ParameterState& s) -> double& { return s.sigma2; }});
    }
    if (sp.uses_rho()) {
      slots_.push_back(ScalarSlot{"rho", Transform::FisherZ, gp_terms,
                                  [](ParameterState& s) -> double& { return s.rho; }});
    }
    const auto m = static_cast<Eigen::Index>(knots()->size());
    for (std::size_t r = 0; r < reps; ++r) {
      const std::string rep = reps > 1 ? ".r" + std::to_string(r + 1) : "";
      if (sp.uses_rho()) {
        // Coupled processes move together with the current cross-covariance,
        // and also one at a time so the sampler can leave a wrong-sign coupling.
        blocks_.push_back(LatentBlock{"omega" + rep, "omega", r, 0, 2 * m, {1 + 3 * r, 2 + 3 * r, 3 + 3 * r},
                                      [](const ParameterState& s) -> Eigen::Matrix2d {
                                        return cross_covariance(s.sigma1, s.sigma2, s.rho).llt().matrixL();
                                      },
                                      2, false});
      }
      for (int p = 0; p < sp.latent_processes(); ++p) {
        const std::string idx = std::to_string(p + 1);
        blocks_.push_back(LatentBlock{"omega" + idx + rep, "omega" + idx, r, p * m, m,
                                      {1 + 3 * r + static_cast<std::size_t>(p), 3 + 3 * r},
                                      [p](const ParameterState& s) -> Eigen::Matrix2d {
                                        return Eigen::Matrix2d::Identity() * (p == 0 ? s.sigma1 : s.sigma2);
                                      },
                                      1});
      }
    }
  }

  std::variant<TwoStageLikelihood, BivariateLikelihood> lik_;
  std::vector<ScalarSlot> slots_;
  std::vector<LatentBlock> blocks_;
};

}  // namespace tscox

#endif  // TSCOX_POSTERIOR_HPP
