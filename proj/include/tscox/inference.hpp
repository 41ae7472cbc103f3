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

#ifndef TSCOX_INFERENCE_HPP
#define TSCOX_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tscox/errors.hpp"
#include "tscox/posterior.hpp"
#include "tscox/random.hpp"
#include "tscox/stats.hpp"

/// \file
/// Adaptive random-walk Metropolis within Gibbs, posterior summaries, WAIC and
/// convergence diagnostics.

namespace tscox {

struct McmcConfig {
  std::size_t iterations = 5000;
  std::size_t burnin = 2500;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  /// Robbins-Monro step adaptation during burn-in; steps are frozen afterwards.
  bool adapt = true;
  /// Independent chains run concurrently with seeds seed, seed+1, ...
  std::size_t chains = 1;
  double scalar_target = 0.44;
  double block_target = 0.234;
  double initial_scalar_step = 0.1;
  bool record_pointwise = true;

  void validate() const {
    if (iterations <= burnin) fail(ErrorKind::Config, "iterations must exceed burn-in");
    if (thin == 0) fail(ErrorKind::Config, "thin must be positive");
    if (chains == 0) fail(ErrorKind::Config, "at least one chain is required");
  }
};

struct Acceptance {
  std::string name;
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  /// Step size in effect after burn-in.
  double step = 0.0;

  [[nodiscard]] double rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

/// Retained samples in flattened form, one row per sample.
struct PosteriorChain {
  std::vector<std::string> names;
  /// Leading columns that are scalar parameters; the rest are knot values.
  std::size_t scalar_count = 0;
  Eigen::MatrixXd draws;
  /// samples x events; empty when pointwise recording is disabled.
  Eigen::MatrixXd pointwise_loglik;
  std::vector<Acceptance> acceptance;
  std::uint64_t seed = 0;
  McmcConfig config;
  std::optional<ModelSpec> spec;
  std::size_t clamped = 0;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(draws.rows()); }
  [[nodiscard]] std::size_t event_count() const { return static_cast<std::size_t>(pointwise_loglik.cols()); }

  [[nodiscard]] std::size_t index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) fail(ErrorKind::InvalidArgument, "chain has no parameter '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }

  [[nodiscard]] std::vector<double> column(const std::string& name) const {
    const auto j = static_cast<Eigen::Index>(index_of(name));
    std::vector<double> out(size());
    for (Eigen::Index i = 0; i < draws.rows(); ++i) out[static_cast<std::size_t>(i)] = draws(i, j);
    return out;
  }
};

namespace detail {

inline bool metropolis_accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng)) < log_ratio;
}

struct Adapter {
  double log_step = 0.0;
  std::size_t updates = 0;

  void update(bool accepted, double target) {
    ++updates;
    const double gain = std::pow(static_cast<double>(updates), -0.6);
    log_step += gain * ((accepted ? 1.0 : 0.0) - target);
    log_step = std::clamp(log_step, -30.0, 10.0);
  }
};

// Re-evaluates the listed terms; a proposal whose intensity overflows is rejected.
inline double proposed_terms(const Posterior& post, const ParameterState& s, const std::vector<std::size_t>& idx,
                             std::vector<double>& out) {
  double sum = 0.0;
  out.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    try {
      out[i] = post.term(s, idx[i]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteIntensity) throw;
      out[i] = -std::numeric_limits<double>::infinity();
    }
    sum += out[i];
  }
  return std::isnan(sum) ? -std::numeric_limits<double>::infinity() : sum;
}

inline double current_terms(const std::vector<double>& cache, const std::vector<std::size_t>& idx) {
  double sum = 0.0;
  for (auto i : idx) sum += cache[i];
  return sum;
}

}  // namespace detail

/// Runs one chain. Scalars take univariate normal random-walk steps on their
/// unconstrained scale; each replicate's knot values take a multivariate
/// normal random-walk step shaped like their prior covariance.
inline PosteriorChain run_mcmc(const Posterior& post, const McmcConfig& cfg,
                               std::optional<ParameterState> init = std::nullopt) {
  cfg.validate();
  ParameterState state = init ? std::move(*init) : post.initial_state();
  std::vector<double> cache = post.evaluate_terms(state);
  {
    double total = 0.0;
    for (double t : cache) total += t;
    if (!std::isfinite(total)) fail(ErrorKind::InvalidInitialState, "initial state has zero posterior density");
  }

  const auto& slots = post.slots();
  const auto& blocks = post.blocks();
  const Eigen::MatrixXd* lower = post.knot_lower();
  Rng rng = make_rng(cfg.seed, 0x6d636d63);

  std::vector<detail::Adapter> slot_adapt(slots.size(), {std::log(cfg.initial_scalar_step), 0});
  std::vector<detail::Adapter> block_adapt(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    block_adapt[b].log_step = std::log(0.5 * 2.38 / std::sqrt(static_cast<double>(blocks[b].length)));
  }

  std::map<std::string, std::size_t> group_index;
  std::vector<Acceptance> acceptance;
  std::vector<std::size_t> slot_group(slots.size());
  std::vector<std::size_t> block_group(blocks.size());
  auto group_of = [&](const std::string& name) {
    auto [it, inserted] = group_index.try_emplace(name, acceptance.size());
    if (inserted) acceptance.push_back(Acceptance{name, 0, 0, 0.0});
    return it->second;
  };
  for (std::size_t i = 0; i < slots.size(); ++i) slot_group[i] = group_of(slots[i].name);
  for (std::size_t b = 0; b < blocks.size(); ++b) block_group[b] = group_of(blocks[b].group);

  PosteriorChain chain;
  chain.names = post.column_names();
  chain.scalar_count = post.scalar_count();
  chain.seed = cfg.seed;
  chain.config = cfg;
  if (const auto* mp = dynamic_cast<const ModelPosterior*>(&post)) chain.spec = mp->spec();
  const std::size_t kept = (cfg.iterations - cfg.burnin) / cfg.thin;
  chain.draws.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(chain.names.size()));
  if (cfg.record_pointwise) {
    chain.pointwise_loglik.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(post.event_count()));
  }

  std::vector<double> fresh;
  Eigen::VectorXd saved;
  std::size_t row = 0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const bool burning = it < cfg.burnin;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& slot = slots[i];
      double& x = slot.ref(state);
      const double old_x = x;
      const double y = to_unconstrained(slot.transform, old_x);
      const double y_new = y + std::exp(slot_adapt[i].log_step) * standard_normal(rng);
      x = from_unconstrained(slot.transform, y_new);
      const double before = detail::current_terms(cache, slot.terms);
      const double after = detail::proposed_terms(post, state, slot.terms, fresh);
      const double ratio =
          after - before + log_jacobian(slot.transform, y_new) - log_jacobian(slot.transform, y);
      const bool ok = std::isfinite(x) && detail::metropolis_accept(ratio, rng);
      if (ok) {
        for (std::size_t t = 0; t < slot.terms.size(); ++t) cache[slot.terms[t]] = fresh[t];
      } else {
        x = old_x;
      }
      if (burning && cfg.adapt) slot_adapt[i].update(ok, cfg.scalar_target);
      if (!burning) {
        ++acceptance[slot_group[i]].proposed;
        acceptance[slot_group[i]].accepted += ok ? 1 : 0;
      }
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& blk = blocks[b];
      auto& w = state.omega_star[blk.replicate];
      saved = w.segment(blk.offset, blk.length);
      const double s = std::exp(block_adapt[b].log_step);
      const Eigen::Matrix2d c = blk.scale(state);
      const Eigen::Index m = blk.length / blk.processes;
      Eigen::MatrixXd z(m, blk.processes);
      for (Eigen::Index j = 0; j < z.size(); ++j) z.data()[j] = standard_normal(rng);
      Eigen::MatrixXd step = lower ? Eigen::MatrixXd((*lower) * z) : z;
      if (blk.processes == 1) {
        w.segment(blk.offset, m) += s * c(0, 0) * step.col(0);
      } else {
        const Eigen::MatrixXd shaped = step * c.transpose();
        w.segment(blk.offset, m) += s * shaped.col(0);
        w.segment(blk.offset + m, m) += s * shaped.col(1);
      }
      const double before = detail::current_terms(cache, blk.terms);
      const double after = detail::proposed_terms(post, state, blk.terms, fresh);
      const bool ok = detail::metropolis_accept(after - before, rng);
      if (ok) {
        for (std::size_t t = 0; t < blk.terms.size(); ++t) cache[blk.terms[t]] = fresh[t];
      } else {
        w.segment(blk.offset, blk.length) = saved;
      }
      if (burning && cfg.adapt) block_adapt[b].update(ok, cfg.block_target);
      if (!burning) {
        ++acceptance[block_group[b]].proposed;
        acceptance[block_group[b]].accepted += ok ? 1 : 0;
      }
    }
    if (!burning && (it - cfg.burnin + 1) % cfg.thin == 0 && row < kept) {
      const auto r = static_cast<Eigen::Index>(row);
      chain.draws.row(r) = post.flatten(state).transpose();
      if (cfg.record_pointwise) {
        const LogLikelihood ll = post.log_likelihood(state, true);
        chain.pointwise_loglik.row(r) = ll.pointwise.transpose();
        chain.clamped += ll.clamped;
      }
      ++row;
    }
  }
  for (std::size_t i = 0; i < slots.size(); ++i) acceptance[slot_group[i]].step = std::exp(slot_adapt[i].log_step);
  for (std::size_t b = 0; b < blocks.size(); ++b) acceptance[block_group[b]].step = std::exp(block_adapt[b].log_step);
  chain.acceptance = std::move(acceptance);
  return chain;
}

/// Runs cfg.chains independent chains concurrently, chain k seeded with cfg.seed + k.
inline std::vector<PosteriorChain> run_chains(const Posterior& post, const McmcConfig& cfg) {
  cfg.validate();
  std::vector<PosteriorChain> out(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);
  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < cfg.chains; ++k) {
    workers.emplace_back([&, k] {
      try {
        McmcConfig c = cfg;
        c.seed = cfg.seed + k;
        c.chains = 1;
        out[k] = run_mcmc(post, c);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Stacks chains sharing a parameter layout; acceptance counts are summed.
inline PosteriorChain merge_chains(const std::vector<PosteriorChain>& chains) {
  if (chains.empty()) fail(ErrorKind::InvalidArgument, "no chains to merge");
  PosteriorChain out = chains.front();
  if (chains.size() == 1) return out;
  Eigen::Index rows = 0;
  for (const auto& c : chains) {
    if (c.names != out.names) fail(ErrorKind::InvalidArgument, "chains have different parameters");
    if (c.pointwise_loglik.cols() != out.pointwise_loglik.cols()) {
      fail(ErrorKind::IncomparableModels, "chains were fit to different data");
    }
    rows += c.draws.rows();
  }
  out.draws.resize(rows, out.draws.cols());
  out.pointwise_loglik.resize(out.pointwise_loglik.cols() > 0 ? rows : 0, out.pointwise_loglik.cols());
  Eigen::Index r = 0;
  out.clamped = 0;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    const auto& c = chains[k];
    out.draws.middleRows(r, c.draws.rows()) = c.draws;
    if (out.pointwise_loglik.size() > 0) out.pointwise_loglik.middleRows(r, c.draws.rows()) = c.pointwise_loglik;
    r += c.draws.rows();
    out.clamped += c.clamped;
    if (k > 0) {
      for (std::size_t a = 0; a < out.acceptance.size() && a < c.acceptance.size(); ++a) {
        out.acceptance[a].proposed += c.acceptance[a].proposed;
        out.acceptance[a].accepted += c.acceptance[a].accepted;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// WAIC

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
};

/// WAIC = -2 (lppd - p_waic), p_waic from the sample variance (n - 1).
/// Rows are posterior samples, columns are events. Lower is better.
inline WaicResult waic_details(const Eigen::MatrixXd& pointwise) {
  if (pointwise.rows() < 2) fail(ErrorKind::InvalidArgument, "WAIC needs at least two samples");
  if (pointwise.cols() < 1) fail(ErrorKind::InvalidArgument, "WAIC needs at least one event");
  if (!pointwise.allFinite()) fail(ErrorKind::NonFiniteLogLik, "pointwise log-likelihood has non-finite entries");
  const auto s = static_cast<double>(pointwise.rows());
  WaicResult r;
  std::vector<double> col(static_cast<std::size_t>(pointwise.rows()));
  for (Eigen::Index i = 0; i < pointwise.cols(); ++i) {
    for (Eigen::Index k = 0; k < pointwise.rows(); ++k) col[static_cast<std::size_t>(k)] = pointwise(k, i);
    r.lppd += stats::log_sum_exp(col) - std::log(s);
    r.p_waic += stats::variance(col);
  }
  r.waic = -2.0 * (r.lppd - r.p_waic);
  return r;
}

inline double waic(const Eigen::MatrixXd& pointwise) { return waic_details(pointwise).waic; }

struct ModelScore {
  std::string name;
  std::size_t events = 0;
  WaicResult score;
  std::size_t rank = 0;
  bool best = false;
};

/// Ranks by WAIC ascending, ties broken by name.
inline std::vector<ModelScore> rank_models(std::vector<ModelScore> scores) {
  if (scores.empty()) fail(ErrorKind::InvalidArgument, "no models to compare");
  for (const auto& s : scores) {
    if (s.events != scores.front().events) {
      fail(ErrorKind::IncomparableModels, "model '" + s.name + "' was fit to " + std::to_string(s.events) +
                                              " events, '" + scores.front().name + "' to " +
                                              std::to_string(scores.front().events));
    }
  }
  std::stable_sort(scores.begin(), scores.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.score.waic != b.score.waic) return a.score.waic < b.score.waic;
    return a.name < b.name;
  });
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i].rank = i + 1;
    scores[i].best = i == 0;
  }
  return scores;
}

inline std::vector<ModelScore> compare_models(const std::vector<std::pair<std::string, PosteriorChain>>& chains) {
  std::vector<ModelScore> scores;
  // Check comparability before the (possibly failing) WAIC evaluation.
  for (const auto& [name, chain] : chains) scores.push_back(ModelScore{name, chain.event_count(), {}, 0, false});
  (void)rank_models(scores);
  for (std::size_t i = 0; i < chains.size(); ++i) scores[i].score = waic_details(chains[i].second.pointwise_loglik);
  return rank_models(std::move(scores));
}

// ---------------------------------------------------------------------------
// Summaries and diagnostics

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// The 95% credible interval excludes zero.
  bool excludes_zero = false;
};

using SummaryTable = std::vector<SummaryRow>;

inline SummaryRow summarize_draws(const std::string& name, std::vector<double> x) {
  if (x.empty()) fail(ErrorKind::InvalidArgument, "cannot summarize an empty chain");
  SummaryRow row;
  row.name = name;
  row.mean = stats::mean(x);
  row.sd = x.size() > 1 ? stats::sd(x) : 0.0;
  std::sort(x.begin(), x.end());
  row.lower = stats::quantile_sorted(x, 0.025);
  row.upper = stats::quantile_sorted(x, 0.975);
  row.excludes_zero = row.lower > 0.0 || row.upper < 0.0;
  return row;
}

/// Posterior mean, SD and central 95% interval per parameter; knot values are
/// included only on request.
inline SummaryTable summarize(const PosteriorChain& chain, bool include_latent = false) {
  SummaryTable out;
  const std::size_t cols = include_latent ? chain.names.size() : chain.scalar_count;
  for (std::size_t j = 0; j < cols; ++j) out.push_back(summarize_draws(chain.names[j], chain.column(chain.names[j])));
  return out;
}

/// Effective sample size via Geyer's initial monotone positive sequence.
/// A chain with zero variance reports the sentinel 1.
inline double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 1.0;
  const double mu = stats::mean(x);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mu) * (x[i + lag] - mu);
    return s / static_cast<double>(n);
  };
  const double g0 = autocov(0);
  if (!(g0 > 1e-300 * std::max(1.0, mu * mu))) return 1.0;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = autocov(2 * k) + autocov(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    sum += pair;
    prev = pair;
  }
  const double tau = std::max((-g0 + 2.0 * sum) / g0, 1.0 / std::log10(static_cast<double>(std::max<std::size_t>(n, 10))));
  return static_cast<double>(n) / tau;
}

struct DiagnosticRow {
  std::string name;
  double ess = 0.0;
  double mcse = 0.0;
};

struct DiagnosticsReport {
  std::vector<DiagnosticRow> parameters;
  std::vector<Acceptance> acceptance;
  std::size_t samples = 0;
  std::size_t clamped = 0;
};

inline DiagnosticsReport mcmc_diagnostics(const PosteriorChain& chain, bool include_latent = false) {
  DiagnosticsReport rep;
  rep.samples = chain.size();
  rep.acceptance = chain.acceptance;
  rep.clamped = chain.clamped;
  const std::size_t cols = include_latent ? chain.names.size() : chain.scalar_count;
  for (std::size_t j = 0; j < cols; ++j) {
    const auto x = chain.column(chain.names[j]);
    const double ess = effective_sample_size(x);
    const double sd = x.size() > 1 ? stats::sd(x) : 0.0;
    rep.parameters.push_back(DiagnosticRow{chain.names[j], ess, sd / std::sqrt(ess)});
  }
  return rep;
}

}  // namespace tscox

#endif  // TSCOX_INFERENCE_HPP
