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

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "tscox/simulate.hpp"
#include "tscox/stats.hpp"

namespace tscox {
namespace {

using testing::vec;

TwoStageSimulationSpec homogeneous_spec(double rate) {
  TwoStageSimulationSpec s;
  s.stage1 = Design{true, {}};
  s.stage2 = Design{true, {}};
  s.beta = vec({std::log(rate)});
  s.gamma = vec({0.0});
  s.alpha = vec({0.0});
  s.nu = {NonspatialDistribution::beta(2, 2)};
  return s;
}

double ks_distance(std::vector<double> x, const auto& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

TEST(SimulateTwoStage, HomogeneousCountIsPoisson) {
  const auto field = testing::strip_partition({0.0, 0.0}, 5.0, 10.0);
  std::vector<double> counts;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    counts.push_back(static_cast<double>(simulate_two_stage(homogeneous_spec(2.0), field, std::nullopt, seed).pattern.size()));
  }
  EXPECT_NEAR(stats::mean(counts), 200.0, 4.0);
  const double dispersion = stats::variance(counts) / stats::mean(counts);
  EXPECT_GT(dispersion, 0.75);
  EXPECT_LT(dispersion, 1.3);
}

TEST(SimulateTwoStage, MarkFractionWithZeroPredictor) {
  const auto field = testing::strip_partition({0.0, 0.0}, 5.0, 10.0);
  double ones = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sim = simulate_two_stage(homogeneous_spec(2.0), field, std::nullopt, seed);
    for (const auto& e : sim.pattern.events()) {
      ones += e.mark;
      total += 1;
    }
  }
  EXPECT_NEAR(ones / total, 0.5, 3.0 * std::sqrt(0.25 / total));
}

TEST(SimulateTwoStage, UnitCountsMatchIntensity) {
  const auto field = testing::strip_partition({0.0, 1.0, 2.0}, 10.0, 10.0);
  TwoStageSimulationSpec spec = homogeneous_spec(1.0);
  spec.stage1 = Design{true, {"z"}};
  spec.beta = vec({-4.0, 1.0});
  std::vector<double> observed(3, 0.0);
  const int seeds = 500;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto r = simulate_two_stage(spec, field, std::nullopt, static_cast<std::uint64_t>(seed));
    for (std::size_t u = 0; u < 3; ++u) observed[u] += static_cast<double>(r.unit_counts[u]);
    EXPECT_EQ(r.clamped, 0u);
  }
  double chi2 = 0.0;
  for (std::size_t u = 0; u < 3; ++u) {
    const double expected = seeds * 100.0 * std::exp(-4.0 + static_cast<double>(u));
    chi2 += (observed[u] - expected) * (observed[u] - expected) / expected;
  }
  const boost::math::chi_squared dist(3.0);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001);
}

TEST(SimulateTwoStage, EventsLieInsideWindowAndUnits) {
  const auto field = testing::tract_partition(4, 3, 2.0, 5);
  TwoStageSimulationSpec spec = homogeneous_spec(1.0);
  spec.stage1 = Design{true, {"z1", "z2"}};
  spec.beta = vec({1.0, 0.5, -1.0});
  const auto r = simulate_two_stage(spec, field, std::nullopt, 3);
  ASSERT_GT(r.pattern.size(), 10u);
  std::size_t total = 0;
  for (const auto& e : r.pattern.events()) {
    EXPECT_TRUE(field.window().contains(e.s));
    EXPECT_TRUE(field.unit_of(e.s).has_value());
    EXPECT_TRUE(e.mark == 0.0 || e.mark == 1.0);
    EXPECT_GE(e.nu(0), 0.0);
    EXPECT_LE(e.nu(0), 1.0);
  }
  for (auto c : r.unit_counts) total += c;
  EXPECT_EQ(total, r.pattern.size());
}

TEST(SimulateTwoStage, DeterministicForSeed) {
  const auto field = testing::tract_partition(3, 3, 2.0, 5);
  const auto a = simulate_two_stage(homogeneous_spec(3.0), field, std::nullopt, 42).pattern;
  const auto b = simulate_two_stage(homogeneous_spec(3.0), field, std::nullopt, 42).pattern;
  const auto c = simulate_two_stage(homogeneous_spec(3.0), field, std::nullopt, 43).pattern;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.events()[i].s, b.events()[i].s);
    EXPECT_EQ(a.events()[i].mark, b.events()[i].mark);
    EXPECT_EQ(a.events()[i].nu, b.events()[i].nu);
  }
  EXPECT_FALSE(a.size() == c.size() && a.events().front().s == c.events().front().s);
}

TEST(SimulateTwoStage, LatentProcessShiftsIntensity) {
  const auto field = testing::strip_partition({0.0, 0.0}, 5.0, 10.0);
  GPRealization gp{{{2.5, 5.0}, {7.5, 5.0}}, vec({2.0, -2.0})};
  TwoStageSimulationSpec spec = homogeneous_spec(std::exp(-2.0));
  double left = 0, right = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = simulate_two_stage(spec, field, gp, seed);
    left += static_cast<double>(r.unit_counts[0]);
    right += static_cast<double>(r.unit_counts[1]);
  }
  // Expected 20 * 50 * e^0 and 20 * 50 * e^-4 events.
  EXPECT_NEAR(left, 1000.0, 4.0 * std::sqrt(1000.0));
  EXPECT_NEAR(right, 1000.0 * std::exp(-4.0), 4.0 * std::sqrt(1000.0 * std::exp(-4.0)) + 1.0);
}

TEST(SimulateTwoStage, LinearMarks) {
  const auto field = testing::strip_partition({0.0}, 20.0, 20.0);
  TwoStageSimulationSpec spec = homogeneous_spec(5.0);
  spec.marks = MarkFamily::Linear;
  spec.sigma_iid = 0.5;
  spec.gamma = vec({1.0});
  spec.alpha = vec({2.0});
  spec.nu = {NonspatialDistribution::uniform(0, 1)};
  const auto r = simulate_two_stage(spec, field, std::nullopt, 8);
  std::vector<double> resid;
  for (const auto& e : r.pattern.events()) resid.push_back(e.mark - 1.0 - 2.0 * e.nu(0));
  const double n = static_cast<double>(resid.size());
  EXPECT_NEAR(stats::mean(resid), 0.0, 4.0 * 0.5 / std::sqrt(n));
  EXPECT_NEAR(stats::sd(resid), 0.5, 0.05);
  spec.sigma_iid.reset();
  EXPECT_THROW((void)simulate_two_stage(spec, field, std::nullopt, 8), Error);
}

TEST(SimulateTwoStage, NonspatialDrawnAfterThinning) {
  // The location stage ignores nu, so retained nu keep their sampling distribution.
  const auto field = testing::strip_partition({0.0}, 20.0, 20.0);
  std::vector<double> nu;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto sim = simulate_two_stage(homogeneous_spec(1.0), field, std::nullopt, seed);
    for (const auto& e : sim.pattern.events()) {
      nu.push_back(e.nu(0));
    }
  }
  const boost::math::beta_distribution<> b22(2, 2);
  const double d = ks_distance(nu, [&](double x) { return boost::math::cdf(b22, x); });
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(nu.size())));
}

BivariateSimulationSpec bivariate_spec(double a1, double a2) {
  BivariateSimulationSpec s;
  s.design = Design{true, {}};
  s.beta = {vec({0.0}), vec({0.0})};
  s.alpha = {vec({a1}), vec({a2})};
  s.nu = {NonspatialDistribution::uniform(0, 1)};
  s.bounds = {CovariateBound::continuous(0, 1)};
  return s;
}

TEST(SimulateBivariate, ExpectedCountPerMark) {
  const auto field = testing::strip_partition({0.0}, 10.0, 10.0);
  const auto spec = bivariate_spec(2.0, -1.0);
  double n1 = 0, n2 = 0;
  const int seeds = 40;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto r = simulate_bivariate(spec, field, std::nullopt, static_cast<std::uint64_t>(seed));
    EXPECT_TRUE(r.warnings.empty());
    for (const auto& e : r.pattern.events()) (e.mark == 1.0 ? n1 : n2) += 1;
  }
  // E count = area * E_U[exp(a nu)] = 100 (e^a - 1) / a.
  const double m1 = seeds * 100.0 * (std::exp(2.0) - 1.0) / 2.0;
  const double m2 = seeds * 100.0 * (1.0 - std::exp(-1.0));
  EXPECT_NEAR(n1, m1, 4.0 * std::sqrt(m1));
  EXPECT_NEAR(n2, m2, 4.0 * std::sqrt(m2));
}

TEST(SimulateBivariate, InterceptOnlyCountPerMark) {
  const auto field = testing::strip_partition({0.0}, 10.0, 10.0);
  BivariateSimulationSpec spec = bivariate_spec(0.0, 0.0);
  spec.beta = {vec({-1.0}), vec({0.5})};
  spec.alpha = {Eigen::VectorXd(0), Eigen::VectorXd(0)};
  spec.nu = {};
  spec.bounds = {};
  std::vector<double> c1, c2;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    double n1 = 0, n2 = 0;
    const auto sim = simulate_bivariate(spec, field, std::nullopt, seed);
    for (const auto& e : sim.pattern.events()) {
      (e.mark == 1.0 ? n1 : n2) += 1;
    }
    c1.push_back(n1);
    c2.push_back(n2);
  }
  const double m1 = 100.0 * std::exp(-1.0), m2 = 100.0 * std::exp(0.5);
  EXPECT_NEAR(stats::mean(c1), m1, 3.0 * std::sqrt(m1 / 200.0));
  EXPECT_NEAR(stats::mean(c2), m2, 3.0 * std::sqrt(m2 / 200.0));
}

TEST(SimulateBivariate, SymmetricMarksHaveEqualCounts) {
  const auto field = testing::tract_partition(3, 3, 3.0, 2);
  BivariateSimulationSpec spec = bivariate_spec(0.7, 0.7);
  spec.design = Design{true, {"z1"}};
  spec.beta = {vec({0.5, 0.3}), vec({0.5, 0.3})};
  double n1 = 0, n2 = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto sim = simulate_bivariate(spec, field, std::nullopt, seed);
    for (const auto& e : sim.pattern.events()) {
      (e.mark == 1.0 ? n1 : n2) += 1;
    }
  }
  EXPECT_NEAR(n1 / (n1 + n2), 0.5, 3.0 * std::sqrt(0.25 / (n1 + n2)));
}

TEST(SimulateBivariate, NonspatialTiltedByThinning) {
  const auto field = testing::strip_partition({0.0}, 20.0, 20.0);
  const auto r = simulate_bivariate(bivariate_spec(2.0, 2.0), field, std::nullopt, 4);
  std::vector<double> nu;
  for (const auto& e : r.pattern.events()) nu.push_back(e.nu(0));
  const double n = static_cast<double>(nu.size());
  // Retained nu has density e^{2 nu} / int_0^1 e^{2 t} dt.
  const double tilted_mean = (std::exp(2.0) + 1.0) / (2.0 * (std::exp(2.0) - 1.0));
  EXPECT_NEAR(stats::mean(nu), tilted_mean, 4.0 * 0.3 / std::sqrt(n));
  const double d_uniform = ks_distance(nu, [](double x) { return x; });
  const double d_tilted = ks_distance(nu, [](double x) { return (std::exp(2 * x) - 1) / (std::exp(2.0) - 1); });
  EXPECT_GT(d_uniform, 0.1);
  EXPECT_LT(d_tilted, 1.63 / std::sqrt(n));
}

TEST(SimulateBivariate, SkewedCovariateWarns) {
  const auto field = testing::strip_partition({0.0}, 5.0, 5.0);
  auto spec = bivariate_spec(1.0, 1.0);
  spec.nu = {NonspatialDistribution::beta(2, 5)};
  EXPECT_EQ(simulate_bivariate(spec, field, std::nullopt, 1).warnings.size(), 1u);
}

TEST(SimulateBivariate, UnboundedCovariateRejected) {
  const auto field = testing::strip_partition({0.0}, 5.0, 5.0);
  auto expect_unbounded = [&](const BivariateSimulationSpec& s) {
    try {
      (void)simulate_bivariate(s, field, std::nullopt, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::UnboundedCovariate);
    }
  };
  auto spec = bivariate_spec(1.0, 1.0);
  spec.nu = {NonspatialDistribution::normal(0, 1)};
  expect_unbounded(spec);
  spec.nu = {NonspatialDistribution::uniform(0, 2)};
  expect_unbounded(spec);
  spec.nu = {NonspatialDistribution::uniform(0, 1)};
  spec.bounds.clear();
  expect_unbounded(spec);
}

TEST(SimulateBivariate, LatentLayoutChecked) {
  const auto field = testing::strip_partition({0.0}, 5.0, 5.0);
  GPRealization one{{{2.5, 2.5}}, vec({0.0})};
  EXPECT_THROW((void)simulate_bivariate(bivariate_spec(1, 1), field, one, 1), Error);
}

TEST(MakeLattice, CoversEveryUnit) {
  const auto field = testing::tract_partition(25, 25, 1.0, 1);
  const auto sites = make_lattice(field, 50);
  std::vector<bool> hit(field.unit_count(), false);
  for (const auto& s : sites) hit[*field.unit_of(s)] = true;
  EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
}

TEST(NearestSite, MatchesBruteForce) {
  Rng rng = make_rng(9);
  std::vector<Location> sites;
  for (int i = 0; i < 300; ++i) sites.push_back({10 * uniform01(rng), 3 * uniform01(rng)});
  const NearestSite nearest(sites);
  for (int t = 0; t < 2000; ++t) {
    const Location q{12 * uniform01(rng) - 1, 5 * uniform01(rng) - 1};
    std::size_t best = 0;
    for (std::size_t k = 1; k < sites.size(); ++k) {
      if (distance(q, sites[k]) < distance(q, sites[best])) best = k;
    }
    ASSERT_EQ(nearest(q), best);
  }
}

}  // namespace
}  // namespace tscox
