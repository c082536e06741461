// Copyright 2026 The crs-matching Authors.
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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crs/attenuation.hpp"
#include "crs/estimator.hpp"
#include "crs/graph.hpp"
#include "crs/instances.hpp"
#include "crs/rcrs.hpp"
#include "crs/stats.hpp"
#include "oracles.hpp"

using namespace crs;

namespace {

const double kE = std::exp(1.0);

// P[R_e empty | S_e = 1] on a triangle, by enumerating the 3! arrival orders
// and the 2^6 (X, A) patterns.
double triangle_no_relevant_oracle(double x, const Attenuation& fn) {
  const double a = fn(x);
  std::vector<int> order{0, 1, 2};
  double joint = 0.0, surv_e = 0.0;
  do {
    for (int bits = 0; bits < 64; ++bits) {
      double w = 1.0 / 6.0;
      std::vector<char> s(3);
      for (int i = 0; i < 3; ++i) {
        const bool xb = (bits >> (2 * i)) & 1, ab = (bits >> (2 * i + 1)) & 1;
        w *= (xb ? x : 1.0 - x) * (ab ? a : 1.0 - a);
        s[i] = xb && ab;
      }
      if (!s[0]) continue;
      surv_e += w;
      const auto pos0 = std::find(order.begin(), order.end(), 0) - order.begin();
      bool empty = true;
      for (int f : {1, 2})
        if (s[f] && std::find(order.begin(), order.end(), f) - order.begin() < pos0) empty = false;
      if (empty) joint += w;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return joint / surv_e;
}

std::vector<std::uint64_t> rcrs_counts(const GraphInstance& g, const Attenuation& fn, std::uint64_t trials,
                                       std::uint64_t seed) {
  RcrsRunner runner(g, fn);
  std::vector<std::uint64_t> hits(g.edges.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng = trial_stream(seed, t);
    for (int e : runner.run(rng)) ++hits[e];
  }
  return hits;
}

}  // namespace

TEST(Attenuation, EndpointValues) {
  EXPECT_DOUBLE_EQ(Attenuation::a1()(0.0), 1.0);
  EXPECT_DOUBLE_EQ(Attenuation::a2()(0.0), 1.0);
  EXPECT_NEAR(Attenuation::a2()(1.0), 4.0 / (kE * kE), 1e-15);
  EXPECT_NEAR(Attenuation::a2()(1.0), 0.541341, 1e-6);
  EXPECT_NEAR(Attenuation::a1()(1.0), (kE - 2.0) * (kE - 2.0), 1e-15);
  EXPECT_NEAR(Attenuation::a1()(1.0), 0.515929, 1e-6);
}

TEST(Attenuation, A2MatchesDirectFormulaAwayFromOne) {
  for (double x = 0.0; x < 0.99; x += 0.013) {
    const double direct = std::pow(1.0 - x, 4) / std::pow(std::exp(x) - kE * x, 2);
    EXPECT_NEAR(Attenuation::a2()(x), direct, 1e-12 * direct) << x;
  }
}

TEST(Attenuation, A2ContinuousNearOne) {
  const auto a2 = Attenuation::a2();
  const double lim = 4.0 / (kE * kE);
  for (double d : {1e-3, 1e-4, 1e-5, 1e-6, 1e-8, 1e-12}) EXPECT_NEAR(a2(1.0 - d), lim, 3.0 * d);
  // No jump across the series switch: extrapolate linearly from the direct
  // side and compare with the series side.
  const double h = 2e-8;
  for (double sw : {0.1, 1e-4}) {
    const double xa = 1.0 - sw - 1e-8, xb = 1.0 - sw + 1e-8;
    const double slope = (a2(xa) - a2(xa - h)) / h;
    EXPECT_NEAR(a2(xb), a2(xa) + slope * (xb - xa), 1e-12) << sw;
  }
}

TEST(Attenuation, DecreasingAndInRange) {
  for (const auto& fn : {Attenuation::a1(), Attenuation::a2()}) {
    double prev = 2.0;
    for (int i = 0; i <= 1000; ++i) {
      const double v = fn(i / 1000.0);
      EXPECT_LE(v, prev);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(Attenuation, RangeAndParse) {
  EXPECT_THROW(Attenuation::a1()(-0.1), std::domain_error);
  EXPECT_THROW(Attenuation::a2()(1.1), std::domain_error);
  EXPECT_EQ(Attenuation::parse("a1").name(), "a1");
  EXPECT_EQ(Attenuation::parse("a2").name(), "a2");
  EXPECT_DOUBLE_EQ(Attenuation::parse("const=0.25")(0.7), 0.25);
  EXPECT_THROW(Attenuation::parse("a3"), std::invalid_argument);
  EXPECT_THROW(Attenuation::parse("const=2"), std::invalid_argument);
  auto t = Attenuation::table({1.0, 0.5, 0.0});
  EXPECT_DOUBLE_EQ(t(0.25), 0.75);
  EXPECT_DOUBLE_EQ(t(1.0), 0.0);
}

TEST(RunRcrs, ZeroValuesGiveEmpty) {
  GraphInstance g{4, {{0, 1, 0.0}, {1, 2, 0.0}, {2, 3, 0.0}}};
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng = trial_stream(3, t);
    EXPECT_TRUE(run_rcrs(g, Attenuation::a1(), rng, true).matching.selected.empty());
  }
}

TEST(RunRcrs, SingleFullEdgeFrequency) {
  GraphInstance g{2, {{0, 1, 1.0}}};
  auto hits = rcrs_counts(g, Attenuation::a1(), 100000, 4);
  auto [lo, hi] = wilson_interval(hits[0], 100000, 3.0);
  EXPECT_LE(lo, Attenuation::a1()(1.0));
  EXPECT_GE(hi, Attenuation::a1()(1.0));
}

TEST(RunRcrs, MatchesExhaustiveOracle) {
  const std::vector<GraphInstance> graphs = {
      GraphInstance{3, {{0, 1, 0.5}, {1, 2, 0.5}, {0, 2, 0.5}}},
      GraphInstance{4, {{0, 1, 0.7}, {1, 2, 0.3}, {2, 3, 0.6}}},
      gen_complete_bipartite(2),
  };
  for (const auto& fn : {Attenuation::a1(), Attenuation::a2()}) {
    for (const auto& g : graphs) {
      std::vector<double> att;
      for (const Edge& e : g.edges) att.push_back(fn(e.x));
      auto exact = oracle::rcrs_by_enumeration(g, att);
      const std::uint64_t n = 100000;
      auto hits = rcrs_counts(g, fn, n, 77);
      const double z = bonferroni_z(3.0, g.edges.size());
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [lo, hi] = wilson_interval(hits[e], n, z);
        EXPECT_LE(lo, exact[e]) << fn.name() << " edge " << e;
        EXPECT_GE(hi, exact[e]) << fn.name() << " edge " << e;
      }
    }
  }
}

TEST(RunRcrs, OutputsAreMatchingsOfSurvivors) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GraphInstance g = gen_random_feasible(12, 30, 1.0, seed);
    for (std::uint64_t t = 0; t < 200; ++t) {
      Rng rng = trial_stream(seed, t);
      auto rec = run_rcrs(g, Attenuation::a1(), rng, true);
      EXPECT_TRUE(is_matching(g, rec.matching.selected));
      for (int e : rec.matching.selected) EXPECT_TRUE(rec.matching.survival_states[e]);
    }
  }
}

// The runner throws InvariantViolation if a diagnosed run shows an edge with
// two simple-blockers, or a surviving edge whose relevant edges (at most one)
// are all simple-blocked but that was not matched.
TEST(RunRcrs, DiagnosticInvariantsHoldAndAreExercised) {
  std::uint64_t empty_matched = 0, one_blocked = 0, one_blocked_matched = 0;
  const std::vector<GraphInstance> graphs = {gen_complete_bipartite(4), gen_star_pair(5),
                                             gen_example_4cycle(0.2), gen_random_feasible(10, 25, 1.0, 9)};
  for (const auto& g : graphs) {
    RcrsRunner runner(g, Attenuation::a2());
    for (std::uint64_t t = 0; t < 20000; ++t) {
      Rng rng = trial_stream(101, t);
      RcrsRunRecord rec;
      ASSERT_NO_THROW(rec = runner.run_record(rng, true));
      std::vector<char> in_m(g.edges.size(), 0);
      for (int e : rec.matching.selected) in_m[e] = 1;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (!rec.matching.survival_states[e]) continue;
        if (rec.relevant_count[e] == 0) {
          EXPECT_TRUE(in_m[e]);
          ++empty_matched;
        }
        if (rec.relevant_count[e] == 1 && rec.relevant[e][0].simple_blocked) {
          ++one_blocked;
          one_blocked_matched += in_m[e];
        }
      }
    }
  }
  EXPECT_GT(empty_matched, 1000u);
  EXPECT_GT(one_blocked, 100u);
  EXPECT_EQ(one_blocked, one_blocked_matched);
}

TEST(RunRcrs, DeterministicPerStream) {
  GraphInstance g = gen_random_feasible(10, 20, 1.0, 4);
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng a = trial_stream(6, t), b = trial_stream(6, t);
    auto ra = run_rcrs(g, Attenuation::a1(), a, true);
    auto rb = run_rcrs(g, Attenuation::a1(), b, true);
    EXPECT_EQ(ra.arrival_times, rb.arrival_times);
    EXPECT_EQ(ra.matching.selected, rb.matching.selected);
    EXPECT_EQ(ra.matching.survival_states, rb.matching.survival_states);
    EXPECT_EQ(ra.relevant_count, rb.relevant_count);
  }
}

// Reversing the edge list changes every draw but not the distribution.
TEST(RunRcrs, ExchangeableUnderEdgePermutation) {
  GraphInstance g = gen_random_feasible(7, 12, 1.0, 31);
  GraphInstance h = g;
  std::reverse(h.edges.begin(), h.edges.end());
  const std::uint64_t n = 100000;
  auto hg = rcrs_counts(g, Attenuation::a1(), n, 1);
  auto hh = rcrs_counts(h, Attenuation::a1(), n, 2);
  const std::size_t m = g.edges.size();
  const double z = bonferroni_z(3.0, m);
  for (std::size_t e = 0; e < m; ++e) {
    const double p1 = static_cast<double>(hg[e]) / n, p2 = static_cast<double>(hh[m - 1 - e]) / n;
    const double se = std::sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / n);
    EXPECT_LE(std::abs(p1 - p2), z * se + 1e-12) << e;
  }
}

TEST(NoRelevant, SingleEdgeIsCertain) {
  GraphInstance g{2, {{0, 1, 0.4}}};
  auto est = estimate_no_relevant_prob(g, Attenuation::a1(), 0, 1000, 1);
  EXPECT_EQ(est.successes, 1000u);
  EXPECT_DOUBLE_EQ(est.value, 1.0);
}

TEST(NoRelevant, TriangleMatchesEnumeration) {
  GraphInstance g{3, {{0, 1, 0.5}, {1, 2, 0.5}, {0, 2, 0.5}}};
  for (const auto& fn : {Attenuation::a1(), Attenuation::a2(), Attenuation::constant(1.0)}) {
    const double exact = triangle_no_relevant_oracle(0.5, fn);
    const double s = fn.survival(0.5);
    EXPECT_NEAR(exact, 1.0 - s + s * s / 3.0, 1e-12);
    auto est = estimate_no_relevant_prob(g, fn, 0, 200000, 5, 3.5);
    EXPECT_LE(est.ci_lo, exact) << fn.name();
    EXPECT_GE(est.ci_hi, exact) << fn.name();
  }
}

TEST(NoRelevant, StarPairCenterEdge) {
  GraphInstance g = gen_star_pair(200);
  auto est = estimate_no_relevant_prob(g, Attenuation::constant(1.0), 0, 100000, 12);
  EXPECT_NEAR(est.value, (1.0 - std::exp(-2.0)) / 2.0, 0.01);
}

TEST(NoRelevant, Errors) {
  GraphInstance g{2, {{0, 1, 0.4}}};
  EXPECT_THROW(estimate_no_relevant_prob(g, Attenuation::a1(), 0, 0, 1), std::invalid_argument);
  EXPECT_THROW(estimate_no_relevant_prob(g, Attenuation::a1(), 3, 10, 1), std::out_of_range);
}

TEST(RcrsGuarantee, CompleteBipartiteSmallScale) {
  EstimateOptions opt;
  opt.trials = 20000;
  opt.pool = true;
  opt.seed = 3;
  auto rep = estimate_selectability(gen_complete_bipartite(10), RcrsScheme{Attenuation::a1()}, opt);
  ASSERT_EQ(rep.classes.size(), 1u);
  const double hw = 0.5 * (rep.classes[0].ci_hi - rep.classes[0].ci_lo);
  EXPECT_GE(rep.classes[0].ratio, 0.474 - 3.0 * hw);
}
