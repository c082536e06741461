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
#include <numeric>
#include <random>

#include "crs/graph.hpp"
#include "crs/instance_io.hpp"
#include "crs/instances.hpp"
#include "oracles.hpp"

using namespace crs;

namespace {

GraphInstance cycle(int n, double x) {
  GraphInstance g;
  g.vertex_count = n;
  for (int i = 0; i < n; ++i) g.edges.push_back({i, (i + 1) % n, x});
  return g;
}

GraphInstance relabel(const GraphInstance& g, const std::vector<int>& perm) {
  GraphInstance h = g;
  for (Edge& e : h.edges) {
    e.u = perm[e.u];
    e.v = perm[e.v];
  }
  h.bipartition.reset();
  return h;
}

}  // namespace

TEST(Validate, SingleEdgeFullValue) {
  GraphInstance g{2, {{0, 1, 1.0}}};
  auto r = validate_instance(g, kFeasibilityTol);
  EXPECT_TRUE(r.feasible);
  EXPECT_DOUBLE_EQ(r.per_vertex_load[0], 1.0);
  EXPECT_DOUBLE_EQ(r.per_vertex_load[1], 1.0);
}

TEST(Validate, FourCycleLoadsAreOne) {
  auto r = validate_instance(gen_example_4cycle(0.01));
  EXPECT_TRUE(r.feasible);
  for (double l : r.per_vertex_load) EXPECT_NEAR(l, 1.0, 1e-15);
}

TEST(Validate, SharedVertexOverload) {
  GraphInstance g{3, {{0, 1, 0.6}, {1, 2, 0.6}}};
  auto r = validate_instance(g);
  EXPECT_FALSE(r.feasible);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].first, 1);
  EXPECT_NEAR(r.violations[0].second, 1.2, 1e-15);
}

TEST(Validate, StructuralErrorsAreDistinct) {
  GraphInstance bad_endpoint{2, {{0, 2, 0.5}}};
  EXPECT_THROW(validate_instance(bad_endpoint), StructuralError);
  GraphInstance dup{2, {{0, 1, 0.2}, {1, 0, 0.2}}};
  EXPECT_THROW(validate_instance(dup), StructuralError);
  GraphInstance loop{2, {{1, 1, 0.2}}};
  EXPECT_THROW(validate_instance(loop), StructuralError);
  GraphInstance range{2, {{0, 1, 1.5}}};
  EXPECT_THROW(validate_instance(range), StructuralError);
  GraphInstance order{3, {{0, 1, 0.2}, {1, 2, 0.2}}, std::vector<int>{0, 0}};
  EXPECT_THROW(validate_instance(order), StructuralError);
  GraphInstance over{3, {{0, 1, 0.6}, {1, 2, 0.6}}};
  EXPECT_NO_THROW(validate_instance(over));
}

TEST(Validate, ToleranceIsConfigurable) {
  GraphInstance g{3, {{0, 1, 0.5}, {1, 2, 0.5 + 1e-7}}};
  EXPECT_FALSE(validate_instance(g, 1e-9).feasible);
  EXPECT_TRUE(validate_instance(g, 1e-6).feasible);
}

TEST(Validate, InvariantUnderRelabeling) {
  std::mt19937_64 rng(11);
  int infeasible = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    GraphInstance g = gen_random_feasible(7, 12, 1.0, seed);
    for (Edge& e : g.edges) e.x = std::min(1.0, e.x * 1.3);
    std::vector<int> perm(g.vertex_count);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto r = validate_instance(g);
    auto q = validate_instance(relabel(g, perm));
    EXPECT_EQ(r.feasible, q.feasible);
    for (int v = 0; v < g.vertex_count; ++v) EXPECT_EQ(r.per_vertex_load[v], q.per_vertex_load[perm[v]]);
    infeasible += !r.feasible;
  }
  EXPECT_GT(infeasible, 0);
}

TEST(Slack, CompleteBipartiteIsTight) {
  for (double s : one_regular_slack(gen_complete_bipartite(5))) EXPECT_NEAR(s, 0.0, 1e-12);
}

TEST(Slack, SingleHalfEdge) {
  auto s = one_regular_slack(GraphInstance{2, {{0, 1, 0.5}}});
  EXPECT_DOUBLE_EQ(s[0], 0.5);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
}

TEST(Slack, FourCycleTight) {
  for (double s : one_regular_slack(gen_example_4cycle(0.01))) EXPECT_NEAR(s, 0.0, 1e-15);
}

TEST(Slack, InfeasibleThrows) {
  EXPECT_THROW(one_regular_slack(GraphInstance{3, {{0, 1, 0.6}, {1, 2, 0.6}}}), InfeasibleError);
}

TEST(Slack, HandshakeIdentity) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GraphInstance g = gen_random_feasible(9, 15, 0.9, seed);
    auto s = one_regular_slack(g);
    double lhs = std::accumulate(s.begin(), s.end(), 0.0);
    double sum_x = 0.0;
    for (const Edge& e : g.edges) sum_x += e.x;
    EXPECT_NEAR(lhs, g.vertex_count - 2.0 * sum_x, 1e-12) << "seed " << seed;
  }
}

TEST(OddCycles, FourCycleInstanceHasTriangle) {
  auto c = short_odd_cycles(gen_example_4cycle(0.01));
  EXPECT_TRUE(c.has_3_cycle);
  EXPECT_FALSE(c.has_5_cycle);  // K4 has only 4 vertices
}

TEST(OddCycles, BipartiteHasNone) {
  auto c = short_odd_cycles(gen_complete_bipartite(4));
  EXPECT_FALSE(c.has_3_cycle);
  EXPECT_FALSE(c.has_5_cycle);
}

TEST(OddCycles, SevenCycleHasNone) {
  auto c = short_odd_cycles(cycle(7, 0.5));
  EXPECT_FALSE(c.has_3_cycle);
  EXPECT_FALSE(c.has_5_cycle);
  EXPECT_TRUE(short_odd_cycles(cycle(5, 0.5)).has_5_cycle);
  EXPECT_TRUE(short_odd_cycles(cycle(3, 0.5)).has_3_cycle);
}

TEST(OddCycles, AgreesWithBruteForceEnumerator) {
  int with3 = 0, with5 = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const int n = 3 + static_cast<int>(seed % 6);
    const int m = static_cast<int>(seed % 13);
    GraphInstance g = gen_random_feasible(n, m, 1.0, seed);
    auto lens = oracle::cycle_lengths(g);
    auto c = short_odd_cycles(g);
    EXPECT_EQ(c.has_3_cycle, lens.count(3) > 0) << "seed " << seed;
    EXPECT_EQ(c.has_5_cycle, lens.count(5) > 0) << "seed " << seed;
    with3 += c.has_3_cycle;
    with5 += c.has_5_cycle;
  }
  EXPECT_GT(with3, 20);
  EXPECT_GT(with5, 20);
}

TEST(Bipartition, PathAlternates) {
  GraphInstance g{4, {{0, 1, 0.5}, {1, 2, 0.5}, {2, 3, 0.5}}};
  auto col = bipartition_of(g);
  ASSERT_TRUE(col);
  for (const Edge& e : g.edges) EXPECT_NE((*col)[e.u], (*col)[e.v]);
}

TEST(Bipartition, CompleteFourAbsent) { EXPECT_FALSE(bipartition_of(gen_example_4cycle(0.1))); }

TEST(Bipartition, DisconnectedComponents) {
  GraphInstance g{7, {{0, 1, 0.5}, {1, 2, 0.5}, {3, 4, 0.5}, {4, 5, 0.2}, {5, 3, 0.2}}};
  EXPECT_FALSE(bipartition_of(g));
  g.edges.pop_back();
  auto col = bipartition_of(g);
  ASSERT_TRUE(col);
  for (const Edge& e : g.edges) EXPECT_NE((*col)[e.u], (*col)[e.v]);
}

TEST(Matching, IsMatching) {
  GraphInstance g{4, {{0, 1, 0.5}, {1, 2, 0.5}, {2, 3, 0.5}}};
  EXPECT_TRUE(is_matching(g, {0, 2}));
  EXPECT_FALSE(is_matching(g, {0, 1}));
  EXPECT_TRUE(is_matching(g, {}));
}

TEST(InstanceJson, RoundTrip) {
  GraphInstance g = gen_example_4cycle(0.25);
  GraphInstance h = instance_from_json(json::parse(dump_json(to_json(g))));
  ASSERT_EQ(h.vertex_count, g.vertex_count);
  ASSERT_EQ(h.edges.size(), g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    EXPECT_EQ(h.edges[i].u, g.edges[i].u);
    EXPECT_EQ(h.edges[i].v, g.edges[i].v);
    EXPECT_EQ(h.edges[i].x, g.edges[i].x);
  }
  EXPECT_EQ(h.order, g.order);
  EXPECT_EQ(h.symmetry, g.symmetry);
  EXPECT_EQ(h.bipartition, g.bipartition);
}

TEST(InstanceJson, MalformedIsStructural) {
  EXPECT_THROW(instance_from_json(json::parse(R"({"vertices": 2, "edges": [[0, 5, 0.5]]})")), StructuralError);
  EXPECT_THROW(instance_from_json(json::parse(R"({"edges": []})")), StructuralError);
  EXPECT_THROW(instance_from_json(json::parse(R"({"vertices": 2, "edges": [[0, 1]]})")), StructuralError);
}
