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

#include <cstring>
#include <set>

#include "crs/graph.hpp"
#include "crs/instances.hpp"
#include "crs/regularize.hpp"
#include "oracles.hpp"

using namespace crs;

namespace {

void expect_tight(const GraphInstance& g, double tol = 1e-9) {
  for (double l : vertex_loads(g)) EXPECT_NEAR(l, 1.0, tol);
}

void expect_map_preserves(const GraphInstance& g, const Reduction& r) {
  ASSERT_EQ(r.edge_map.size(), g.edges.size());
  std::set<int> image(r.edge_map.begin(), r.edge_map.end());
  EXPECT_EQ(image.size(), r.edge_map.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& a = g.edges[i];
    const Edge& b = r.reduced.edges[r.edge_map[i]];
    EXPECT_EQ(std::memcmp(&a.x, &b.x, sizeof(double)), 0);
    EXPECT_EQ(std::minmax(a.u, a.v), std::minmax(b.u, b.v));
  }
}

std::vector<double> gadget_values(const Reduction& r, std::size_t original_edges) {
  std::vector<double> out;
  for (std::size_t i = original_edges; i < r.reduced.edges.size(); ++i) out.push_back(r.reduced.edges[i].x);
  return out;
}

}  // namespace

// Two gadgets of 6 vertices and 7 edges each.
TEST(SevenCycle, SingleHalfEdge) {
  GraphInstance g{2, {{0, 1, 0.5}}};
  Reduction r = regularize_seven_cycle(g);
  EXPECT_EQ(r.added_vertices, 12);
  EXPECT_EQ(r.added_edges, 14);
  auto vals = gadget_values(r, 1);
  for (std::size_t i = 0; i < vals.size(); ++i) EXPECT_DOUBLE_EQ(vals[i], (i % 7) % 2 == 0 ? 0.25 : 0.75);
  expect_tight(r.reduced);
  expect_map_preserves(g, r);
}

TEST(SevenCycle, AlreadyTightAddsNothing) {
  GraphInstance g = gen_complete_bipartite(2);
  for (double tol : {0.0, 1e-12, 1e-3}) {
    Reduction r = regularize_seven_cycle(g, tol);
    EXPECT_EQ(r.added_vertices, 0);
    EXPECT_EQ(r.added_edges, 0);
  }
  // A negative threshold forces zero-valued gadgets everywhere.
  Reduction forced = regularize_seven_cycle(g, -1.0);
  EXPECT_EQ(forced.added_vertices, 24);
  expect_tight(forced.reduced);
}

// Load 0 at the anchor puts 1/2 on every gadget edge.
TEST(SevenCycle, ZeroLoadAnchor) {
  GraphInstance g{3, {{0, 1, 0.0}, {1, 2, 1.0}}};
  Reduction r = regularize_seven_cycle(g);
  EXPECT_EQ(r.added_vertices, 6);
  for (double v : gadget_values(r, 2)) EXPECT_DOUBLE_EQ(v, 0.5);
  expect_tight(r.reduced);
}

TEST(SevenCycle, InfeasibleThrows) {
  EXPECT_THROW(regularize_seven_cycle(GraphInstance{3, {{0, 1, 0.7}, {1, 2, 0.7}}}), InfeasibleError);
}

TEST(Biclique, SingleFullEdge) {
  GraphInstance g{2, {{0, 1, 1.0}}, std::nullopt, std::vector<int>{0, 1}};
  Reduction r = regularize_biclique(g);
  EXPECT_EQ(r.added_vertices, 2);
  ASSERT_EQ(r.added_edges, 1);
  EXPECT_DOUBLE_EQ(r.reduced.edges.back().x, 1.0);
  expect_tight(r.reduced);

  Reduction forced = regularize_biclique(g, -1.0);
  ASSERT_EQ(forced.added_edges, 3);
  for (int i = 1; i < 3; ++i) EXPECT_DOUBLE_EQ(forced.reduced.edges[i].x, 0.0);
  EXPECT_DOUBLE_EQ(forced.reduced.edges[3].x, 1.0);
}

TEST(Biclique, SingleHalfEdge) {
  GraphInstance g{2, {{0, 1, 0.5}}, std::nullopt, std::vector<int>{0, 1}};
  Reduction r = regularize_biclique(g);
  ASSERT_EQ(r.added_edges, 3);
  EXPECT_DOUBLE_EQ(r.reduced.edges[1].x, 0.5);
  EXPECT_DOUBLE_EQ(r.reduced.edges[2].x, 0.5);
  EXPECT_DOUBLE_EQ(r.reduced.edges[3].x, 0.5);
  expect_tight(r.reduced);
}

TEST(Biclique, TightInputHasZeroCrossEdges) {
  GraphInstance g = gen_complete_bipartite(3);
  Reduction r = regularize_biclique(g, -1.0);
  EXPECT_EQ(r.added_edges, 9 + 9 + 9);
  for (std::size_t i = 9; i < 27; ++i) EXPECT_DOUBLE_EQ(r.reduced.edges[i].x, 0.0);
  for (std::size_t i = 27; i < 36; ++i) EXPECT_NEAR(r.reduced.edges[i].x, 1.0 / 3.0, 1e-15);
  expect_tight(r.reduced);
}

TEST(Biclique, UnevenSidesArePadded) {
  GraphInstance g{3, {{0, 1, 0.3}, {0, 2, 0.4}}, std::nullopt, std::vector<int>{0, 1, 1}};
  Reduction r = regularize_biclique(g);
  expect_tight(r.reduced);
  ASSERT_TRUE(r.reduced.bipartition);
  EXPECT_TRUE(bipartition_of(r.reduced));
  for (const Edge& e : r.reduced.edges) EXPECT_NE((*r.reduced.bipartition)[e.u], (*r.reduced.bipartition)[e.v]);
}

TEST(Biclique, NonBipartiteThrows) {
  EXPECT_THROW(regularize_biclique(gen_example_4cycle(0.1)), std::invalid_argument);
}

TEST(ReductionProperties, RandomInstancesBecomeTight) {
  int with_short_odd = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GraphInstance g = gen_random_feasible(8, 4 + static_cast<int>(seed % 9), 0.3 + 0.7 * (seed % 10) / 9.0, seed);
    Reduction r = regularize_seven_cycle(g);
    expect_tight(r.reduced);
    expect_map_preserves(g, r);
    auto before = short_odd_cycles(g);
    auto after = short_odd_cycles(r.reduced);
    with_short_odd += before.has_3_cycle || before.has_5_cycle;
    if (!before.has_3_cycle) {
      EXPECT_FALSE(after.has_3_cycle) << seed;
    }
    if (!before.has_5_cycle) {
      EXPECT_FALSE(after.has_5_cycle) << seed;
    }

    GraphInstance b = gen_random_bipartite_feasible(3 + seed % 3, 4, 8, 0.9, seed);
    Reduction rb = regularize_biclique(b);
    expect_tight(rb.reduced);
    expect_map_preserves(b, rb);
    EXPECT_TRUE(bipartition_of(rb.reduced)) << seed;
  }
  EXPECT_GT(with_short_odd, 0);
  EXPECT_LT(with_short_odd, 100);
}

TEST(ReductionProperties, SevenCycleAgreesWithCycleEnumerator) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GraphInstance g = gen_random_bipartite_feasible(2, 2, 3, 0.8, seed);
    Reduction r = regularize_seven_cycle(g);
    auto lens = oracle::cycle_lengths(r.reduced);
    EXPECT_EQ(lens.count(3), 0u);
    EXPECT_EQ(lens.count(5), 0u);
  }
}
