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

#pragma once

#include <stdexcept>
#include <vector>

#include "crs/graph.hpp"

namespace crs {

struct Reduction {
  GraphInstance reduced;
  // Original edge index -> reduced edge index.
  std::vector<int> edge_map;
  int added_vertices = 0;
  int added_edges = 0;
};

inline constexpr double kDefaultSkipTol = 1e-12;

namespace detail {
// Original edges keep their indices and values; symmetry classes carry over,
// since the gadgets depend only on vertex loads and so every automorphism of
// (G, x) extends to the reduced instance.
inline Reduction start_reduction(const GraphInstance& g) {
  Reduction r;
  r.reduced.vertex_count = g.vertex_count;
  r.reduced.edges = g.edges;
  r.reduced.symmetry = g.symmetry;
  r.edge_map.resize(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) r.edge_map[i] = static_cast<int>(i);
  return r;
}
}  // namespace detail

// Attaches a 7-cycle v0 v1 ... v6 v0 at every vertex v0 with slack > skip_tol;
// cycle edge i carries (1 - load)/2 for even i and (1 + load)/2 for odd i.
inline Reduction regularize_seven_cycle(const GraphInstance& g, double skip_tol = kDefaultSkipTol) {
  const std::vector<double> slack = one_regular_slack(g);
  const std::vector<double> load = vertex_loads(g);
  Reduction r = detail::start_reduction(g);
  for (int v0 = 0; v0 < g.vertex_count; ++v0) {
    if (!(slack[v0] > skip_tol)) continue;
    const double lo = (1.0 - load[v0]) / 2.0, hi = (1.0 + load[v0]) / 2.0;
    const int base = r.reduced.vertex_count;
    r.reduced.vertex_count += 6;
    int prev = v0;
    for (int i = 0; i < 7; ++i) {
      const int next = (i == 6) ? v0 : base + i;
      r.reduced.edges.push_back({prev, next, (i % 2 == 0) ? lo : hi});
      prev = next;
    }
  }
  r.added_vertices = r.reduced.vertex_count - g.vertex_count;
  r.added_edges = r.reduced.edge_count() - g.edge_count();
  return r;
}

// Pads both sides to n vertices, adds a dummy K_{n,n} with values
// (1/n^2) sum_{v in V} x_v, and joins each vertex with slack > skip_tol to
// every dummy on the opposite side with value (1 - load)/n.
inline Reduction regularize_biclique(const GraphInstance& g, double skip_tol = kDefaultSkipTol) {
  g.check_structure();
  std::vector<int> side;
  if (g.bipartition) {
    side = *g.bipartition;
  } else if (auto b = bipartition_of(g)) {
    side = *b;
  } else {
    throw std::invalid_argument("biclique reduction needs a bipartite instance");
  }
  const std::vector<double> slack = one_regular_slack(g);
  std::vector<double> load = vertex_loads(g);
  Reduction r = detail::start_reduction(g);
  std::vector<int> left, right;
  for (int v = 0; v < g.vertex_count; ++v) (side[v] == 0 ? left : right).push_back(v);
  const int n = static_cast<int>(std::max(left.size(), right.size()));
  auto pad = [&](std::vector<int>& part, int colour) {
    while (static_cast<int>(part.size()) < n) {
      part.push_back(r.reduced.vertex_count++);
      side.push_back(colour);
      load.push_back(0.0);
    }
  };
  pad(left, 0);
  pad(right, 1);
  if (n == 0) {
    r.reduced.bipartition = side;
    return r;
  }
  auto slack_of = [&](int v) { return v < g.vertex_count ? slack[v] : 1.0; };
  const int lk = r.reduced.vertex_count;
  const int rk = lk + n;
  r.reduced.vertex_count += 2 * n;
  for (int i = 0; i < n; ++i) side.push_back(0);
  for (int i = 0; i < n; ++i) side.push_back(1);
  double right_sum = 0.0;
  for (int v : right) right_sum += load[v];
  const double dn = static_cast<double>(n);
  for (int u : left) {
    if (!(slack_of(u) > skip_tol)) continue;
    for (int j = 0; j < n; ++j) r.reduced.edges.push_back({u, rk + j, (1.0 - load[u]) / dn});
  }
  for (int v : right) {
    if (!(slack_of(v) > skip_tol)) continue;
    for (int i = 0; i < n; ++i) r.reduced.edges.push_back({lk + i, v, (1.0 - load[v]) / dn});
  }
  const double dummy = right_sum / (dn * dn);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.reduced.edges.push_back({lk + i, rk + j, dummy});
  r.reduced.bipartition = side;
  r.added_vertices = r.reduced.vertex_count - g.vertex_count;
  r.added_edges = r.reduced.edge_count() - g.edge_count();
  return r;
}

}  // namespace crs
