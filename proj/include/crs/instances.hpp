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

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crs/graph.hpp"
#include "crs/rng.hpp"

namespace crs {

// K4 on vertices 0..3; index t is the t-th arrival: 01, 23, 12, 30, 02, 13.
inline GraphInstance gen_example_4cycle(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  const double c = (1.0 - eps) / 2.0;
  GraphInstance g;
  g.vertex_count = 4;
  g.edges = {{0, 1, c}, {2, 3, c}, {1, 2, c}, {3, 0, c}, {0, 2, eps}, {1, 3, eps}};
  g.order = std::vector<int>{0, 1, 2, 3, 4, 5};
  g.symmetry = std::vector<std::vector<int>>{{0, 1}, {2, 3}, {4, 5}};
  return g;
}

// Path 0-1-2-3; the middle edge (index 1) arrives last.
inline GraphInstance gen_three_path(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  GraphInstance g;
  g.vertex_count = 4;
  g.edges = {{0, 1, 1.0 - eps}, {1, 2, eps}, {2, 3, 1.0 - eps}};
  g.order = std::vector<int>{0, 2, 1};
  g.bipartition = std::vector<int>{0, 1, 0, 1};
  g.symmetry = std::vector<std::vector<int>>{{0, 2}, {1}};
  return g;
}

// Left vertex i is i, right vertex j is n + j; edge (i, j) has index i*n + j.
inline GraphInstance gen_complete_bipartite(int n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  GraphInstance g;
  g.vertex_count = 2 * n;
  const double x = 1.0 / n;
  g.edges.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.edges.push_back({i, n + j, x});
  std::vector<int> side(2 * n, 0);
  std::fill(side.begin() + n, side.end(), 1);
  g.bipartition = side;
  std::vector<int> all(g.edges.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  g.symmetry = std::vector<std::vector<int>>{all};
  return g;
}

// u1,u2,u3 are 0,1,2 and v1,v2,v3 are 3,4,5; edges in arrival order e1..e6.
inline GraphInstance gen_neg_correlation() {
  const double x = 1.0 / 3.0;
  GraphInstance g;
  g.vertex_count = 6;
  g.edges = {{2, 4, x}, {1, 5, x}, {1, 4, x}, {1, 3, x}, {0, 4, x}, {0, 3, x}};
  g.order = std::vector<int>{0, 1, 2, 3, 4, 5};
  g.bipartition = std::vector<int>{0, 0, 0, 1, 1, 1};
  return g;
}

// Center edge (0, 1) is index 0; pendants of 0 are 2..n+1, pendants of 1 are n+2..2n+1.
inline GraphInstance gen_star_pair(int n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const double x = 1.0 / (n + 1);
  GraphInstance g;
  g.vertex_count = 2 * n + 2;
  g.edges.push_back({0, 1, x});
  for (int i = 0; i < n; ++i) g.edges.push_back({0, 2 + i, x});
  for (int i = 0; i < n; ++i) g.edges.push_back({1, n + 2 + i, x});
  std::vector<int> side(g.vertex_count, 0);
  side[1] = 1;
  for (int i = 0; i < n; ++i) side[2 + i] = 1;
  g.bipartition = side;
  std::vector<int> pend;
  for (int i = 1; i <= 2 * n; ++i) pend.push_back(i);
  g.symmetry = std::vector<std::vector<int>>{{0}, pend};
  return g;
}

// Copy 1 of w keeps id w and the original edge indices; copies 2..k get new
// ids and their edges are appended, so every other edge keeps its index.
inline GraphInstance split_vertex(const GraphInstance& g, int w, int k) {
  if (w < 0 || w >= g.vertex_count) throw std::invalid_argument("split_vertex: bad vertex");
  if (k < 1) throw std::invalid_argument("split_vertex: k must be at least 1");
  GraphInstance h;
  h.vertex_count = g.vertex_count + (k - 1);
  h.edges = g.edges;
  std::vector<std::vector<int>> copies_of(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& orig = g.edges[i];
    if (orig.u != w && orig.v != w) continue;
    const double share = orig.x / k;
    const int r = (orig.u == w) ? orig.v : orig.u;
    h.edges[i].x = share;
    for (int c = 1; c < k; ++c) {
      copies_of[i].push_back(h.edge_count());
      h.edges.push_back({g.vertex_count + c - 1, r, share});
    }
  }
  if (g.order) {
    std::vector<int> ord;
    for (int t : *g.order) {
      ord.push_back(t);
      for (int c : copies_of[t]) ord.push_back(c);
    }
    h.order = ord;
  }
  if (g.bipartition) {
    std::vector<int> side = *g.bipartition;
    for (int c = 1; c < k; ++c) side.push_back((*g.bipartition)[w]);
    h.bipartition = side;
  }
  return h;
}

namespace detail {
// Scales each edge by density / max(raw load of its endpoints), so every
// vertex load is at most density.
inline void scale_to_feasible(GraphInstance& g, double density) {
  std::vector<double> raw = vertex_loads(g);
  for (Edge& e : g.edges) {
    const double m = std::max(raw[e.u], raw[e.v]);
    e.x = m > 0.0 ? std::min(1.0, e.x * density / m) : 0.0;
  }
}
}  // namespace detail

// n vertices, min(m, n(n-1)/2) distinct uniform random edges, x scaled so
// every load is at most density (density in [0,1]).
inline GraphInstance gen_random_feasible(int n, int m, double density, std::uint64_t seed) {
  if (n < 0 || m < 0) throw std::invalid_argument("n and m must be non-negative");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in [0,1]");
  Rng rng = trial_stream(seed, 0, 0x67656eULL);
  GraphInstance g;
  g.vertex_count = n;
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  const long long target = std::min<long long>(m, max_edges);
  std::set<std::pair<int, int>> seen;
  std::uniform_int_distribution<int> pick(0, std::max(0, n - 1));
  while (static_cast<long long>(g.edges.size()) < target) {
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (!seen.insert(std::minmax(a, b)).second) continue;
    g.edges.push_back({a, b, 0.05 + uniform01(rng)});
  }
  detail::scale_to_feasible(g, density);
  return g;
}

// Bipartite variant: left ids 0..nl-1, right ids nl..nl+nr-1, bipartition set.
inline GraphInstance gen_random_bipartite_feasible(int nl, int nr, int m, double density, std::uint64_t seed) {
  if (nl < 0 || nr < 0 || m < 0) throw std::invalid_argument("sizes must be non-negative");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in [0,1]");
  Rng rng = trial_stream(seed, 0, 0x626970ULL);
  GraphInstance g;
  g.vertex_count = nl + nr;
  const long long target = std::min<long long>(m, static_cast<long long>(nl) * nr);
  std::set<std::pair<int, int>> seen;
  std::uniform_int_distribution<int> pl(0, std::max(0, nl - 1)), pr(0, std::max(0, nr - 1));
  while (static_cast<long long>(g.edges.size()) < target) {
    int a = pl(rng), b = nl + pr(rng);
    if (!seen.insert({a, b}).second) continue;
    g.edges.push_back({a, b, 0.05 + uniform01(rng)});
  }
  detail::scale_to_feasible(g, density);
  std::vector<int> side(g.vertex_count, 0);
  std::fill(side.begin() + nl, side.end(), 1);
  g.bipartition = side;
  return g;
}

}  // namespace crs
