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
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crs {

// Malformed input: bad endpoint, self-loop, duplicate edge, bad permutation.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formed input whose x lies outside the matching polytope.
class InfeasibleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Edge {
  int u = 0;
  int v = 0;
  double x = 0.0;
};

inline constexpr double kFeasibilityTol = 1e-9;

struct GraphInstance {
  int vertex_count = 0;
  std::vector<Edge> edges;
  std::optional<std::vector<int>> order;
  std::optional<std::vector<int>> bipartition;
  std::optional<std::vector<std::vector<int>>> symmetry;

  int edge_count() const { return static_cast<int>(edges.size()); }

  // Edge indices incident to each vertex, in input order.
  std::vector<std::vector<int>> incidence() const {
    std::vector<std::vector<int>> inc(vertex_count);
    for (int i = 0; i < edge_count(); ++i) {
      inc[edges[i].u].push_back(i);
      inc[edges[i].v].push_back(i);
    }
    return inc;
  }

  // Either the declared order or the identity permutation.
  std::vector<int> arrival_order() const {
    if (order) return *order;
    std::vector<int> id(edges.size());
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<int>(i);
    return id;
  }

  void check_structure() const {
    if (vertex_count < 0) throw StructuralError("negative vertex count");
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const Edge& e = edges[i];
      if (e.u < 0 || e.v < 0 || e.u >= vertex_count || e.v >= vertex_count)
        throw StructuralError("edge " + std::to_string(i) + " has an endpoint out of range");
      if (e.u == e.v) throw StructuralError("edge " + std::to_string(i) + " is a self-loop");
      if (!(e.x >= 0.0 && e.x <= 1.0))
        throw StructuralError("edge " + std::to_string(i) + " has x outside [0,1]");
      auto key = std::minmax(e.u, e.v);
      if (!seen.insert(key).second)
        throw StructuralError("edge " + std::to_string(i) + " duplicates an earlier edge");
    }
    if (order) {
      if (order->size() != edges.size()) throw StructuralError("order length differs from edge count");
      std::vector<char> hit(edges.size(), 0);
      for (int t : *order) {
        if (t < 0 || t >= edge_count() || hit[t]) throw StructuralError("order is not a permutation");
        hit[t] = 1;
      }
    }
    if (bipartition) {
      if (static_cast<int>(bipartition->size()) != vertex_count)
        throw StructuralError("bipartition length differs from vertex count");
      for (int side : *bipartition)
        if (side != 0 && side != 1) throw StructuralError("bipartition entries must be 0 or 1");
      for (const Edge& e : edges)
        if ((*bipartition)[e.u] == (*bipartition)[e.v])
          throw StructuralError("declared bipartition has a monochromatic edge");
    }
    if (symmetry) {
      std::vector<char> hit(edges.size(), 0);
      for (const auto& cls : *symmetry)
        for (int t : cls) {
          if (t < 0 || t >= edge_count() || hit[t])
            throw StructuralError("symmetry classes must be disjoint edge indices");
          hit[t] = 1;
        }
    }
  }
};

struct ValidationReport {
  bool feasible = true;
  std::vector<double> per_vertex_load;
  std::vector<std::pair<int, double>> violations;
};

struct MatchingResult {
  std::vector<int> selected;
  std::vector<std::uint8_t> active_states;
  std::vector<std::uint8_t> survival_states;
};

inline std::vector<double> vertex_loads(const GraphInstance& g) {
  std::vector<double> load(g.vertex_count, 0.0);
  for (const Edge& e : g.edges) {
    load[e.u] += e.x;
    load[e.v] += e.x;
  }
  return load;
}

inline ValidationReport validate_instance(const GraphInstance& g, double tol = kFeasibilityTol) {
  g.check_structure();
  ValidationReport r;
  r.per_vertex_load = vertex_loads(g);
  for (int v = 0; v < g.vertex_count; ++v)
    if (r.per_vertex_load[v] > 1.0 + tol) r.violations.emplace_back(v, r.per_vertex_load[v]);
  r.feasible = r.violations.empty();
  return r;
}

inline std::vector<double> one_regular_slack(const GraphInstance& g, double tol = kFeasibilityTol) {
  ValidationReport r = validate_instance(g, tol);
  if (!r.feasible)
    throw InfeasibleError("vertex " + std::to_string(r.violations.front().first) + " has load " +
                          std::to_string(r.violations.front().second));
  std::vector<double> slack(g.vertex_count);
  for (int v = 0; v < g.vertex_count; ++v) slack[v] = std::clamp(1.0 - r.per_vertex_load[v], 0.0, 1.0);
  return slack;
}

inline bool is_one_regular(const GraphInstance& g, double tol = kFeasibilityTol) {
  for (double l : vertex_loads(g))
    if (std::abs(l - 1.0) > tol) return false;
  return true;
}

inline std::optional<std::vector<int>> bipartition_of(const GraphInstance& g) {
  std::vector<std::vector<int>> adj(g.vertex_count);
  for (const Edge& e : g.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<int> color(g.vertex_count, -1);
  for (int s = 0; s < g.vertex_count; ++s) {
    if (color[s] != -1) continue;
    color[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int a = q.front();
      q.pop();
      for (int b : adj[a]) {
        if (color[b] == -1) {
          color[b] = 1 - color[a];
          q.push(b);
        } else if (color[b] == color[a]) {
          return std::nullopt;
        }
      }
    }
  }
  return color;
}

struct OddCycles {
  bool has_3_cycle = false;
  bool has_5_cycle = false;
};

inline OddCycles short_odd_cycles(const GraphInstance& g) {
  OddCycles out;
  if (bipartition_of(g)) return out;
  const int n = g.vertex_count;
  std::vector<std::vector<int>> adj(n);
  std::set<std::pair<int, int>> has;
  for (const Edge& e : g.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
    has.insert(std::minmax(e.u, e.v));
  }
  auto linked = [&](int a, int b) { return has.count(std::minmax(a, b)) > 0; };
  for (int a = 0; a < n && !out.has_3_cycle; ++a)
    for (int b : adj[a])
      if (b > a)
        for (int c : adj[b])
          if (c > b && linked(a, c)) {
            out.has_3_cycle = true;
            break;
          }
  // A 5-cycle s-a-b-c-d-s with s the smallest vertex on it.
  auto five_from = [&](int s) {
    for (int a : adj[s]) {
      if (a <= s) continue;
      for (int b : adj[a]) {
        if (b <= s || b == a) continue;
        for (int c : adj[b]) {
          if (c <= s || c == a || c == b) continue;
          for (int d : adj[c])
            if (d > s && d != a && d != b && d != c && linked(d, s)) return true;
        }
      }
    }
    return false;
  };
  for (int s = 0; s < n && !out.has_5_cycle; ++s) out.has_5_cycle = five_from(s);
  return out;
}

inline bool is_matching(const GraphInstance& g, const std::vector<int>& selected) {
  std::vector<char> used(g.vertex_count, 0);
  for (int i : selected) {
    const Edge& e = g.edges[i];
    if (used[e.u] || used[e.v]) return false;
    used[e.u] = used[e.v] = 1;
  }
  return true;
}

}  // namespace crs
