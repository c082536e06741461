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
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "crs/graph.hpp"
#include "crs/rng.hpp"
#include "crs/stats.hpp"

namespace crs {

enum class OcrsMode { exact, monte_carlo };

struct OcrsPlan {
  double c = 0.0;
  std::vector<int> order;
  std::vector<double> alphas;
  std::vector<double> blockfree_probs;
  std::vector<std::uint8_t> valid;
  OcrsMode mode = OcrsMode::exact;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  // Half-width of the block-free estimate; empty in exact mode.
  std::vector<double> ci_halfwidth;

  bool all_valid() const {
    return std::all_of(valid.begin(), valid.end(), [](std::uint8_t b) { return b != 0; });
  }
};

inline constexpr int kDefaultVertexLimit = 22;

// Probability of each matched-vertex set, indexed by bitmask.
struct SubsetDistribution {
  int vertex_count = 0;
  std::vector<double> mass;

  explicit SubsetDistribution(int n = 0) : vertex_count(n), mass(std::size_t{1} << n, 0.0) { mass[0] = 1.0; }

  double total() const {
    double s = 0.0;
    for (double p : mass) s += p;
    return s;
  }

  // P[neither u nor v matched].
  double free_pair(int u, int v) const {
    const std::size_t bu = std::size_t{1} << u, bv = std::size_t{1} << v;
    double s = 0.0;
    for (std::size_t m = 0; m < mass.size(); ++m)
      if (!(m & bu) && !(m & bv)) s += mass[m];
    return s;
  }

  // Edge (u,v) joins the matching with probability q on every unblocked state.
  void add_edge(int u, int v, double q) {
    if (q <= 0.0) return;
    const std::size_t bu = std::size_t{1} << u, bv = std::size_t{1} << v;
    for (std::size_t m = 0; m < mass.size(); ++m) {
      if ((m & bu) || (m & bv) || mass[m] == 0.0) continue;
      const double moved = mass[m] * q;
      mass[m | bu | bv] += moved;
      mass[m] -= moved;
    }
  }
};

namespace detail {
inline void check_order(const GraphInstance& g, const std::vector<int>& order) {
  if (order.size() != g.edges.size()) throw StructuralError("arrival order length differs from edge count");
  std::vector<char> hit(g.edges.size(), 0);
  for (int t : order) {
    if (t < 0 || t >= g.edge_count() || hit[t]) throw StructuralError("arrival order is not a permutation");
    hit[t] = 1;
  }
}

inline void check_exact_inputs(const GraphInstance& g, const std::vector<int>& order, int vertex_limit) {
  g.check_structure();
  check_order(g, order);
  if (g.vertex_count > vertex_limit || g.vertex_count > 30)
    throw std::invalid_argument("exact OCRS limited to " + std::to_string(std::min(vertex_limit, 30)) +
                                " vertices, instance has " + std::to_string(g.vertex_count));
}

inline void check_plan(const GraphInstance& g, const std::vector<int>& order, const OcrsPlan& plan) {
  if (plan.alphas.size() != g.edges.size() || plan.order != order)
    throw std::invalid_argument("OCRS plan does not match instance and order");
}
}  // namespace detail

inline OcrsPlan compute_alphas_exact(const GraphInstance& g, const std::vector<int>& order, double c,
                                     int vertex_limit = kDefaultVertexLimit) {
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in [0,1]");
  detail::check_exact_inputs(g, order, vertex_limit);
  if (!validate_instance(g).feasible) throw InfeasibleError("instance is outside the matching polytope");
  const std::size_t m = g.edges.size();
  OcrsPlan plan;
  plan.c = c;
  plan.order = order;
  plan.mode = OcrsMode::exact;
  plan.alphas.assign(m, 0.0);
  plan.blockfree_probs.assign(m, 0.0);
  plan.valid.assign(m, 1);
  SubsetDistribution dist(g.vertex_count);
  for (int e : order) {
    const Edge& ed = g.edges[e];
    const double free = dist.free_pair(ed.u, ed.v);
    plan.blockfree_probs[e] = free;
    double alpha = free > 0.0 ? c / free : (c > 0.0 ? INFINITY : 0.0);
    if (alpha > 1.0) {
      plan.valid[e] = 0;
      alpha = 1.0;
    }
    plan.alphas[e] = alpha;
    dist.add_edge(ed.u, ed.v, ed.x * alpha);
  }
  return plan;
}

// Distribution just before the arrival at position t of the order.
inline SubsetDistribution subset_distribution_before(const GraphInstance& g, const OcrsPlan& plan, std::size_t t) {
  if (t > plan.order.size()) throw std::out_of_range("arrival index out of range");
  SubsetDistribution dist(g.vertex_count);
  for (std::size_t i = 0; i < t; ++i) {
    const int e = plan.order[i];
    dist.add_edge(g.edges[e].u, g.edges[e].v, g.edges[e].x * plan.alphas[e]);
  }
  return dist;
}

inline std::vector<double> selection_probs_exact(const GraphInstance& g, const std::vector<int>& order,
                                                 const OcrsPlan& plan, int vertex_limit = kDefaultVertexLimit) {
  if (plan.mode != OcrsMode::exact) throw std::invalid_argument("selection_probs_exact needs an exact plan");
  detail::check_exact_inputs(g, order, vertex_limit);
  detail::check_plan(g, order, plan);
  std::vector<double> p(g.edges.size(), 0.0);
  SubsetDistribution dist(g.vertex_count);
  for (int e : order) {
    const Edge& ed = g.edges[e];
    p[e] = ed.x * plan.alphas[e] * dist.free_pair(ed.u, ed.v);
    dist.add_edge(ed.u, ed.v, ed.x * plan.alphas[e]);
  }
  return p;
}

struct JointMatched {
  double p_u = 0.0;
  double p_v = 0.0;
  double p_both = 0.0;
};

inline JointMatched joint_matched_probs(const GraphInstance& g, const std::vector<int>& order,
                                        const OcrsPlan& plan, int u, int v, std::size_t t,
                                        int vertex_limit = kDefaultVertexLimit) {
  if (plan.mode != OcrsMode::exact) throw std::invalid_argument("joint_matched_probs needs an exact plan");
  detail::check_exact_inputs(g, order, vertex_limit);
  detail::check_plan(g, order, plan);
  if (u < 0 || v < 0 || u >= g.vertex_count || v >= g.vertex_count) throw std::out_of_range("bad vertex");
  SubsetDistribution dist = subset_distribution_before(g, plan, t);
  const std::size_t bu = std::size_t{1} << u, bv = std::size_t{1} << v;
  JointMatched j;
  for (std::size_t m = 0; m < dist.mass.size(); ++m) {
    const bool mu = m & bu, mv = m & bv;
    if (mu) j.p_u += dist.mass[m];
    if (mv) j.p_v += dist.mass[m];
    if (mu && mv) j.p_both += dist.mass[m];
  }
  return j;
}

// Supremum of c in [lo, hi] at which no alpha needs clamping, by bisection.
inline double max_valid_c(const GraphInstance& g, const std::vector<int>& order, double lo = 0.0, double hi = 1.0,
                          double tol = 1e-9, int vertex_limit = kDefaultVertexLimit) {
  auto ok = [&](double c) { return compute_alphas_exact(g, order, c, vertex_limit).all_valid(); };
  if (ok(hi)) return hi;
  if (!ok(lo)) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

inline std::vector<std::uint8_t> sample_active(const GraphInstance& g, Rng& rng) {
  std::vector<std::uint8_t> x(g.edges.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = bernoulli(rng, g.edges[i].x);
  return x;
}

// Greedy pass in the plan's order; attenuation bits are drawn for every edge
// in arrival order so a run is a pure function of (states, rng state).
inline MatchingResult run_ocrs(const GraphInstance& g, const std::vector<int>& order, const OcrsPlan& plan,
                               const std::vector<std::uint8_t>& states, Rng& rng) {
  detail::check_plan(g, order, plan);
  if (states.size() != g.edges.size()) throw std::invalid_argument("state vector size differs from edge count");
  MatchingResult r;
  r.active_states = states;
  r.survival_states.assign(g.edges.size(), 0);
  std::vector<char> used(g.vertex_count, 0);
  for (int e : order) {
    const bool a = bernoulli(rng, plan.alphas[e]);
    const bool s = a && states[e];
    r.survival_states[e] = s;
    const Edge& ed = g.edges[e];
    if (s && !used[ed.u] && !used[ed.v]) {
      used[ed.u] = used[ed.v] = 1;
      r.selected.push_back(e);
    }
  }
  return r;
}

// Forward induction: alpha for the t-th arrival uses the estimates already
// fixed for arrivals 0..t-1.
inline OcrsPlan compute_alphas_mc(const GraphInstance& g, const std::vector<int>& order, double c,
                                  std::uint64_t samples, std::uint64_t seed, double floor = 1e-6, double z = 1.96) {
  if (samples == 0) throw std::invalid_argument("samples must be positive");
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in [0,1]");
  g.check_structure();
  detail::check_order(g, order);
  if (!validate_instance(g).feasible) throw InfeasibleError("instance is outside the matching polytope");
  const std::size_t m = g.edges.size();
  OcrsPlan plan;
  plan.c = c;
  plan.order = order;
  plan.mode = OcrsMode::monte_carlo;
  plan.samples = samples;
  plan.seed = seed;
  plan.alphas.assign(m, 0.0);
  plan.blockfree_probs.assign(m, 0.0);
  plan.valid.assign(m, 1);
  plan.ci_halfwidth.assign(m, 0.0);
  std::vector<char> touched(g.vertex_count, 0);
  std::vector<char> used(g.vertex_count);
  for (std::size_t t = 0; t < m; ++t) {
    const int e = order[t];
    const Edge& ed = g.edges[e];
    double est = 1.0;
    double hw = 0.0;
    if (touched[ed.u] || touched[ed.v]) {
      std::uint64_t free = 0;
      for (std::uint64_t s = 0; s < samples; ++s) {
        Rng rng = trial_stream(seed, s, t + 1);
        std::fill(used.begin(), used.end(), 0);
        for (std::size_t i = 0; i < t; ++i) {
          const Edge& f = g.edges[order[i]];
          const bool surv = bernoulli(rng, f.x) && bernoulli(rng, plan.alphas[order[i]]);
          if (surv && !used[f.u] && !used[f.v]) used[f.u] = used[f.v] = 1;
        }
        free += (!used[ed.u] && !used[ed.v]);
      }
      est = static_cast<double>(free) / samples;
      const auto [lo, hi] = wilson_interval(free, samples, z);
      hw = 0.5 * (hi - lo);
    }
    plan.blockfree_probs[e] = est;
    plan.ci_halfwidth[e] = hw;
    double alpha = c / std::max(est, floor);
    if (alpha > 1.0) alpha = 1.0;
    if (est < c - 3.0 * hw) plan.valid[e] = 0;
    plan.alphas[e] = alpha;
    touched[ed.u] = touched[ed.v] = 1;
  }
  return plan;
}

struct BoundCheck {
  std::string property;
  int worst_edge = -1;
  double worst_violation = 0.0;
  bool pass = true;
};

// Two-sided survival bound and the lone-vertex lower bound on every edge,
// from an exact, all-valid plan. Survival bits are independent across edges,
// so the lone-vertex probability is a product.
inline std::vector<BoundCheck> verify_survival_alone_bounds(const GraphInstance& g, const std::vector<int>& order,
                                                            double c, double tol = 1e-12) {
  OcrsPlan plan = compute_alphas_exact(g, order, c);
  if (!plan.all_valid()) throw std::invalid_argument("plan has clamped alphas; bounds need every alpha valid");
  BoundCheck surv{"survival", -1, 0.0, true};
  BoundCheck alone{"alone", -1, 0.0, true};
  std::vector<double> prior(g.vertex_count, 0.0);
  std::vector<double> lone(g.vertex_count, 1.0);
  auto note = [&](BoundCheck& b, int e, double violation) {
    if (violation > b.worst_violation) {
      b.worst_violation = violation;
      b.worst_edge = e;
    }
  };
  for (int e : order) {
    const Edge& ed = g.edges[e];
    const double xu = prior[ed.u], xv = prior[ed.v];
    const double s = ed.x * plan.alphas[e];
    const double lower = c * ed.x / (1.0 - c * std::max(xu, xv));
    const double upper = c * ed.x / (1.0 - c * xu - c * xv);
    note(surv, e, std::max(lower - s, s - upper));
    for (int w : {ed.u, ed.v}) {
      const double bound = (1.0 - c - c * prior[w]) / (1.0 - c);
      note(alone, e, bound - lone[w]);
    }
    prior[ed.u] += ed.x;
    prior[ed.v] += ed.x;
    lone[ed.u] *= 1.0 - s;
    lone[ed.v] *= 1.0 - s;
  }
  surv.pass = surv.worst_violation <= tol;
  alone.pass = alone.worst_violation <= tol;
  return {surv, alone};
}

}  // namespace crs
