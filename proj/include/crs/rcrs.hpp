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
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "crs/attenuation.hpp"
#include "crs/graph.hpp"
#include "crs/rng.hpp"
#include "crs/stats.hpp"

namespace crs {

struct RelevantEdge {
  int edge = -1;
  bool simple_blocked = false;
};

struct RcrsRunRecord {
  std::vector<double> arrival_times;
  MatchingResult matching;
  // Filled only when diagnostics are requested; empty lists for non-survivors.
  std::vector<int> relevant_count;
  std::vector<std::vector<RelevantEdge>> relevant;
};

// Thrown when a diagnosed run contradicts a structural guarantee of the scheme.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Random-order greedy with attenuation. Per edge, in index order, draws
// Y ~ U[0,1), X ~ Ber(x), A ~ Ber(a(x)); survivors are processed by
// increasing (Y, index).
class RcrsRunner {
 public:
  RcrsRunner(const GraphInstance& g, const Attenuation& fn) : g_(g), inc_(g.incidence()) {
    g.check_structure();
    atten_.resize(g.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) atten_[i] = fn(g.edges[i].x);
    y_.resize(g.edges.size());
    surv_.resize(g.edges.size());
    used_.resize(g.vertex_count);
  }

  const GraphInstance& instance() const { return g_; }

  // Selected edge indices in arrival order.
  const std::vector<int>& run(Rng& rng) {
    draw(rng);
    greedy();
    return selected_;
  }

  RcrsRunRecord run_record(Rng& rng, bool diagnostics) {
    draw(rng);
    greedy();
    RcrsRunRecord rec;
    rec.arrival_times = y_;
    rec.matching.selected = selected_;
    rec.matching.active_states = active_;
    rec.matching.survival_states = surv_;
    if (!is_matching(g_, selected_)) throw InvariantViolation("RCRS output is not a matching");
    for (int e : selected_)
      if (!surv_[e]) throw InvariantViolation("RCRS selected a non-surviving edge");
    if (diagnostics) diagnose(rec);
    return rec;
  }

 private:
  void draw(Rng& rng) {
    const std::size_t m = g_.edges.size();
    active_.assign(m, 0);
    survivors_.clear();
    for (std::size_t i = 0; i < m; ++i) {
      y_[i] = uniform01(rng);
      const bool x = bernoulli(rng, g_.edges[i].x);
      const bool a = bernoulli(rng, atten_[i]);
      active_[i] = x;
      surv_[i] = x && a;
      if (surv_[i]) survivors_.push_back(static_cast<int>(i));
    }
    std::sort(survivors_.begin(), survivors_.end(), [&](int a, int b) {
      return y_[a] < y_[b] || (y_[a] == y_[b] && a < b);
    });
  }

  void greedy() {
    selected_.clear();
    for (int e : survivors_) {
      used_[g_.edges[e].u] = 0;
      used_[g_.edges[e].v] = 0;
    }
    for (int e : survivors_) {
      const Edge& ed = g_.edges[e];
      if (!used_[ed.u] && !used_[ed.v]) {
        used_[ed.u] = used_[ed.v] = 1;
        selected_.push_back(e);
      }
    }
  }

  bool before(int a, int b) const { return y_[a] < y_[b] || (y_[a] == y_[b] && a < b); }
  bool relevant_for(int f, int target) const { return surv_[f] && before(f, target); }

  // sbl_f for f relevant to e = (u, v); returns the number of simple-blockers.
  int simple_blockers(int e, int f) const {
    const int u = g_.edges[e].u, v = g_.edges[e].v;
    const Edge& fe = g_.edges[f];
    const int w = (fe.u == u || fe.u == v) ? fe.v : fe.u;
    auto touches_e = [&](int idx) {
      const Edge& d = g_.edges[idx];
      return d.u == u || d.u == v || d.v == u || d.v == v;
    };
    int count = 0;
    for (int h : inc_[w]) {
      if (h == f || touches_e(h)) continue;
      if (!relevant_for(h, f)) continue;
      bool clean = true;
      for (int end : {g_.edges[h].u, g_.edges[h].v}) {
        for (int h2 : inc_[end]) {
          if (h2 == h || touches_e(h2)) continue;
          if (relevant_for(h2, h)) {
            clean = false;
            break;
          }
        }
        if (!clean) break;
      }
      count += clean;
    }
    return count;
  }

  void diagnose(RcrsRunRecord& rec) const {
    const std::size_t m = g_.edges.size();
    rec.relevant_count.assign(m, 0);
    rec.relevant.assign(m, {});
    std::vector<char> in_m(m, 0);
    for (int e : selected_) in_m[e] = 1;
    for (int e : survivors_) {
      const Edge& ed = g_.edges[e];
      bool all_blocked = true;
      for (int end : {ed.u, ed.v}) {
        for (int f : inc_[end]) {
          if (f == e || !relevant_for(f, e)) continue;
          const int n_sbl = simple_blockers(e, f);
          if (n_sbl > 1)
            throw InvariantViolation("edge " + std::to_string(f) + " has " + std::to_string(n_sbl) +
                                     " simple-blockers");
          rec.relevant[e].push_back({f, n_sbl == 1});
          all_blocked = all_blocked && n_sbl == 1;
        }
      }
      rec.relevant_count[e] = static_cast<int>(rec.relevant[e].size());
      if (rec.relevant_count[e] <= 1 && all_blocked && !in_m[e])
        throw InvariantViolation("surviving edge " + std::to_string(e) +
                                 " with at most one simple-blocked relevant edge was not matched");
    }
  }

  const GraphInstance& g_;
  std::vector<std::vector<int>> inc_;
  std::vector<double> atten_;
  std::vector<double> y_;
  std::vector<std::uint8_t> active_;
  std::vector<std::uint8_t> surv_;
  std::vector<int> survivors_;
  std::vector<int> selected_;
  std::vector<char> used_;
};

inline RcrsRunRecord run_rcrs(const GraphInstance& g, const Attenuation& fn, Rng& rng, bool diagnostics = false) {
  RcrsRunner runner(g, fn);
  return runner.run_record(rng, diagnostics);
}

struct ProportionEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// P[R_e empty | e survives]. The survival of e is imposed directly: R_e only
// involves bits and arrival times of other edges, which are independent of S_e.
inline ProportionEstimate estimate_no_relevant_prob(const GraphInstance& g, const Attenuation& fn, int edge,
                                                    std::uint64_t trials, std::uint64_t seed, double z = 1.96) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (edge < 0 || edge >= g.edge_count()) throw std::out_of_range("edge index out of range");
  g.check_structure();
  const Edge& e = g.edges[edge];
  std::vector<int> nbrs;
  std::vector<double> surv_p;
  for (int i = 0; i < g.edge_count(); ++i) {
    if (i == edge) continue;
    const Edge& f = g.edges[i];
    if (f.u == e.u || f.u == e.v || f.v == e.u || f.v == e.v) {
      nbrs.push_back(i);
      surv_p.push_back(fn.survival(f.x));
    }
  }
  ProportionEstimate out;
  out.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng = trial_stream(seed, t);
    const double ye = uniform01(rng);
    bool empty = true;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const double yf = uniform01(rng);
      const bool s = bernoulli(rng, surv_p[k]);
      if (s && (yf < ye || (yf == ye && nbrs[k] < edge))) empty = false;
    }
    out.successes += empty;
  }
  out.value = static_cast<double>(out.successes) / static_cast<double>(trials);
  std::tie(out.ci_lo, out.ci_hi) = wilson_interval(out.successes, trials, z);
  return out;
}

}  // namespace crs
