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
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "crs/graph.hpp"
#include "crs/ocrs.hpp"
#include "crs/parallel.hpp"
#include "crs/rcrs.hpp"
#include "crs/stats.hpp"

namespace crs {

struct OcrsScheme {
  OcrsPlan plan;
};
struct RcrsScheme {
  Attenuation fn;
};
using Scheme = std::variant<OcrsScheme, RcrsScheme>;

struct EdgeEstimate {
  int edge = -1;
  double x = 0.0;
  std::uint64_t selected = 0;
  double ratio = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct ClassEstimate {
  std::vector<int> members;
  double x = 0.0;
  std::uint64_t selected = 0;
  double ratio = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct EstimateReport {
  std::string scheme;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double z = 1.96;
  std::vector<EdgeEstimate> edges;
  std::vector<ClassEstimate> classes;
  // Minimum over classes when pooled, else over edges with x > 0; its
  // interval uses a Bonferroni-adjusted z across the compared units.
  double min_ratio = std::numeric_limits<double>::quiet_NaN();
  double min_ratio_ci_lo = 0.0;
  double min_ratio_ci_hi = 0.0;
  int min_unit = -1;
};

struct EstimateOptions {
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  bool pool = false;
  double z = 1.96;
  unsigned workers = 1;
  // Unpooled minimum restricted to these edges when non-empty.
  std::vector<int> min_over_edges;
};

namespace detail {

struct SelectionCounts {
  std::vector<std::uint64_t> per_edge;
  std::vector<std::uint64_t> per_class;
  std::vector<std::uint64_t> per_class_sq;

  void merge(const SelectionCounts& o) {
    for (std::size_t i = 0; i < per_edge.size(); ++i) per_edge[i] += o.per_edge[i];
    for (std::size_t i = 0; i < per_class.size(); ++i) {
      per_class[i] += o.per_class[i];
      per_class_sq[i] += o.per_class_sq[i];
    }
  }
};

// Interval for a class mean from per-trial class counts (the members of a
// class are dependent within a trial, so they are not pooled as a binomial).
inline std::pair<double, double> class_interval(std::uint64_t sum, std::uint64_t sum_sq, std::uint64_t trials,
                                                double size, double x, double z) {
  const double n = static_cast<double>(trials);
  const double mean = static_cast<double>(sum) / n;
  const double var = std::max(0.0, static_cast<double>(sum_sq) / n - mean * mean) * n / std::max(1.0, n - 1.0);
  const double half = z * std::sqrt(var / n) / (size * x);
  const double r = mean / (size * x);
  return {r - half, r + half};
}

}  // namespace detail

inline EstimateReport estimate_selectability(const GraphInstance& g, const Scheme& scheme,
                                             const EstimateOptions& opt) {
  if (opt.trials == 0) throw std::invalid_argument("trials must be positive");
  g.check_structure();
  const std::size_t m = g.edges.size();

  std::vector<std::vector<int>> classes;
  std::vector<int> class_of(m, -1);
  if (opt.pool) {
    if (!g.symmetry) throw std::invalid_argument("pooling requires declared symmetry classes");
    classes = *g.symmetry;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (int e : classes[c]) {
        if (g.edges[e].x != g.edges[classes[c].front()].x)
          throw std::invalid_argument("symmetry class mixes different x values");
        class_of[e] = static_cast<int>(c);
      }
    }
  }

  detail::SelectionCounts zero{std::vector<std::uint64_t>(m, 0), std::vector<std::uint64_t>(classes.size(), 0),
                               std::vector<std::uint64_t>(classes.size(), 0)};
  std::string name;
  auto tally = [&](const std::vector<int>& selected, detail::SelectionCounts& acc, std::vector<std::uint64_t>& tmp) {
    for (int e : selected) ++acc.per_edge[e];
    if (classes.empty()) return;
    std::fill(tmp.begin(), tmp.end(), 0);
    for (int e : selected)
      if (class_of[e] >= 0) ++tmp[class_of[e]];
    for (std::size_t c = 0; c < tmp.size(); ++c) {
      acc.per_class[c] += tmp[c];
      acc.per_class_sq[c] += tmp[c] * tmp[c];
    }
  };

  detail::SelectionCounts counts;
  if (const auto* o = std::get_if<OcrsScheme>(&scheme)) {
    const std::vector<int> order = o->plan.order;
    detail::check_plan(g, order, o->plan);
    name = "ocrs(c=" + std::to_string(o->plan.c) + ")";
    // Each worker owns its scratch through the accumulator copy.
    struct Acc : detail::SelectionCounts {
      std::vector<std::uint64_t> tmp;
      void merge(const Acc& other) { detail::SelectionCounts::merge(other); }
    };
    Acc init{zero, std::vector<std::uint64_t>(classes.size(), 0)};
    Acc acc = run_trials(opt.trials, opt.workers, init, [&](std::uint64_t t, Acc& a) {
      Rng rng = trial_stream(opt.seed, t);
      auto states = sample_active(g, rng);
      MatchingResult r = run_ocrs(g, order, o->plan, states, rng);
      if (!is_matching(g, r.selected)) throw InvariantViolation("OCRS output is not a matching");
      for (int e : r.selected)
        if (!states[e]) throw InvariantViolation("OCRS selected an inactive edge");
      tally(r.selected, a, a.tmp);
    });
    counts = acc;
  } else {
    const auto& fn = std::get<RcrsScheme>(scheme).fn;
    name = "rcrs(" + fn.name() + ")";
    struct Acc : detail::SelectionCounts {
      std::vector<std::uint64_t> tmp;
      std::shared_ptr<RcrsRunner> runner;
      void merge(const Acc& other) { detail::SelectionCounts::merge(other); }
    };
    Acc init{zero, std::vector<std::uint64_t>(classes.size(), 0), nullptr};
    Acc acc = run_trials(opt.trials, opt.workers, init, [&](std::uint64_t t, Acc& a) {
      if (!a.runner) a.runner = std::make_shared<RcrsRunner>(g, fn);
      Rng rng = trial_stream(opt.seed, t);
      tally(a.runner->run(rng), a, a.tmp);
    });
    counts = acc;
  }

  EstimateReport rep;
  rep.scheme = name;
  rep.trials = opt.trials;
  rep.seed = opt.seed;
  rep.z = opt.z;
  const double n = static_cast<double>(opt.trials);
  for (std::size_t e = 0; e < m; ++e) {
    EdgeEstimate est;
    est.edge = static_cast<int>(e);
    est.x = g.edges[e].x;
    est.selected = counts.per_edge[e];
    if (est.x > 0.0) {
      est.ratio = static_cast<double>(est.selected) / (n * est.x);
      auto [lo, hi] = wilson_interval(est.selected, opt.trials, opt.z);
      est.ci_lo = lo / est.x;
      est.ci_hi = hi / est.x;
    } else {
      est.ratio = est.ci_lo = est.ci_hi = std::numeric_limits<double>::quiet_NaN();
    }
    rep.edges.push_back(est);
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    ClassEstimate ce;
    ce.members = classes[c];
    ce.x = g.edges[classes[c].front()].x;
    ce.selected = counts.per_class[c];
    const double size = static_cast<double>(classes[c].size());
    if (ce.x > 0.0) {
      ce.ratio = static_cast<double>(ce.selected) / (n * size * ce.x);
      std::tie(ce.ci_lo, ce.ci_hi) =
          detail::class_interval(counts.per_class[c], counts.per_class_sq[c], opt.trials, size, ce.x, opt.z);
    } else {
      ce.ratio = ce.ci_lo = ce.ci_hi = std::numeric_limits<double>::quiet_NaN();
    }
    rep.classes.push_back(ce);
  }

  // Minimum and its simultaneous interval.
  std::vector<int> units;
  if (opt.pool) {
    for (std::size_t c = 0; c < rep.classes.size(); ++c)
      if (rep.classes[c].x > 0.0) units.push_back(static_cast<int>(c));
  } else if (!opt.min_over_edges.empty()) {
    for (int e : opt.min_over_edges) {
      if (e < 0 || static_cast<std::size_t>(e) >= m) throw std::out_of_range("min_over_edges index out of range");
      if (rep.edges[e].x > 0.0) units.push_back(e);
    }
  } else {
    for (std::size_t e = 0; e < m; ++e)
      if (rep.edges[e].x > 0.0) units.push_back(static_cast<int>(e));
  }
  if (!units.empty()) {
    const double zb = bonferroni_z(opt.z, units.size());
    for (int u : units) {
      const double r = opt.pool ? rep.classes[u].ratio : rep.edges[u].ratio;
      if (rep.min_unit < 0 || r < rep.min_ratio) {
        rep.min_ratio = r;
        rep.min_unit = u;
      }
    }
    if (opt.pool) {
      const std::size_t c = static_cast<std::size_t>(rep.min_unit);
      std::tie(rep.min_ratio_ci_lo, rep.min_ratio_ci_hi) =
          detail::class_interval(counts.per_class[c], counts.per_class_sq[c], opt.trials,
                                 static_cast<double>(classes[c].size()), rep.classes[c].x, zb);
    } else {
      const auto& est = rep.edges[rep.min_unit];
      auto [lo, hi] = wilson_interval(est.selected, opt.trials, zb);
      rep.min_ratio_ci_lo = lo / est.x;
      rep.min_ratio_ci_hi = hi / est.x;
    }
  }
  return rep;
}

// Re-indexes a report on a reduced instance by the original edges.
// edge_map[i] is the reduced index of original edge i. The minimum is kept
// as computed; pass the image of edge_map as min_over_edges when unpooled.
inline EstimateReport project_to_original(const EstimateReport& rep, const std::vector<int>& edge_map) {
  EstimateReport out = rep;
  out.edges.clear();
  std::vector<int> back(rep.edges.size(), -1);
  for (std::size_t i = 0; i < edge_map.size(); ++i) {
    const int r = edge_map[i];
    if (r < 0 || static_cast<std::size_t>(r) >= rep.edges.size()) throw std::out_of_range("edge map out of range");
    back[r] = static_cast<int>(i);
    EdgeEstimate e = rep.edges[r];
    e.edge = static_cast<int>(i);
    out.edges.push_back(e);
  }
  for (auto& cls : out.classes)
    for (int& e : cls.members) {
      if (back[e] < 0) throw std::invalid_argument("symmetry class contains an edge added by the reduction");
      e = back[e];
    }
  if (rep.classes.empty() && rep.min_unit >= 0) {
    if (back[rep.min_unit] < 0) throw std::invalid_argument("minimum lies on an edge added by the reduction");
    out.min_unit = back[rep.min_unit];
  }
  return out;
}

}  // namespace crs
