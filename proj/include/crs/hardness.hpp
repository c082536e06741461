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
#include <numeric>
#include <tuple>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crs/parallel.hpp"
#include "crs/rng.hpp"

namespace crs {

// w' = (1 - w)^2, w(0) = 0.
inline double ode_solution(double z) {
  if (z < 0.0) throw std::domain_error("ode_solution needs z >= 0");
  return z / (1.0 + z);
}

// Maximum matching in a bipartite graph given as left-to-right adjacency.
inline int hopcroft_karp(int n_left, int n_right, const std::vector<std::vector<int>>& adj) {
  if (static_cast<int>(adj.size()) != n_left) throw std::invalid_argument("adjacency size differs from n_left");
  const int inf = std::numeric_limits<int>::max();
  std::vector<int> match_l(n_left, -1), match_r(n_right, -1), dist(n_left);
  std::vector<int> queue(n_left);
  auto bfs = [&] {
    int head = 0, tail = 0;
    bool found = false;
    for (int u = 0; u < n_left; ++u) {
      if (match_l[u] < 0) {
        dist[u] = 0;
        queue[tail++] = u;
      } else {
        dist[u] = inf;
      }
    }
    while (head < tail) {
      const int u = queue[head++];
      for (int v : adj[u]) {
        if (v < 0 || v >= n_right) throw std::out_of_range("right vertex out of range");
        const int w = match_r[v];
        if (w < 0) {
          found = true;
        } else if (dist[w] == inf) {
          dist[w] = dist[u] + 1;
          queue[tail++] = w;
        }
      }
    }
    return found;
  };
  std::vector<std::size_t> it(n_left);
  // Iterative DFS along the BFS layers.
  auto dfs = [&](int root) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int u = stack.back();
      if (it[u] == adj[u].size()) {
        dist[u] = inf;
        stack.pop_back();
        if (!stack.empty()) ++it[stack.back()];
        continue;
      }
      const int w = match_r[adj[u][it[u]]];
      if (w < 0) {
        for (int a : stack) {
          const int b = adj[a][it[a]];
          match_l[a] = b;
          match_r[b] = a;
        }
        return true;
      }
      if (dist[w] == dist[u] + 1) {
        stack.push_back(w);
      } else {
        ++it[u];
      }
    }
    return false;
  };
  int size = 0;
  while (bfs()) {
    std::fill(it.begin(), it.end(), 0);
    for (int u = 0; u < n_left; ++u)
      if (match_l[u] < 0 && dfs(u)) ++size;
  }
  return size;
}

struct Trajectory {
  int n = 0;
  std::vector<std::uint64_t> t;
  // samples[trial][checkpoint] = |M_t| / n.
  std::vector<std::vector<double>> samples;
  std::vector<double> mean, lo, hi;

  double final_mean() const { return mean.empty() ? 0.0 : mean.back(); }

  // max_c |mean_c - w(t_c / n^2)|.
  double sup_deviation() const {
    double worst = 0.0;
    const double n2 = static_cast<double>(n) * n;
    for (std::size_t c = 0; c < t.size(); ++c)
      worst = std::max(worst, std::abs(mean[c] - ode_solution(static_cast<double>(t[c]) / n2)));
    return worst;
  }
};

// One realisation of K_{n,n} in uniformly random order with each edge active
// with probability 1/n: active edges as (left, right, arrival position).
struct ActiveArrival {
  int left;
  int right;
  std::uint64_t position;
};

inline std::vector<ActiveArrival> realize_complete_bipartite(int n, Rng& rng) {
  const std::uint64_t m = static_cast<std::uint64_t>(n) * n;
  std::vector<std::uint32_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::uint64_t i = m; i > 1; --i) {
    std::uniform_int_distribution<std::uint64_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  const double p = 1.0 / n;
  std::vector<ActiveArrival> out;
  for (std::uint64_t pos = 0; pos < m; ++pos) {
    if (bernoulli(rng, p)) {
      const std::uint32_t e = perm[pos];
      out.push_back({static_cast<int>(e / n), static_cast<int>(e % n), pos + 1});
    }
  }
  return out;
}

namespace detail {
inline std::vector<std::uint64_t> checkpoint_times(int n, int checkpoints) {
  if (checkpoints < 1) throw std::invalid_argument("checkpoints must be positive");
  const std::uint64_t m = static_cast<std::uint64_t>(n) * n;
  std::vector<std::uint64_t> t(checkpoints);
  for (int c = 0; c < checkpoints; ++c) t[c] = (m * static_cast<std::uint64_t>(c + 1)) / checkpoints;
  return t;
}

// Greedy sizes at the checkpoints; asserts maximality in the arrived-active graph.
inline std::vector<int> greedy_sizes(int n, const std::vector<ActiveArrival>& arrivals,
                                     const std::vector<std::uint64_t>& t) {
  std::vector<char> used_l(n, 0), used_r(n, 0);
  std::vector<int> sizes(t.size(), 0);
  int size = 0;
  std::size_t c = 0;
  for (const auto& a : arrivals) {
    while (c < t.size() && t[c] < a.position) sizes[c++] = size;
    if (!used_l[a.left] && !used_r[a.right]) {
      used_l[a.left] = used_r[a.right] = 1;
      ++size;
    }
  }
  while (c < t.size()) sizes[c++] = size;
  for (const auto& a : arrivals)
    if (!used_l[a.left] && !used_r[a.right]) throw std::logic_error("greedy matching is not maximal");
  return sizes;
}

inline int offline_size(int n, const std::vector<ActiveArrival>& arrivals) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& a : arrivals) adj[a.left].push_back(a.right);
  return hopcroft_karp(n, n, adj);
}
}  // namespace detail

inline Trajectory simulate_greedy(int n, std::uint64_t trials, int checkpoints, std::uint64_t seed,
                                  unsigned workers = 1) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  Trajectory tr;
  tr.n = n;
  tr.t = detail::checkpoint_times(n, checkpoints);
  struct Acc {
    std::vector<std::pair<std::uint64_t, std::vector<int>>> rows;
    void merge(const Acc& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
  };
  Acc acc = run_trials(trials, workers, Acc{}, [&](std::uint64_t trial, Acc& a) {
    Rng rng = trial_stream(seed, trial);
    a.rows.push_back({trial, detail::greedy_sizes(n, realize_complete_bipartite(n, rng), tr.t)});
  });
  std::sort(acc.rows.begin(), acc.rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t cps = tr.t.size();
  tr.mean.assign(cps, 0.0);
  tr.lo.assign(cps, std::numeric_limits<double>::infinity());
  tr.hi.assign(cps, -std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> totals(cps, 0);
  for (const auto& [trial, sizes] : acc.rows) {
    std::vector<double> row(cps);
    for (std::size_t c = 0; c < cps; ++c) {
      if (c > 0 && sizes[c] < sizes[c - 1]) throw std::logic_error("matching size decreased");
      if (sizes[c] > n) throw std::logic_error("matching larger than n");
      row[c] = static_cast<double>(sizes[c]) / n;
      totals[c] += sizes[c];
      tr.lo[c] = std::min(tr.lo[c], row[c]);
      tr.hi[c] = std::max(tr.hi[c], row[c]);
    }
    tr.samples.push_back(std::move(row));
  }
  for (std::size_t c = 0; c < cps; ++c)
    tr.mean[c] = static_cast<double>(totals[c]) / (static_cast<double>(trials) * n);
  return tr;
}

struct OfflineResult {
  int n = 0;
  std::uint64_t trials = 0;
  double mean_fraction = 0.0;
  double mean_greedy_fraction = 0.0;
  std::vector<int> offline_sizes;
  std::vector<int> greedy_sizes;
  // Trials where offline strictly beats greedy.
  std::uint64_t strict_wins = 0;
};

// Same realisations as simulate_greedy under the same seed.
inline OfflineResult offline_fraction(int n, std::uint64_t trials, std::uint64_t seed, unsigned workers = 1) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  const std::vector<std::uint64_t> final_t{static_cast<std::uint64_t>(n) * n};
  struct Acc {
    std::vector<std::tuple<std::uint64_t, int, int>> rows;
    void merge(const Acc& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
  };
  Acc acc = run_trials(trials, workers, Acc{}, [&](std::uint64_t trial, Acc& a) {
    Rng rng = trial_stream(seed, trial);
    const auto arrivals = realize_complete_bipartite(n, rng);
    const int off = detail::offline_size(n, arrivals);
    const int greedy = detail::greedy_sizes(n, arrivals, final_t).back();
    if (off < greedy) throw std::logic_error("offline matching smaller than greedy");
    a.rows.emplace_back(trial, off, greedy);
  });
  std::sort(acc.rows.begin(), acc.rows.end());
  OfflineResult r;
  r.n = n;
  r.trials = trials;
  std::int64_t off_total = 0, greedy_total = 0;
  for (const auto& [trial, off, greedy] : acc.rows) {
    r.offline_sizes.push_back(off);
    r.greedy_sizes.push_back(greedy);
    off_total += off;
    greedy_total += greedy;
    r.strict_wins += off > greedy;
  }
  r.mean_fraction = static_cast<double>(off_total) / (static_cast<double>(trials) * n);
  r.mean_greedy_fraction = static_cast<double>(greedy_total) / (static_cast<double>(trials) * n);
  return r;
}

}  // namespace crs
