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
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "crs/rng.hpp"

namespace crs {

struct NelderMeadOptions {
  std::size_t max_evals = 40000;
  double initial_step = 1.0;
  double ftol = 1e-15;
  double xtol = 1e-10;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
};

// Nelder-Mead with dimension-adaptive coefficients (Gao and Han, 2012).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead needs at least one variable");
  const double dn = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 1.0 / (2.0 * dn), delta = 1.0 - 1.0 / dn;
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++evals;
    const double v = f(p);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);
  std::vector<std::size_t> idx(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (evals < opt.max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];
    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(pts[i][d] - pts[best][d]));
    if (vals[worst] - vals[best] <= opt.ftol && size <= opt.xtol) break;
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / dn;
    for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + alpha * (centroid[d] - pts[worst][d]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + beta * (xr[d] - centroid[d]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t d = 0; d < n; ++d)
      xc[d] = outside ? centroid[d] + gamma * (xr[d] - centroid[d]) : centroid[d] - gamma * (centroid[d] - pts[worst][d]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[best][d] + delta * (pts[i][d] - pts[best][d]);
      vals[i] = eval(pts[i]);
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals};
}

struct AdvMinPoint {
  double b = 0.0;
  int k = 0;
  std::vector<double> y, z;
  double value = 0.0;
  // Largest violation among the sum, ordering, pair and sign constraints.
  double residual = 0.0;
  std::size_t evals = 0;
  int restarts = 0;
};

namespace detail {
inline double advmin_g(double b, double t) { return (t - b * t + b * t * t) / (1.0 + b * t); }

// sum_i g(y_i) prod_{i'<i} 1/(1 + b y_i').
inline double advmin_series(double b, const std::vector<double>& y, std::size_t upto) {
  double s = 0.0, p = 1.0;
  for (std::size_t i = 0; i < upto; ++i) {
    s += advmin_g(b, y[i]) * p;
    p /= 1.0 + b * y[i];
  }
  return s;
}
}  // namespace detail

inline double advmin_objective(double b, const std::vector<double>& y, const std::vector<double>& z) {
  if (y.size() != z.size()) throw std::invalid_argument("y and z must have the same length");
  const std::size_t k = y.size();
  const double u = detail::advmin_series(b, y, k), v = detail::advmin_series(b, z, k);
  double diag = 0.0, py = 1.0, pz = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    diag += detail::advmin_g(b, y[i]) * detail::advmin_g(b, z[i]) * py * pz;
    py /= 1.0 + b * y[i];
    pz /= 1.0 + b * z[i];
  }
  return b * b * (u * v - diag);
}

// Cutoff-K relaxation: coordinates beyond K are folded into an exponential
// tail bound and a -b^2(1-b)^2/(K-2) correction. Only the first K entries of
// y and z are read.
inline double advminaux_objective(double b, int K, const std::vector<double>& y, const std::vector<double>& z) {
  if (K <= 2) throw std::invalid_argument("auxiliary objective needs K > 2");
  if (static_cast<int>(y.size()) < K || static_cast<int>(z.size()) < K)
    throw std::invalid_argument("y and z need at least K entries");
  const std::size_t kk = static_cast<std::size_t>(K);
  auto side = [&](const std::vector<double>& w) {
    double prod = 1.0, mass = 0.0;
    for (std::size_t i = 0; i < kk; ++i) {
      prod *= 1.0 - b * w[i];
      mass += w[i];
    }
    // b * (sum + ((1-b)/b) prod (1 - e^{-b(1-mass)})), written without dividing by b.
    return b * detail::advmin_series(b, w, kk) + (1.0 - b) * prod * (-std::expm1(-b * (1.0 - mass)));
  };
  double diag = 0.0, py = 1.0, pz = 1.0;
  for (std::size_t i = 0; i < kk; ++i) {
    diag += detail::advmin_g(b, y[i]) * detail::advmin_g(b, z[i]) * py * pz;
    py /= 1.0 + b * y[i];
    pz /= 1.0 + b * z[i];
  }
  return side(y) * side(z) - b * b * diag - b * b * (1.0 - b) * (1.0 - b) / (K - 2);
}

inline double advmin_residual(const std::vector<double>& y, const std::vector<double>& z) {
  double r = std::abs(std::accumulate(y.begin(), y.end(), 0.0) - 1.0);
  r = std::max(r, std::abs(std::accumulate(z.begin(), z.end(), 0.0) - 1.0));
  for (std::size_t i = 0; i < y.size(); ++i) {
    r = std::max({r, -y[i], -z[i], y[i] + z[i] - 1.0});
    if (i > 0) r = std::max({r, y[i] - y[i - 1], z[i] - z[i - 1]});
  }
  return r;
}

// y_1 = z_1 = 1/2 with the remaining mass spread evenly over k-1 coordinates.
inline std::vector<double> advmin_hybrid_vector(int k) {
  if (k < 2) throw std::invalid_argument("hybrid point needs k >= 2");
  std::vector<double> y(k, 0.5 / (k - 1));
  y[0] = 0.5;
  return y;
}

// k -> infinity value of the hybrid point: b^2 (T^2 - g(1/2)^2) with
// T = g(1/2) + (1-b)(1 - e^{-b/2}) / (b (1 + b/2)).
inline double advmin_hybrid_limit(double b) {
  const double g = detail::advmin_g(b, 0.5);
  const double t = g + (1.0 - b) * (-std::expm1(-b / 2.0)) / (b * (1.0 + b / 2.0));
  return b * b * (t * t - g * g);
}

namespace detail {
// Softmax weights over the prefix-uniform vectors u_j = (1/j, ..., 1/j, 0, ...),
// which are the extreme points of {monotone, non-negative, sum 1}.
inline std::vector<double> prefix_mixture(const double* theta, int k) {
  const double mx = *std::max_element(theta, theta + k);
  std::vector<double> lam(k);
  double tot = 0.0;
  for (int j = 0; j < k; ++j) tot += lam[j] = std::exp(theta[j] - mx);
  std::vector<double> y(k);
  double acc = 0.0;
  for (int i = k - 1; i >= 0; --i) {
    acc += lam[i] / tot / (i + 1);
    y[i] = acc;
  }
  return y;
}

// For monotone vectors the pair constraint only binds at i = 1; mixing both
// toward uniform restores y_1 + z_1 <= 1 and keeps every other constraint.
inline void enforce_pair_constraint(std::vector<double>& y, std::vector<double>& z) {
  const double k = static_cast<double>(y.size());
  const double s = y[0] + z[0];
  if (s <= 1.0 || y.size() < 2) return;
  const double beta = (s - 1.0) / (s - 2.0 / k);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = (1.0 - beta) * y[i] + beta / k;
    z[i] = (1.0 - beta) * z[i] + beta / k;
  }
}

inline void decode_advmin(const std::vector<double>& theta, int k, std::vector<double>& y, std::vector<double>& z) {
  y = prefix_mixture(theta.data(), k);
  z = prefix_mixture(theta.data() + k, k);
  enforce_pair_constraint(y, z);
}
}  // namespace detail

struct AdvMinSearchOptions {
  int restarts = 64;
  std::uint64_t seed = 1;
  NelderMeadOptions nm{};
};

// Multi-start Nelder-Mead over the feasible set. The first starts sit at pairs
// of extreme points (prefix lengths on a doubling grid), the rest are random.
// The result is an upper bound on the infimum, not a certificate.
inline AdvMinPoint advmin_search(double b, int k, const AdvMinSearchOptions& opt = {}) {
  if (k < 2) throw std::invalid_argument("advmin_search needs k >= 2");
  std::vector<int> grid;
  for (int j = 1; j < k; j *= 2) grid.push_back(j);
  grid.push_back(k);
  std::vector<std::pair<int, int>> corners;
  for (int jy : grid)
    for (int jz : grid) corners.push_back({jy, jz});

  auto objective = [&](const std::vector<double>& theta) {
    std::vector<double> y, z;
    detail::decode_advmin(theta, k, y, z);
    return advmin_objective(b, y, z);
  };
  AdvMinPoint best;
  best.b = b;
  best.k = k;
  best.value = std::numeric_limits<double>::infinity();
  Rng rng = trial_stream(opt.seed, 0, 0x61646dULL);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<double> theta(2 * static_cast<std::size_t>(k));
    if (r < static_cast<int>(corners.size())) {
      std::fill(theta.begin(), theta.end(), -8.0);
      theta[corners[r].first - 1] = 2.0;
      theta[k + corners[r].second - 1] = 2.0;
    } else {
      for (double& t : theta) t = normal(rng);
    }
    NelderMeadResult res = nelder_mead(objective, theta, opt.nm);
    best.evals += res.evals;
    if (res.f < best.value) {
      best.value = res.f;
      detail::decode_advmin(res.x, k, best.y, best.z);
    }
  }
  best.restarts = opt.restarts;
  best.residual = advmin_residual(best.y, best.z);
  return best;
}

}  // namespace crs
