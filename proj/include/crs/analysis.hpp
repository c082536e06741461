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
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "crs/attenuation.hpp"
#include "crs/graph.hpp"
#include "crs/quadrature.hpp"

namespace crs {

// l(x, y) = 1 - y s(x): probability that an edge of value x is irrelevant at time y.
inline double func_ell(const Attenuation& a, double x, double y) { return 1.0 - y * a.survival(x); }

// T(x, y) = s(1-x)/x * (1 - (1 - e^{-xy})/(xy)), continuous at x = 0 and y = 0.
inline double func_T(const Attenuation& a, double x, double y) {
  if (x <= 0.0) return a(1.0) * y / 2.0;
  x = std::min(x, 1.0);
  const double z = x * y;
  // (e^{-z} - 1 + z)/z^2
  double q;
  if (z < 1e-3) {
    q = 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 + z * z * z * z / 720.0;
  } else {
    q = (std::expm1(-z) + z) / (z * z);
  }
  return a.survival(1.0 - x) * y * q;
}

struct CurvePoint {
  double x = 0.0;
  double value = 0.0;
};

struct PropertyCheckReport {
  std::string property;
  double grid_step = 0.0;
  double tol = 0.0;
  // Coordinates of the worst point, meaning depends on the property.
  std::vector<double> worst_at;
  // Positive magnitudes are violations; pass iff worst_violation <= tol.
  double worst_violation = -std::numeric_limits<double>::infinity();
  bool pass = true;
  std::vector<PropertyCheckReport> parts;
  // Extra scalar observations (e.g. minimum integral and its location).
  std::vector<std::pair<std::string, double>> notes;

  void observe(double violation, std::vector<double> where) {
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    if (violation > worst_violation) {
      worst_violation = violation;
      worst_at = std::move(where);
    }
  }
  void finish() {
    pass = worst_violation <= tol;
    for (const auto& p : parts) pass = pass && p.pass;
  }
  void absorb(const PropertyCheckReport& p) {
    if (p.worst_violation > worst_violation) {
      worst_violation = p.worst_violation;
      worst_at = p.worst_at;
    }
    parts.push_back(p);
  }
};

namespace detail {
inline PropertyCheckReport new_report(std::string property, double grid_step, double tol) {
  PropertyCheckReport r;
  r.property = std::move(property);
  r.grid_step = grid_step;
  r.tol = tol;
  return r;
}

inline int grid_count(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("grid step must lie in (0,1]");
  return static_cast<int>(std::lround(1.0 / step));
}
}  // namespace detail

// a(0) = 1 and a non-increasing on the grid.
inline PropertyCheckReport check_attenuation_shape(const Attenuation& a, double grid_step, double tol = 1e-6) {
  const int n = detail::grid_count(grid_step);
  PropertyCheckReport r = detail::new_report("shape", grid_step, tol);
  r.observe(std::abs(a.eval_unchecked(0.0) - 1.0), {0.0});
  double prev = a.eval_unchecked(0.0);
  for (int i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double cur = a.eval_unchecked(x);
    r.observe(cur - prev, {x});
    prev = cur;
  }
  r.finish();
  return r;
}

// x -> ln(1 - y x a(x)) convex for every y, via second differences at the
// grid spacing, plus the shape conditions.
inline PropertyCheckReport check_first_order(const Attenuation& a, double grid_step, double tol = 1e-6) {
  const int n = detail::grid_count(grid_step);
  const double h = 1.0 / n;
  PropertyCheckReport conv = detail::new_report("log-convexity", grid_step, tol);
  std::vector<double> s(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    s[i] = x * a.eval_unchecked(x);
  }
  std::vector<double> f(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double y = static_cast<double>(j) / n;
    for (int i = 0; i <= n; ++i) f[i] = std::log1p(-y * s[i]);
    for (int i = 1; i < n; ++i) {
      const double d2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
      conv.observe(-d2, {static_cast<double>(i) / n, y});
    }
  }
  conv.finish();
  PropertyCheckReport r = detail::new_report("first-order", grid_step, tol);
  r.absorb(conv);
  r.absorb(check_attenuation_shape(a, grid_step, tol));
  r.finish();
  return r;
}

namespace detail {
// d/dx ln a(x) by central differences (step 1e-5), one-sided three-point at 0.
inline double log_derivative(const Attenuation& a, double x) {
  const double h = 1e-5;
  double d;
  if (x - h < 0.0) {
    d = (-3.0 * a.eval_unchecked(x) + 4.0 * a.eval_unchecked(x + h) - a.eval_unchecked(x + 2 * h)) / (2.0 * h);
  } else if (x + h > 1.0) {
    d = (3.0 * a.eval_unchecked(x) - 4.0 * a.eval_unchecked(x - h) + a.eval_unchecked(x - 2 * h)) / (2.0 * h);
  } else {
    d = (a.eval_unchecked(x + h) - a.eval_unchecked(x - h)) / (2.0 * h);
  }
  return d / a.eval_unchecked(x);
}
}  // namespace detail

// a'(x)/a(x) + 4/(1-x) - 2(1-e^{x-1})/(e^{x-1}-x), written in d = 1-x.
inline double second_order_expression(const Attenuation& a, double x) {
  const double d = 1.0 - x;
  if (d <= 0.0) throw std::domain_error("second-order expression is singular at x = 1");
  const double em = std::expm1(-d);
  return detail::log_derivative(a, x) + 4.0 / d - 2.0 * (-em) / (em + d);
}

inline PropertyCheckReport check_second_order(const Attenuation& a, double grid_step, double x_max = 1.0 - 1e-3,
                                              double tol = 1e-6) {
  const int n = detail::grid_count(grid_step);
  PropertyCheckReport r = detail::new_report("second-order", grid_step, tol);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    if (x > x_max + 1e-15) break;
    r.observe(second_order_expression(a, x), {x});
  }
  r.finish();
  return r;
}

// max |expression| on [0, x_max]; zero exactly when a solves the ODE.
inline PropertyCheckReport ode_residual(const Attenuation& a, double grid_step, double x_max = 1.0 - 1e-3,
                                        double tol = 1e-6) {
  const int n = detail::grid_count(grid_step);
  PropertyCheckReport r = detail::new_report("ode-residual", grid_step, tol);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    if (x > x_max + 1e-15) break;
    r.observe(std::abs(second_order_expression(a, x)), {x});
  }
  r.finish();
  return r;
}

enum class SplitVariant {
  pair,    // two split edges sharing the split vertex
  single,  // one split edge (triangle-free weakening)
};

struct VertexSplitOptions {
  SplitVariant variant = SplitVariant::pair;
  int y_points = 2000;
  double dead_band = 1e-10;
  double tol = 1e-6;
};

// Lower envelope minus the Poisson limit, for the pair variant.
inline double split_function_pair(const Attenuation& a, double x1, double x2, double y) {
  const double l1 = func_ell(a, x1, y), l2 = func_ell(a, x2, y);
  const double sum = x1 + x2;
  return l1 * l2 + func_T(a, sum, y) * (y * a.survival(x1) * l2 + y * a.survival(x2) * l1) -
         std::exp(-sum * y) * (1.0 + sum * a(1.0) * y * y / 2.0);
}

inline double split_function_single(const Attenuation& a, double x, double y) {
  return func_ell(a, x, y) + y * a.survival(x) * func_T(a, x, y) - std::exp(-x * y) * (1.0 + x * a(1.0) * y * y / 2.0);
}

// Over the (x1, x2) grid with x1 + x2 <= 1 (or the x grid for the single
// variant): the product of irrelevance probabilities dominates the Poisson
// limit, and the split function starts non-negative, changes sign at most
// once on a y grid, and has non-negative integral.
inline PropertyCheckReport check_vertex_split_props(const Attenuation& a, double grid_step,
                                                    const VertexSplitOptions& opt = {}) {
  const int n = detail::grid_count(grid_step);
  const int ny = opt.y_points;
  const double a1v = a(1.0);
  std::vector<double> ys(ny);
  for (int j = 0; j < ny; ++j) ys[j] = static_cast<double>(j + 1) / ny;

  // Tables over x index (and over x index sums, which stay on the grid).
  std::vector<double> s(n + 1);
  for (int i = 0; i <= n; ++i) s[i] = a.survival(static_cast<double>(i) / n);
  auto idx = [ny](int i, int j) { return static_cast<std::size_t>(i) * ny + j; };
  std::vector<double> ell((n + 1) * static_cast<std::size_t>(ny)), tt(ell.size()), ex(ell.size());
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    for (int j = 0; j < ny; ++j) {
      ell[idx(i, j)] = 1.0 - ys[j] * s[i];
      tt[idx(i, j)] = func_T(a, x, ys[j]);
      ex[idx(i, j)] = std::exp(-x * ys[j]) * (1.0 + x * a1v * ys[j] * ys[j] / 2.0);
    }
  }

  PropertyCheckReport late = detail::new_report("late-domination", grid_step, opt.tol);
  PropertyCheckReport start = detail::new_report("initially-non-negative", grid_step, opt.tol);
  PropertyCheckReport sign = detail::new_report("single-sign-change", grid_step, 0.0);
  PropertyCheckReport integral = detail::new_report("non-negative-integral", grid_step, opt.tol);
  double min_int = std::numeric_limits<double>::infinity();
  std::vector<double> min_at;
  int max_changes = 0;

  const bool pair = opt.variant == SplitVariant::pair;
  for (int i = 0; i <= n; ++i) {
    for (int k = pair ? i : 0; k <= (pair ? n - i : 0); ++k) {
      const int sum = pair ? i + k : i;
      int changes = 0;
      int last_sign = 0;
      int first_sign = 0;
      for (int j = 0; j < ny; ++j) {
        const double y = ys[j];
        double dom, f;
        if (pair) {
          const double l1 = ell[idx(i, j)], l2 = ell[idx(k, j)];
          const double pois = std::exp(-(static_cast<double>(sum) / n) * y);
          dom = l1 * l2 - pois;
          f = l1 * l2 + tt[idx(sum, j)] * (y * s[i] * l2 + y * s[k] * l1) - ex[idx(sum, j)];
        } else {
          const double l = ell[idx(i, j)];
          dom = l - std::exp(-(static_cast<double>(i) / n) * y);
          f = l + y * s[i] * tt[idx(i, j)] - ex[idx(i, j)];
        }
        if (-dom > late.worst_violation) late.observe(-dom, {static_cast<double>(i) / n, static_cast<double>(k) / n, y});
        if (std::abs(f) > opt.dead_band) {
          const int sg = f > 0 ? 1 : -1;
          if (first_sign == 0) first_sign = sg;
          if (last_sign != 0 && sg != last_sign) ++changes;
          last_sign = sg;
        }
        if (j == 0) start.observe(-f, {static_cast<double>(i) / n, static_cast<double>(k) / n});
      }
      if (first_sign < 0) start.observe(std::numeric_limits<double>::infinity(),
                                        {static_cast<double>(i) / n, static_cast<double>(k) / n});
      if (changes > max_changes) max_changes = changes;
      sign.observe(changes > 1 ? static_cast<double>(changes - 1) : 0.0,
                   {static_cast<double>(i) / n, static_cast<double>(k) / n});
      const double x1 = static_cast<double>(i) / n, x2 = static_cast<double>(k) / n;
      const double val = pair ? integrate([&](double y) { return split_function_pair(a, x1, x2, y); }, 0.0, 1.0, 1e-11, 6)
                              : integrate([&](double y) { return split_function_single(a, x1, y); }, 0.0, 1.0, 1e-11, 6);
      integral.observe(-val, {x1, x2});
      if (val < min_int) {
        min_int = val;
        min_at = {x1, x2};
      }
    }
  }
  late.finish();
  start.finish();
  sign.finish();
  integral.finish();
  PropertyCheckReport r = detail::new_report(pair ? "vertex-split(pair)" : "vertex-split(single)", grid_step, opt.tol);
  r.absorb(late);
  r.absorb(start);
  r.absorb(sign);
  r.absorb(integral);
  r.notes = {{"min_integral", min_int}, {"min_integral_x1", min_at.empty() ? 0.0 : min_at[0]},
             {"min_integral_x2", min_at.empty() ? 0.0 : min_at[1]}, {"max_sign_changes", max_changes}};
  r.finish();
  return r;
}

// a(x_e) * int_0^1 e^{-2(1-x_e)y} (1 + a(1)(1-x_e)y^2) dy.
inline double selectability_curve_general(double xe, const Attenuation& a = Attenuation::a1()) {
  const double a1v = a(1.0);
  const double r = 1.0 - xe;
  return a(xe) * integrate([&](double y) { return std::exp(-2.0 * r * y) * (1.0 + a1v * r * y * y); }, 0.0, 1.0);
}

// a(x_e) * int_0^1 (e^{-(1-x_e)y} (1 + a(1)(1-x_e)y^2/2))^2 dy.
inline double selectability_curve_bipartite(double xe, const Attenuation& a = Attenuation::a2()) {
  const double a1v = a(1.0);
  const double r = 1.0 - xe;
  return a(xe) * integrate(
                     [&](double y) {
                       const double t = std::exp(-r * y) * (1.0 + a1v * r * y * y / 2.0);
                       return t * t;
                     },
                     0.0, 1.0);
}

inline double general_constant_closed_form() {
  const double e = std::numbers::e;
  return (e * e - 4 * e * e * e + e * e * e * e + 20 * e - 22) / (4 * e * e);
}

inline double bipartite_constant_closed_form() {
  const double e = std::numbers::e;
  const double e2 = e * e, e4 = e2 * e2, e6 = e4 * e2;
  return (e6 + e4 - 42 - 4 * e2) / (2 * e6);
}

namespace detail {
struct NeighbourTerm {
  double x = 0.0;
  double x_pair = 0.0;  // value of the edge from the same outer vertex to e's other endpoint
};

inline std::vector<NeighbourTerm> neighbourhood(const GraphInstance& g, int e, int only_endpoint = -1) {
  if (e < 0 || e >= g.edge_count()) throw std::out_of_range("edge index out of range");
  const int u = g.edges[e].u, v = g.edges[e].v;
  std::vector<std::vector<std::pair<int, double>>> adj(g.vertex_count);
  for (const Edge& f : g.edges) {
    adj[f.u].push_back({f.v, f.x});
    adj[f.v].push_back({f.u, f.x});
  }
  auto value_between = [&](int a, int b) {
    for (auto [w, x] : adj[a])
      if (w == b) return x;
    return 0.0;
  };
  std::vector<NeighbourTerm> out;
  for (int end : {u, v}) {
    if (only_endpoint >= 0 && end != only_endpoint) continue;
    const int other = end == u ? v : u;
    for (auto [w, x] : adj[end]) {
      if (w == other) continue;
      out.push_back({x, value_between(w, other)});
    }
  }
  return out;
}

// prod_g l + sum_f T(x_f + x_f^c) s(x_f) y prod_{g != f} l.
inline double neighbourhood_integrand(const Attenuation& a, const std::vector<NeighbourTerm>& nb, double y,
                                      bool use_pair) {
  const std::size_t d = nb.size();
  std::vector<double> l(d), pre(d + 1, 1.0), suf(d + 1, 1.0);
  for (std::size_t i = 0; i < d; ++i) l[i] = func_ell(a, nb[i].x, y);
  for (std::size_t i = 0; i < d; ++i) pre[i + 1] = pre[i] * l[i];
  for (std::size_t i = d; i-- > 0;) suf[i] = suf[i + 1] * l[i];
  double total = pre[d];
  for (std::size_t i = 0; i < d; ++i) {
    const double tx = std::min(1.0, nb[i].x + (use_pair ? nb[i].x_pair : 0.0));
    total += func_T(a, tx, y) * a.survival(nb[i].x) * y * pre[i] * suf[i + 1];
  }
  return total;
}

inline void require_one_regular(const GraphInstance& g) {
  g.check_structure();
  if (!is_one_regular(g)) throw std::invalid_argument("instance is not 1-regular");
}
}  // namespace detail

// int_0^1 obj_G(e, y) dy for a 1-regular instance.
inline double obj_general(const GraphInstance& g, int e, const Attenuation& a = Attenuation::a1()) {
  detail::require_one_regular(g);
  const auto nb = detail::neighbourhood(g, e);
  return integrate([&](double y) { return detail::neighbourhood_integrand(a, nb, y, true); }, 0.0, 1.0);
}

// obj_{G minus e}(endpoint, y) for one endpoint of e.
inline double obj_minus_edge(const GraphInstance& g, int e, int endpoint, double y,
                             const Attenuation& a = Attenuation::a2()) {
  const auto nb = detail::neighbourhood(g, e, endpoint);
  return detail::neighbourhood_integrand(a, nb, y, false);
}

// int_0^1 obj_{G-e}(u, y) obj_{G-e}(v, y) dy for a 1-regular instance
// without 3- or 5-cycles.
inline double obj_bipartite(const GraphInstance& g, int e, const Attenuation& a = Attenuation::a2()) {
  detail::require_one_regular(g);
  const OddCycles oc = short_odd_cycles(g);
  if (oc.has_3_cycle || oc.has_5_cycle) throw std::invalid_argument("instance has a 3- or 5-cycle");
  const auto nu = detail::neighbourhood(g, e, g.edges[e].u);
  const auto nv = detail::neighbourhood(g, e, g.edges[e].v);
  return integrate(
      [&](double y) {
        return detail::neighbourhood_integrand(a, nu, y, false) * detail::neighbourhood_integrand(a, nv, y, false);
      },
      0.0, 1.0);
}

// 1 - 3c + (1 - exp(-c(1-2c)/(1-c)^2))^2; non-negative c are guaranteed on bipartite graphs.
inline double ocrs_bipartite_constraint(double c) {
  if (!(c >= 0.0 && c <= 0.5)) throw std::domain_error("c must lie in [0, 1/2]");
  const double t = -std::expm1(-c * (1.0 - 2.0 * c) / ((1.0 - c) * (1.0 - c)));
  return 1.0 - 3.0 * c + t * t;
}

// Largest root-bracketing point of f on [lo, hi] found by bisection, given f(lo) >= 0 > f(hi).
inline double bisect_sign_change(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
  if (!(f(lo) >= 0.0) || !(f(hi) < 0.0)) throw std::invalid_argument("no sign change on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

// Any OCRS on the four-cycle-with-diagonals instance must satisfy
// 1 - ((3+eps)(1-eps)/2) c >= c; returns the largest such c by bisection.
inline double any_ocrs_bound(double eps) {
  const double k = (3.0 + eps) * (1.0 - eps) / 2.0;
  return bisect_sign_change([k](double c) { return 1.0 - k * c - c; }, 0.0, 1.0);
}

}  // namespace crs
