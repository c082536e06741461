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

#include <cmath>
#include <random>

#include "crs/advmin.hpp"

using namespace crs;

namespace {

const double kC = 0.3445;
const double kB = kC / (1.0 - kC);

double g_of(double b, double t) { return (t - b * t + b * t * t) / (1.0 + b * t); }

// Random feasible (y, z): sorted non-negative weights, normalised, then the
// pair constraint repaired by mixing toward uniform.
void random_feasible(std::mt19937_64& rng, int k, std::vector<double>& y, std::vector<double>& z) {
  std::exponential_distribution<double> ex(1.0);
  std::uniform_real_distribution<double> sharp(0.2, 4.0);
  auto draw = [&] {
    std::vector<double> w(k);
    const double p = sharp(rng);
    for (double& v : w) v = std::pow(ex(rng), p);
    std::sort(w.rbegin(), w.rend());
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= s;
    return w;
  };
  y = draw();
  z = draw();
  detail::enforce_pair_constraint(y, z);
}

}  // namespace

TEST(NelderMead, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  auto r = nelder_mead(f, {-1.2, 1.0}, {20000, 0.5, 1e-20, 1e-12});
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(NelderMead, QuadraticInTenDimensions) {
  auto f = [](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * (x[i] - 0.1 * i) * (x[i] - 0.1 * i);
    return s;
  };
  auto r = nelder_mead(f, std::vector<double>(10, 1.0));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(r.x[i], 0.1 * i, 1e-4);
}

TEST(AdvMinObjective, ZeroAtZeroB) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> y, z;
    random_feasible(rng, 6, y, z);
    EXPECT_EQ(advmin_objective(0.0, y, z), 0.0);
  }
}

TEST(AdvMinObjective, TwoCoordinateHandValue) {
  const double g = g_of(kB, 0.5), p = 1.0 / (1.0 + kB / 2.0);
  const double s = g + g * p;
  const double expected = kB * kB * (s * s - g * g - g * g * p * p);
  EXPECT_NEAR(advmin_objective(kB, {0.5, 0.5}, {0.5, 0.5}), expected, 1e-15);
  EXPECT_THROW(advmin_objective(kB, {1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST(AdvMinObjective, HybridApproachesLimit) {
  const double lim = advmin_hybrid_limit(kB);
  const double v3 = advmin_objective(kB, advmin_hybrid_vector(1000), advmin_hybrid_vector(1000));
  const double v4 = advmin_objective(kB, advmin_hybrid_vector(10000), advmin_hybrid_vector(10000));
  EXPECT_NEAR(v3, lim, 1e-3);
  EXPECT_NEAR(v4, lim, 1e-3);
  EXPECT_LT(std::abs(v4 - lim), std::abs(v3 - lim));
  EXPECT_LE(advmin_residual(advmin_hybrid_vector(1000), advmin_hybrid_vector(1000)), 1e-12);
}

TEST(AdvMinAux, LowerBoundsObjective) {
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int K : {3, 5, 10, 20}) {
    for (int k : {K, 2 * K, 60}) {
      for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> y, z;
        random_feasible(rng, k, y, z);
        ASSERT_LE(advmin_residual(y, z), 1e-12);
        for (double b : {0.2, kB, 0.9}) {
          EXPECT_LE(advminaux_objective(b, K, y, z), advmin_objective(b, y, z) + 1e-12)
              << "K=" << K << " k=" << k << " b=" << b;
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 1000);
  EXPECT_THROW(advminaux_objective(kB, 2, {0.5, 0.5}, {0.5, 0.5}), std::invalid_argument);
}

TEST(AdvMinDecode, AlwaysFeasible) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + rep % 30;
    std::vector<double> theta(2 * k);
    for (double& t : theta) t = nd(rng);
    std::vector<double> y, z;
    detail::decode_advmin(theta, k, y, z);
    EXPECT_LE(advmin_residual(y, z), 1e-12);
  }
}

TEST(AdvMinSearch, NoWorseThanHalfHalf) {
  AdvMinSearchOptions opt;
  opt.restarts = 8;
  auto best = advmin_search(kB, 2, opt);
  EXPECT_LE(best.value, advmin_objective(kB, {0.5, 0.5}, {0.5, 0.5}) + 1e-15);
  EXPECT_LE(best.residual, 1e-9);
}

TEST(AdvMinSearch, DecreasingInK) {
  AdvMinSearchOptions opt;
  opt.restarts = 16;
  const double b4 = advmin_search(kB, 4, opt).value;
  const double b8 = advmin_search(kB, 8, opt).value;
  EXPECT_LE(b8, b4 + 1e-6);
}

TEST(AdvMinSearch, DeterministicPerSeed) {
  AdvMinSearchOptions opt;
  opt.restarts = 12;
  auto a = advmin_search(kB, 6, opt);
  auto b = advmin_search(kB, 6, opt);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.y, b.y);
}

TEST(AdvMinSearch, FindsHybridAtModerateK) {
  AdvMinSearchOptions opt;
  opt.restarts = 40;
  auto best = advmin_search(kB, 16, opt);
  EXPECT_NEAR(best.y[0], 0.5, 0.05);
  EXPECT_NEAR(best.z[0], 0.5, 0.05);
  const auto h = advmin_hybrid_vector(16);
  EXPECT_LE(best.value, advmin_objective(kB, h, h) + 1e-9);
  EXPECT_GE(1.0 - 3.0 * kC + best.value, -1e-4);
}
