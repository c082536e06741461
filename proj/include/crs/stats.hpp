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
#include <stdexcept>
#include <utility>

#include <boost/math/distributions/normal.hpp>

namespace crs {

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  double lo = center - half, hi = center + half;
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {std::max(0.0, lo), std::min(1.0, hi)};
}

// Two-sided z at the same family-wise level as `z`, split over `m` comparisons.
inline double bonferroni_z(double z, std::size_t m) {
  if (m <= 1) return z;
  boost::math::normal_distribution<double> nd;
  const double alpha = 2.0 * boost::math::cdf(boost::math::complement(nd, z));
  return boost::math::quantile(boost::math::complement(nd, alpha / (2.0 * static_cast<double>(m))));
}

}  // namespace crs
