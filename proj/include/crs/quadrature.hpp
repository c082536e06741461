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

#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace crs {

inline constexpr double kQuadTol = 1e-12;

// Adaptive Gauss-Kronrod (21-point) on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = kQuadTol,
                        unsigned max_depth = 15) {
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth, tol);
}

}  // namespace crs
