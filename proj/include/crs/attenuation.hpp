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
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace crs {

class Attenuation {
 public:
  enum class Kind { a1, a2, constant, table, custom };

  static Attenuation a1() { return Attenuation(Kind::a1); }
  static Attenuation a2() { return Attenuation(Kind::a2); }
  static Attenuation constant(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("constant attenuation must lie in [0,1]");
    Attenuation a(Kind::constant);
    a.value_ = v;
    return a;
  }
  // Piecewise-linear interpolation of values on an even grid over [0,1].
  static Attenuation table(std::vector<double> values) {
    if (values.size() < 2) throw std::invalid_argument("attenuation table needs at least two values");
    Attenuation a(Kind::table);
    a.table_ = std::move(values);
    return a;
  }
  // Arbitrary function, used by the analytic checks only.
  static Attenuation custom(std::function<double(double)> f, std::string name = "custom") {
    Attenuation a(Kind::custom);
    a.fn_ = std::move(f);
    a.name_ = std::move(name);
    return a;
  }

  // "a1", "a2", "const=<v>".
  static Attenuation parse(const std::string& s) {
    if (s == "a1") return a1();
    if (s == "a2") return a2();
    if (s.rfind("const=", 0) == 0) return constant(std::stod(s.substr(6)));
    throw std::invalid_argument("unknown attenuation '" + s + "'");
  }

  Kind kind() const { return kind_; }

  std::string name() const {
    switch (kind_) {
      case Kind::a1: return "a1";
      case Kind::a2: return "a2";
      case Kind::constant: return "const=" + std::to_string(value_);
      case Kind::table: return "table";
      case Kind::custom: return name_;
    }
    return "?";
  }

  double operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("attenuation argument outside [0,1]");
    return eval_unchecked(x);
  }

  double eval_unchecked(double x) const {
    switch (kind_) {
      case Kind::a1: {
        const double t = 1.0 - (3.0 - std::numbers::e) * x;
        return t * t;
      }
      case Kind::a2: return eval_a2(x);
      case Kind::constant: return value_;
      case Kind::table: {
        const double pos = x * static_cast<double>(table_.size() - 1);
        const std::size_t i = std::min(static_cast<std::size_t>(pos), table_.size() - 2);
        const double f = pos - static_cast<double>(i);
        return table_[i] * (1.0 - f) + table_[i + 1] * f;
      }
      case Kind::custom: return fn_(x);
    }
    return 0.0;
  }

  // s(x) = x a(x), the survival probability of an edge of value x.
  double survival(double x) const { return x * (*this)(x); }

 private:
  explicit Attenuation(Kind k) : kind_(k) {}

  // (1-x)^4 / (e^x - e x)^2 written in d = 1-x: e^x - e x = e (e^{-d} - 1 + d).
  static double eval_a2(double x) {
    const double d = 1.0 - x;
    double q;
    if (d < 0.1) {
      // sum_{j>=0} (-d)^j / (j+2)!, truncated well below one ulp.
      q = 0.0;
      double fact = 1.0;
      for (int j = 2; j <= 15; ++j) fact *= j;
      for (int j = 13; j >= 0; --j) {
        q = 1.0 / fact - d * q;
        fact /= (j + 2);
      }
    } else {
      q = (std::expm1(-d) + d) / (d * d);
    }
    const double e = std::numbers::e;
    return 1.0 / (e * e * q * q);
  }

  Kind kind_;
  double value_ = 1.0;
  std::vector<double> table_;
  std::function<double(double)> fn_;
  std::string name_;
};

}  // namespace crs
