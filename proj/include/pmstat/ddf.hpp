// Copyright 2026 The pm-statkit Authors
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

// Distance distribution functions: nondecreasing, left-continuous maps
// [0, inf] -> [0, 1] with f(0) = 0 and f(inf) = 1.
//
// A Ddf is stored as an ascending list of knots (t, f(t-), f(t+)). Between
// knots the function is either constant (step mode) or linear (linear mode).
// Beyond the last knot it stays at the last right value; the jump to 1 at
// infinity is implicit, so a Ddf with no knots is the unit step at infinity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pmstat {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Interpolation { step, linear };

struct Knot {
  double t = 0.0;
  double left = 0.0;   // f(t), the left limit
  double right = 0.0;  // f(t+)

  bool operator==(const Knot&) const = default;
};

class Ddf {
 public:
  /// Unit step at infinity.
  Ddf() = default;

  /// Throws std::domain_error when the knots do not describe a valid DDF.
  explicit Ddf(std::vector<Knot> knots, Interpolation mode = Interpolation::step)
      : knots_(std::move(knots)), mode_(mode) {
    validate();
  }

  /// The unit step at q: 0 on [0, q], 1 on (q, inf].
  static Ddf unit_step(double q) {
    if (std::isnan(q) || q < 0.0) {
      throw std::domain_error("unit_step: q must be >= 0, got " + std::to_string(q));
    }
    if (std::isinf(q)) return Ddf{};
    return Ddf({Knot{q, 0.0, 1.0}});
  }

  /// Step function from (t, value just after t) pairs with ascending t.
  static Ddf from_jumps(const std::vector<std::pair<double, double>>& jumps) {
    std::vector<Knot> knots;
    knots.reserve(jumps.size());
    double prev = 0.0;
    for (const auto& [t, after] : jumps) {
      knots.push_back(Knot{t, prev, after});
      prev = after;
    }
    return Ddf(std::move(knots));
  }

  /// Linear ramp from (0, 0) to (width, 1).
  static Ddf ramp(double width) {
    if (!(width > 0.0) || std::isinf(width)) {
      throw std::domain_error("ramp: width must be positive and finite");
    }
    return Ddf({Knot{width, 1.0, 1.0}}, Interpolation::linear);
  }

  double operator()(double t) const { return eval(t); }

  /// f(t) with left-continuity at knots. f(t) = 0 for t <= 0 and f(inf) = 1.
  double eval(double t) const {
    if (std::isnan(t)) throw std::domain_error("Ddf::eval: NaN argument");
    if (t <= 0.0) return 0.0;
    if (std::isinf(t)) return 1.0;
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                                     [](const Knot& k, double x) { return k.t < x; });
    if (it != knots_.end() && it->t == t) return it->left;
    return between(it, t);
  }

  /// f(t+). Equals eval(t) away from jumps.
  double right_limit(double t) const {
    if (std::isnan(t)) throw std::domain_error("Ddf::right_limit: NaN argument");
    if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
    if (t < 0.0) return 0.0;
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                                     [](const Knot& k, double x) { return k.t < x; });
    if (it != knots_.end() && it->t == t) return it->right;
    if (t == 0.0) return 0.0;
    return between(it, t);
  }

  /// Left limit f(t-); for t > 0 this is f(t) itself.
  double left_limit(double t) const {
    if (t <= 0.0) return 0.0;
    return eval(t);
  }

  std::span<const Knot> knots() const { return knots_; }
  Interpolation interpolation() const { return mode_; }

  /// Largest knot coordinate, or 0 when there are no knots.
  double last_knot() const { return knots_.empty() ? 0.0 : knots_.back().t; }

  /// Value held after the last knot (before the implicit jump at infinity).
  double tail_value() const { return knots_.empty() ? 0.0 : knots_.back().right; }

  /// g(t) = f(t / factor). factor = inf yields the unit step at infinity.
  Ddf scaled(double factor) const {
    if (!(factor > 0.0)) throw std::domain_error("Ddf::scaled: factor must be positive");
    if (std::isinf(factor)) return Ddf{};
    std::vector<Knot> out = knots_;
    for (auto& k : out) k.t *= factor;
    return Ddf(std::move(out), mode_);
  }

  /// g(t) = f(t - delta) for delta >= 0 (knots move right).
  Ddf shifted(double delta) const {
    if (!(delta >= 0.0) || std::isinf(delta)) {
      throw std::domain_error("Ddf::shifted: delta must be finite and >= 0");
    }
    if (mode_ == Interpolation::linear && delta > 0.0 && !knots_.empty() && knots_.front().t > 0.0) {
      // Keep the initial segment anchored at (0, 0): insert a flat piece.
      std::vector<Knot> out;
      out.reserve(knots_.size() + 1);
      out.push_back(Knot{delta, 0.0, 0.0});
      for (auto k : knots_) {
        k.t += delta;
        out.push_back(k);
      }
      return Ddf(std::move(out), mode_);
    }
    std::vector<Knot> out = knots_;
    for (auto& k : out) k.t += delta;
    return Ddf(std::move(out), mode_);
  }

  /// Same function in linear representation.
  Ddf as_linear() const {
    if (mode_ == Interpolation::linear) return *this;
    return Ddf(knots_, Interpolation::linear);
  }

  bool operator==(const Ddf&) const = default;

 private:
  // Value on the open piece that ends at `it` (or the tail when it == end).
  double between(std::vector<Knot>::const_iterator it, double t) const {
    const bool has_prev = it != knots_.begin();
    const double prev_t = has_prev ? std::prev(it)->t : 0.0;
    const double prev_v = has_prev ? std::prev(it)->right : 0.0;
    if (it == knots_.end() || mode_ == Interpolation::step) return prev_v;
    const double w = (t - prev_t) / (it->t - prev_t);
    return prev_v + (it->left - prev_v) * w;
  }

  void validate() {
    constexpr double kSlack = 1e-12;
    double prev_t = -1.0;
    double prev_right = 0.0;
    for (auto& k : knots_) {
      if (!std::isfinite(k.t) || k.t < 0.0) {
        throw std::domain_error("Ddf: knot coordinates must be finite and >= 0");
      }
      if (k.t <= prev_t) throw std::domain_error("Ddf: knot coordinates must be strictly ascending");
      if (!(k.left >= 0.0 && k.left <= 1.0 && k.right >= 0.0 && k.right <= 1.0)) {
        throw std::domain_error("Ddf: knot values must lie in [0, 1]");
      }
      if (k.left > k.right) throw std::domain_error("Ddf: left value exceeds right value at a knot");
      if (k.t == 0.0 && k.left != 0.0) throw std::domain_error("Ddf: f(0) must be 0");
      if (mode_ == Interpolation::step) {
        if (std::abs(k.left - prev_right) > kSlack) {
          throw std::domain_error("Ddf: step knot left value must equal the previous right value");
        }
        k.left = prev_right;
      } else if (k.left < prev_right - kSlack) {
        throw std::domain_error("Ddf: function must be nondecreasing");
      } else {
        k.left = std::max(k.left, prev_right);
      }
      prev_t = k.t;
      prev_right = k.right;
    }
  }

  std::vector<Knot> knots_;
  Interpolation mode_ = Interpolation::step;
};

inline Ddf unit_step(double q) { return Ddf::unit_step(q); }

inline double eval(const Ddf& f, double t) { return f.eval(t); }

/// Pointwise maximum; the result is linear if either input is.
inline Ddf pointwise_max(const Ddf& f, const Ddf& g) {
  std::vector<double> ts;
  for (const auto& k : f.knots()) ts.push_back(k.t);
  for (const auto& k : g.knots()) ts.push_back(k.t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  const bool linear = f.interpolation() == Interpolation::linear ||
                      g.interpolation() == Interpolation::linear;
  if (linear) {
    // Add crossing points of the two linear pieces on each interval.
    std::vector<double> extra;
    double p = 0.0;
    for (std::size_t i = 0; i <= ts.size(); ++i) {
      const double q = i < ts.size() ? ts[i] : 0.0;
      if (i == ts.size()) break;
      const double df0 = f.right_limit(p) - g.right_limit(p);
      const double df1 = f.eval(q) - g.eval(q);
      if ((df0 < 0.0 && df1 > 0.0) || (df0 > 0.0 && df1 < 0.0)) {
        extra.push_back(p + (q - p) * df0 / (df0 - df1));
      }
      p = q;
    }
    ts.insert(ts.end(), extra.begin(), extra.end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  }

  std::vector<Knot> knots;
  knots.reserve(ts.size());
  for (double t : ts) {
    knots.push_back(Knot{t, std::max(f.eval(t), g.eval(t)),
                         std::max(f.right_limit(t), g.right_limit(t))});
  }
  return Ddf(std::move(knots), linear ? Interpolation::linear : Interpolation::step);
}

}  // namespace pmstat
