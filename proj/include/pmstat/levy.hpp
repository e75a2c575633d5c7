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

// Modified Levy distance on distance distribution functions.
//
// d_L(f, g) is the infimum of a in (0, 1] such that for all xi in (-1/a, 1/a)
//
//   f(xi - a) - a <= g(xi) <= f(xi + a) + a   and
//   g(xi - a) - a <= f(xi) <= g(xi + a) + a.
//
// Both functions are extended by 0 to negative arguments. For step and
// piecewise-linear functions every composed term is constant or linear
// between the breakpoints {knots, knots +- a, 0, +-a}, so checking each
// breakpoint (value and both one-sided limits) decides feasibility of a.
// Feasibility is monotone in a, which makes bisection valid.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmstat/ddf.hpp"

namespace pmstat {

inline constexpr double kDefaultLevyTol = 1e-9;

struct LevyDistance {
  double value = 0.0;
  double tolerance = 0.0;  // half-width of the final bisection bracket
};

namespace detail {

enum class Side { left, at, right };

inline double sample(const Ddf& f, double x, Side side) {
  switch (side) {
    case Side::left:
      return f.left_limit(x);
    case Side::right:
      return f.right_limit(x);
    case Side::at:
      break;
  }
  return x <= 0.0 ? 0.0 : f.eval(x);
}

// One ordered sandwich: f(xi - a) - a <= g(xi) <= f(xi + a) + a.
inline bool sandwich_holds(const Ddf& f, const Ddf& g, double a, double xi, Side side) {
  constexpr double kSlack = 1e-14;
  const double gv = sample(g, xi, side);
  return sample(f, xi - a, side) - a <= gv + kSlack && gv <= sample(f, xi + a, side) + a + kSlack;
}

inline bool levy_feasible(const Ddf& f, const Ddf& g, double a) {
  const double bound = 1.0 / a;
  std::vector<double> points{0.0, a, -a};
  for (const Ddf* h : {&f, &g}) {
    for (const auto& k : h->knots()) {
      points.push_back(k.t);
      points.push_back(k.t + a);
      points.push_back(k.t - a);
    }
  }
  std::erase_if(points, [bound](double x) { return !(x > -bound && x < bound); });
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  auto holds = [&](double xi, Side side) {
    return sandwich_holds(f, g, a, xi, side) && sandwich_holds(g, f, a, xi, side);
  };

  // Open-interval ends are reached only as one-sided limits.
  if (!holds(-bound, Side::right) || !holds(bound, Side::left)) return false;

  double prev = -bound;
  for (double xi : points) {
    if (!holds(xi, Side::left) || !holds(xi, Side::at) || !holds(xi, Side::right)) return false;
    if (!holds(0.5 * (prev + xi), Side::at)) return false;
    prev = xi;
  }
  return holds(0.5 * (prev + bound), Side::at);
}

}  // namespace detail

/// Bisection estimate of d_L(f, g) with |value - d_L| <= tol.
inline LevyDistance levy_distance(const Ddf& f, const Ddf& g, double tol = kDefaultLevyTol) {
  if (!(tol > 0.0)) throw std::domain_error("levy_distance: tol must be positive");
  double lo = 0.0;
  double hi = 1.0;  // a = 1 is always feasible for [0,1]-valued functions
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (detail::levy_feasible(f, g, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return LevyDistance{0.5 * (lo + hi), 0.5 * (hi - lo)};
}

/// inf{t > 0 : f(t) > 1 - t}, computed piece by piece in closed form.
/// This is d_L(f, eps_0).
inline double distance_to_eps0(const Ddf& f) {
  double p = 0.0;
  double rp = 0.0;
  const auto knots = f.knots();
  for (const auto& k : knots) {
    if (k.t > p) {
      // Piece (p, k.t]: constant rp (step) or linear rp -> k.left.
      double root = 1.0 - rp;
      if (f.interpolation() == Interpolation::linear) {
        const double slope = (k.left - rp) / (k.t - p);
        root = (1.0 - rp + slope * p) / (1.0 + slope);
      }
      const double inf = std::max(p, root);
      if (inf < k.t) return std::clamp(inf, 0.0, 1.0);
    }
    p = k.t;
    rp = k.right;
  }
  return std::clamp(std::max(p, 1.0 - rp), 0.0, 1.0);
}

}  // namespace pmstat
