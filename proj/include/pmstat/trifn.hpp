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

// t-norms and the sup-convolution triangle functions they induce:
//
//   tau_T(f, g)(x) = sup_{u + v = x} T(f(u), g(v)).
//
// For step inputs the result is computed exactly: if f takes the value c_i on
// (t_i, t_{i+1}] and g takes d_j on (s_j, s_{j+1}], then
//
//   tau_T(f, g)(x) = max { T(c_i, d_j) : t_i + s_j < x },
//
// a step function with jumps only at the pairwise knot sums. Inputs with
// linear pieces are sampled on a uniform grid of `grid_resolution` points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmstat/ddf.hpp"
#include "pmstat/levy.hpp"

namespace pmstat {

enum class TNorm { minimum, product, lukasiewicz };

inline double apply_tnorm(TNorm norm, double a, double b) {
  // 1 is the unit of every t-norm; keep that exact under rounding.
  if (a == 1.0) return b;
  if (b == 1.0) return a;
  switch (norm) {
    case TNorm::minimum:
      return std::min(a, b);
    case TNorm::product:
      return a * b;
    case TNorm::lukasiewicz:
      return std::max(a + b - 1.0, 0.0);
  }
  return 0.0;
}

inline std::string to_string(TNorm norm) {
  switch (norm) {
    case TNorm::minimum:
      return "min";
    case TNorm::product:
      return "product";
    case TNorm::lukasiewicz:
      return "lukasiewicz";
  }
  return "?";
}

inline TNorm parse_tnorm(const std::string& name) {
  if (name == "min") return TNorm::minimum;
  if (name == "product") return TNorm::product;
  if (name == "lukasiewicz") return TNorm::lukasiewicz;
  throw std::invalid_argument("unknown triangle function '" + name +
                              "' (expected min | product | lukasiewicz)");
}

inline constexpr std::size_t kDefaultGridResolution = 512;

namespace detail {

struct StepPiece {
  double start;  // piece is (start, next start]
  double value;
};

inline std::vector<StepPiece> step_pieces(const Ddf& f) {
  std::vector<StepPiece> pieces{{0.0, f.right_limit(0.0)}};
  for (const auto& k : f.knots()) {
    if (k.t == 0.0) continue;
    pieces.push_back({k.t, k.right});
  }
  return pieces;
}

inline Ddf step_convolution(TNorm norm, const Ddf& f, const Ddf& g) {
  const auto fp = step_pieces(f);
  const auto gp = step_pieces(g);
  std::vector<std::pair<double, double>> sums;
  sums.reserve(fp.size() * gp.size());
  for (const auto& a : fp) {
    for (const auto& b : gp) sums.emplace_back(a.start + b.start, apply_tnorm(norm, a.value, b.value));
  }
  std::sort(sums.begin(), sums.end());

  std::vector<Knot> knots;
  double running = 0.0;
  for (std::size_t i = 0; i < sums.size();) {
    const double at = sums[i].first;
    double next = running;
    for (; i < sums.size() && sums[i].first == at; ++i) next = std::max(next, sums[i].second);
    if (next > running) {
      knots.push_back(Knot{at, running, next});
      running = next;
    }
  }
  return Ddf(std::move(knots));
}

// sup over u in (0, x) of T(f(u), g(x - u)) for general (linear) inputs.
inline double sampled_sup(TNorm norm, const Ddf& f, const Ddf& g, double x, std::size_t samples) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  auto phi = [&](double fu, double gv) { return apply_tnorm(norm, fu, gv); };
  double best = std::max(phi(f.right_limit(0.0), g.eval(x)), phi(f.eval(x), g.right_limit(0.0)));

  if (norm == TNorm::minimum) {
    // min(increasing, decreasing) peaks where the two cross.
    double lo = 0.0;
    double hi = x;
    for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, x); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f.eval(mid) < g.eval(x - mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    best = std::max(best, phi(f.right_limit(lo), g.eval(x - lo)));
    best = std::max(best, phi(f.eval(hi), g.right_limit(x - hi)));
  } else {
    for (std::size_t i = 1; i < samples; ++i) {
      const double u = x * static_cast<double>(i) / static_cast<double>(samples);
      best = std::max(best, phi(f.eval(u), g.eval(x - u)));
    }
  }
  for (const auto& k : f.knots()) {
    if (k.t > 0.0 && k.t < x) best = std::max(best, phi(k.right, g.eval(x - k.t)));
  }
  for (const auto& k : g.knots()) {
    if (k.t > 0.0 && k.t < x) best = std::max(best, phi(f.eval(x - k.t), k.right));
  }
  return std::min(best, 1.0);
}

}  // namespace detail

/// Binary operation on D+. Built-ins are sup-convolutions of a t-norm; a
/// custom operation is any callable, used mainly to exercise the axiom checker.
class TriangleFunction {
 public:
  using Operation = std::function<Ddf(const Ddf&, const Ddf&)>;

  explicit TriangleFunction(TNorm norm = TNorm::minimum,
                            std::size_t grid_resolution = kDefaultGridResolution)
      : norm_(norm), name_(pmstat::to_string(norm)), grid_resolution_(grid_resolution) {
    check_resolution();
  }

  static TriangleFunction custom(std::string name, Operation op,
                                 std::size_t grid_resolution = kDefaultGridResolution) {
    TriangleFunction tau(TNorm::minimum, grid_resolution);
    tau.name_ = std::move(name);
    tau.custom_ = std::move(op);
    return tau;
  }

  Ddf operator()(const Ddf& f, const Ddf& g) const { return apply(f, g); }

  Ddf apply(const Ddf& f, const Ddf& g) const {
    if (custom_) return custom_(f, g);
    if (f.interpolation() == Interpolation::step && g.interpolation() == Interpolation::step) {
      return detail::step_convolution(norm_, f, g);
    }
    return sampled_apply(f, g);
  }

  /// tau(f, g)(x) without building the whole result when avoidable.
  double at(const Ddf& f, const Ddf& g, double x) const {
    if (custom_ || (f.interpolation() == Interpolation::step &&
                    g.interpolation() == Interpolation::step)) {
      return apply(f, g).eval(x);
    }
    return detail::sampled_sup(norm_, f, g, x, grid_resolution_);
  }

  /// Uniform sample grid over [0, t_max] where t_max covers the knot sums.
  std::vector<double> sample_grid(const Ddf& f, const Ddf& g) const {
    const double t_max = std::max(1.0, 1.25 * (f.last_knot() + g.last_knot()));
    std::vector<double> grid(grid_resolution_);
    for (std::size_t i = 0; i < grid_resolution_; ++i) {
      grid[i] = t_max * static_cast<double>(i) / static_cast<double>(grid_resolution_ - 1);
    }
    return grid;
  }

  bool is_custom() const { return static_cast<bool>(custom_); }
  TNorm norm() const { return norm_; }
  const std::string& name() const { return name_; }
  std::size_t grid_resolution() const { return grid_resolution_; }

 private:
  void check_resolution() const {
    if (grid_resolution_ < 16) throw std::domain_error("TriangleFunction: grid_resolution must be >= 16");
  }

  Ddf sampled_apply(const Ddf& f, const Ddf& g) const {
    const auto grid = sample_grid(f, g);
    std::vector<Knot> knots;
    knots.reserve(grid.size());
    double running = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      running = std::max(running, detail::sampled_sup(norm_, f, g, grid[i], grid_resolution_));
      knots.push_back(Knot{grid[i], running, running});
    }
    const double tail = apply_tnorm(norm_, f.tail_value(), g.tail_value());
    if (!knots.empty()) knots.back().right = std::max(knots.back().left, tail);
    return Ddf(std::move(knots), Interpolation::linear);
  }

  TNorm norm_;
  std::string name_;
  std::size_t grid_resolution_;
  Operation custom_;
};

struct AxiomCheck {
  AxiomCheck() = default;
  explicit AxiomCheck(std::string n) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  double max_violation = 0.0;
  std::string witness;
};

struct AxiomReport {
  std::string subject;
  std::vector<AxiomCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
  }

  const AxiomCheck& check(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return c;
    }
    throw std::out_of_range("no axiom check named " + name);
  }
};

namespace detail {

inline constexpr double kLocationSlack = 1e-12;

inline double nudge_up(double x) { return x + kLocationSlack * std::max(1.0, std::abs(x)); }
inline double nudge_down(double x) { return x - kLocationSlack * std::max(1.0, std::abs(x)); }

// Points at which two functions are compared: all knots plus a uniform grid.
inline std::vector<double> comparison_points(const Ddf& a, const Ddf& b, std::size_t resolution) {
  std::vector<double> xs;
  for (const Ddf* h : {&a, &b}) {
    for (const auto& k : h->knots()) xs.push_back(k.t);
  }
  const double t_max = std::max(1.0, 1.25 * std::max(a.last_knot(), b.last_knot()));
  for (std::size_t i = 0; i < resolution; ++i) {
    xs.push_back(t_max * static_cast<double>(i) / static_cast<double>(resolution - 1));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// Largest amount by which `lower` exceeds `upper` (<= 0 when lower <= upper
// everywhere), allowing a 1e-12 relative slack in jump locations.
inline double dominance_violation(const Ddf& lower, const Ddf& upper, std::size_t resolution) {
  double worst = 0.0;
  for (double x : comparison_points(lower, upper, resolution)) {
    worst = std::max(worst, lower.eval(nudge_down(x)) - upper.eval(nudge_up(x)));
    worst = std::max(worst, lower.right_limit(x) - upper.right_limit(nudge_up(x)));
  }
  return worst;
}

inline double max_deviation(const Ddf& a, const Ddf& b, std::size_t resolution) {
  return std::max(dominance_violation(a, b, resolution), dominance_violation(b, a, resolution));
}

inline void record(AxiomCheck& check, double violation, double tol, const std::string& witness) {
  if (violation > check.max_violation) {
    check.max_violation = violation;
    if (violation > tol) check.witness = witness;
  }
  if (violation > tol) check.passed = false;
}

}  // namespace detail

/// Checks the triangle-function axioms pointwise on each comparison grid:
/// associativity, commutativity, monotonicity in each place and eps_0 identity.
inline AxiomReport check_axioms(const TriangleFunction& tau, const std::vector<Ddf>& samples,
                                double tol) {
  if (samples.size() < 3) throw std::invalid_argument("check_axioms: need at least 3 samples");
  if (!(tol > 0.0)) throw std::domain_error("check_axioms: tol must be positive");
  const std::size_t res = tau.grid_resolution();
  const Ddf eps0 = Ddf::unit_step(0.0);

  AxiomCheck assoc{"associativity"};
  AxiomCheck comm{"commutativity"};
  AxiomCheck mono{"monotonicity"};
  AxiomCheck ident{"identity"};

  auto tag = [](std::initializer_list<std::size_t> idx) {
    std::ostringstream os;
    os << "samples(";
    bool first = true;
    for (auto i : idx) {
      os << (first ? "" : ",") << i;
      first = false;
    }
    os << ")";
    return os.str();
  };

  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = samples[i];
    detail::record(ident, detail::max_deviation(tau(eps0, f), f, res), tol, tag({i}));
    detail::record(ident, detail::max_deviation(tau(f, eps0), f, res), tol, tag({i}));
    for (std::size_t j = 0; j < n; ++j) {
      const auto& g = samples[j];
      const Ddf fg = tau(f, g);
      if (i < j) detail::record(comm, detail::max_deviation(fg, tau(g, f), res), tol, tag({i, j}));

      // f <= max(f, h) pointwise, so tau must not decrease in either place.
      const Ddf bigger = pointwise_max(f, samples[(i + j + 1) % n]);
      detail::record(mono, detail::dominance_violation(fg, tau(bigger, g), res), tol, tag({i, j}));
      detail::record(mono, detail::dominance_violation(tau(g, f), tau(g, bigger), res), tol,
                     tag({j, i}));
    }
  }

  const std::size_t m = std::min<std::size_t>(n, 6);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        const Ddf lhs = tau(tau(samples[i], samples[j]), samples[k]);
        const Ddf rhs = tau(samples[i], tau(samples[j], samples[k]));
        detail::record(assoc, detail::max_deviation(lhs, rhs, res), tol, tag({i, j, k}));
      }
    }
  }

  return AxiomReport{"triangle function " + tau.name(), {assoc, comm, mono, ident}};
}

/// Empirical modulus of continuity: d_L(tau(f, g), tau(f shifted by delta, g)).
inline double continuity_modulus(const TriangleFunction& tau, const Ddf& f, const Ddf& g,
                                  double delta) {
  return levy_distance(tau(f, g), tau(f.shifted(delta), g)).value;
}

}  // namespace pmstat
