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

// Probabilistic metric spaces (X, F, tau) over an arbitrary point type, the
// P-1..P-4 axiom checker, strong neighborhoods and strong vicinities.
//
// The strong vicinity family is written both V(u) and U(t) in the literature;
// here they are the same object: {(p, q) : F_pq(u) > 1 - u}.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmstat/ddf.hpp"
#include "pmstat/levy.hpp"
#include "pmstat/trifn.hpp"

namespace pmstat {

template <class P>
concept PointType = std::copyable<P> && std::equality_comparable<P>;

template <class P>
concept Printable = requires(std::ostream& os, const P& p) { os << p; };

template <PointType Point>
std::string describe_point(const Point& p, std::size_t index) {
  if constexpr (Printable<Point>) {
    std::ostringstream os;
    os << p;
    return os.str();
  } else {
    return "#" + std::to_string(index);
  }
}

template <PointType Point>
class ProbabilisticMetricSpace {
 public:
  using point_type = Point;
  using Distribution = std::function<Ddf(const Point&, const Point&)>;

  ProbabilisticMetricSpace(std::string name, Distribution distribution, TriangleFunction tau)
      : name_(std::move(name)), distribution_(std::move(distribution)), tau_(std::move(tau)) {
    if (!distribution_) throw std::invalid_argument("ProbabilisticMetricSpace: empty distribution");
  }

  /// F_ab.
  Ddf distribution(const Point& a, const Point& b) const { return distribution_(a, b); }

  /// d_L(F_ab, eps_0), the radius that decides strong-neighborhood membership.
  double strong_distance(const Point& a, const Point& b) const {
    return distance_to_eps0(distribution_(a, b));
  }

  const TriangleFunction& tau() const { return tau_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Distribution distribution_;
  TriangleFunction tau_;
};

/// F(a, b) = eps_{d(a, b)}.
template <PointType Point, class Metric>
ProbabilisticMetricSpace<Point> metric_induced_space(Metric metric, TriangleFunction tau,
                                                     std::string name = "metric-induced") {
  return ProbabilisticMetricSpace<Point>(
      std::move(name),
      [metric = std::move(metric)](const Point& a, const Point& b) {
        return Ddf::unit_step(static_cast<double>(metric(a, b)));
      },
      std::move(tau));
}

/// Throws std::domain_error unless G is strictly increasing wherever it is
/// below 1 and reaches 1 at a finite argument.
inline void require_simple_generator(const Ddf& G) {
  if (G.tail_value() < 1.0) {
    throw std::domain_error("simple_space: G must reach 1 at a finite argument");
  }
  double p = 0.0;
  double rp = G.right_limit(0.0);
  for (const auto& k : G.knots()) {
    if (k.t > p && rp < 1.0) {
      const bool rises = G.interpolation() == Interpolation::linear && k.left > rp;
      if (!rises) throw std::domain_error("simple_space: G must be strictly increasing where G < 1");
    }
    p = k.t;
    rp = k.right;
  }
}

/// F(a, b)(t) = G(t / d(a, b)) for a != b and F(a, a) = eps_0.
template <PointType Point, class Metric>
ProbabilisticMetricSpace<Point> simple_space(Metric metric, Ddf G, TriangleFunction tau,
                                             std::string name = "simple") {
  require_simple_generator(G);
  return ProbabilisticMetricSpace<Point>(
      std::move(name),
      [metric = std::move(metric), G = std::move(G)](const Point& a, const Point& b) {
        const double d = static_cast<double>(metric(a, b));
        if (a == b || d == 0.0) return Ddf::unit_step(0.0);
        return G.scaled(d);
      },
      std::move(tau));
}

struct PMAxiomReport {
  AxiomCheck p1{"P-1 F(a,a) = eps_0"};
  AxiomCheck p2{"P-2 F(a,b) != eps_0 for a != b"};
  AxiomCheck p3{"P-3 F(a,b) = F(b,a)"};
  AxiomCheck p4{"P-4 F(a,c) >= tau(F(a,b), F(b,c))"};
  std::string tau_name;

  bool all_passed() const { return p1.passed && p2.passed && p3.passed && p4.passed; }
};

/// Exhaustive P-1..P-4 check over all pairs and ordered triples of `points`.
template <PointType Point>
PMAxiomReport verify_axioms(const ProbabilisticMetricSpace<Point>& space,
                            const std::vector<Point>& points, double tol = kDefaultLevyTol) {
  if (points.size() < 2) throw std::invalid_argument("verify_axioms: need at least 2 points");
  if (!(tol > 0.0)) throw std::domain_error("verify_axioms: tol must be positive");

  PMAxiomReport report;
  report.tau_name = space.tau().name();
  const std::size_t n = points.size();

  auto name = [&](std::size_t i) { return describe_point(points[i], i); };
  auto pair_name = [&](std::size_t i, std::size_t j) { return "(" + name(i) + ", " + name(j) + ")"; };

  std::vector<std::vector<Ddf>> F(n, std::vector<Ddf>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) F[i][j] = space.distribution(points[i], points[j]);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double d = distance_to_eps0(F[i][i]);
    detail::record(report.p1, d, tol, pair_name(i, i));
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(points[i] == points[j])) {
        // A violation is measured as how far below the threshold d_L falls.
        const double d = distance_to_eps0(F[i][j]);
        if (d <= tol) {
          report.p2.passed = false;
          report.p2.max_violation = std::max(report.p2.max_violation, tol - d);
          if (report.p2.witness.empty()) report.p2.witness = pair_name(i, j);
        }
      }
      const double asym = F[i][j] == F[j][i] ? 0.0 : levy_distance(F[i][j], F[j][i], 0.5 * tol).value;
      detail::record(report.p3, asym, tol, pair_name(i, j));
    }
  }

  const std::size_t check_res = std::min<std::size_t>(64, space.tau().grid_resolution());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        const Ddf combined = space.tau()(F[a][b], F[b][c]);
        const double v = detail::dominance_violation(combined, F[a][c], check_res);
        detail::record(report.p4, v, tol, "(" + name(a) + ", " + name(b) + ", " + name(c) + ")");
      }
    }
  }
  return report;
}

/// eta in N_xi(t), i.e. F_{xi eta}(t) > 1 - t. Cross-checked against the
/// equivalent test d_L(F_{xi eta}, eps_0) < t away from ties.
template <PointType Point>
bool in_strong_neighborhood(const ProbabilisticMetricSpace<Point>& space, const Point& xi, double t,
                            const Point& eta) {
  if (!(t > 0.0)) throw std::domain_error("in_strong_neighborhood: t must be positive");
  const Ddf F = space.distribution(xi, eta);
  const bool direct = F.eval(t) > 1.0 - t;
  const double radius = distance_to_eps0(F);
  if (std::abs(radius - t) > 1e-12 && (radius < t) != direct) {
    throw std::logic_error("in_strong_neighborhood: F(t) > 1 - t disagrees with d_L(F, eps_0) < t");
  }
  return direct;
}

/// (p, q) in V(u).
template <PointType Point>
bool in_vicinity(const ProbabilisticMetricSpace<Point>& space, const Point& p, const Point& q,
                 double u) {
  return in_strong_neighborhood(space, p, u, q);
}

struct VicinityResult {
  double alpha = 0.0;
  bool found = false;
  int halvings = 0;  // alpha = u / 2^halvings
};

/// Largest alpha in {u/2, u/4, ..., u/2^20} such that on `points`
/// d_L(F_pq, eps_0) < alpha and d_L(F_qr, eps_0) < alpha imply d_L(F_pr, eps_0) < u.
/// When no candidate works, found = false and alpha is the smallest one tried.
template <PointType Point>
VicinityResult find_vicinity_alpha(const ProbabilisticMetricSpace<Point>& space, double u,
                                   const std::vector<Point>& points, int max_halvings = 20) {
  if (!(u > 0.0)) throw std::domain_error("find_vicinity_alpha: u must be positive");
  const std::size_t n = points.size();
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = space.strong_distance(points[i], points[j]);
  }

  VicinityResult result;
  double alpha = u;
  for (int h = 1; h <= max_halvings; ++h) {
    alpha *= 0.5;
    result.alpha = alpha;
    result.halvings = h;
    bool ok = true;
    for (std::size_t p = 0; p < n && ok; ++p) {
      for (std::size_t q = 0; q < n && ok; ++q) {
        if (!(d[p * n + q] < alpha)) continue;
        for (std::size_t r = 0; r < n; ++r) {
          if (d[q * n + r] < alpha && !(d[p * n + r] < u)) {
            ok = false;
            break;
          }
        }
      }
    }
    if (ok) {
      result.found = true;
      return result;
    }
  }
  return result;
}

/// c is adherent to `set` at every radius of `t_grid`: a finite-grid
/// stand-in for membership in the strong closure k(set).
template <PointType Point>
bool adherent(const ProbabilisticMetricSpace<Point>& space, const Point& c,
              const std::vector<Point>& set, const std::vector<double>& t_grid) {
  for (double t : t_grid) {
    const bool hit = std::any_of(set.begin(), set.end(), [&](const Point& e) {
      return in_strong_neighborhood(space, c, t, e);
    });
    if (!hit) return false;
  }
  return true;
}

}  // namespace pmstat
