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

// Strong A-statistical diagnostics for sequences in a PM space.
//
// "d(p, q)" below is the strong distance d_L(F_pq, eps_0); x_k lies in the
// strong neighborhood N_p(t) exactly when d(p, x_k) < t. Sequences are
// materialized once into their distinct values so that every distance is
// computed per value, not per index.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pmstat/density.hpp"
#include "pmstat/index_set.hpp"
#include "pmstat/levy.hpp"
#include "pmstat/matrix.hpp"
#include "pmstat/pmspace.hpp"
#include "pmstat/verdict.hpp"

namespace pmstat {

template <class P>
concept Hashable = requires(const P& p) {
  { std::hash<P>{}(p) } -> std::convertible_to<std::size_t>;
};

inline const std::vector<double>& default_t_grid() {
  static const std::vector<double> grid{0.5, 0.2, 0.1, 0.05, 0.02};
  return grid;
}

inline void require_t_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + ": grid must be nonempty");
  for (double t : grid) {
    if (!(t > 0.0)) throw std::invalid_argument(std::string(what) + ": grid values must be positive");
  }
}

/// Depth of the 1/t schedule needed to reach the finest radius of a grid.
inline std::size_t required_depth(const std::vector<double>& grid) {
  const double finest = *std::min_element(grid.begin(), grid.end());
  return static_cast<std::size_t>(std::ceil(1.0 / finest - 1e-9));
}

template <PointType Point>
struct SequenceSpec {
  ProbabilisticMetricSpace<Point> space;
  std::function<Point(std::size_t)> generator;  // k -> x_k, k = 1..length
  std::size_t length = 0;
  std::string label;

  Point at(std::size_t k) const { return generator(k); }
};

/// x_k = values[index[k]] for k = 1..N; values in order of first occurrence.
template <PointType Point>
struct Materialized {
  std::vector<Point> values;
  std::vector<std::uint32_t> index;  // index[0] unused
  std::vector<std::size_t> counts;

  std::size_t length() const { return index.empty() ? 0 : index.size() - 1; }
  std::size_t distinct() const { return values.size(); }
  const Point& operator[](std::size_t k) const { return values[index[k]]; }

  /// First index carrying each distinct value.
  std::vector<std::size_t> first_occurrence() const {
    std::vector<std::size_t> first(values.size(), 0);
    for (std::size_t k = length(); k >= 1; --k) first[index[k]] = k;
    return first;
  }
};

template <PointType Point>
Materialized<Point> materialize(const std::function<Point(std::size_t)>& gen, std::size_t N) {
  Materialized<Point> m;
  m.index.assign(N + 1, 0);
  auto push = [&m](const Point& p) {
    m.values.push_back(p);
    m.counts.push_back(0);
    return static_cast<std::uint32_t>(m.values.size() - 1);
  };
  if constexpr (Hashable<Point>) {
    std::unordered_map<Point, std::uint32_t> seen;
    for (std::size_t k = 1; k <= N; ++k) {
      Point p = gen(k);
      auto it = seen.find(p);
      const std::uint32_t v = it != seen.end() ? it->second : seen.emplace(p, push(p)).first->second;
      m.index[k] = v;
      ++m.counts[v];
    }
  } else {
    std::uint32_t last = 0;
    for (std::size_t k = 1; k <= N; ++k) {
      Point p = gen(k);
      std::uint32_t v;
      if (!m.values.empty() && m.values[last] == p) {
        v = last;
      } else {
        auto it = std::find(m.values.begin(), m.values.end(), p);
        v = it != m.values.end() ? static_cast<std::uint32_t>(it - m.values.begin()) : push(p);
      }
      m.index[k] = v;
      ++m.counts[v];
      last = v;
    }
  }
  return m;
}

inline IndexMask mask_from_values(const std::vector<std::uint32_t>& index, const std::vector<std::uint8_t>& flags) {
  IndexMask mask(index.size(), 0);
  for (std::size_t k = 1; k < index.size(); ++k) mask[k] = flags[index[k]];
  return mask;
}

inline std::size_t count_members(const std::vector<std::size_t>& counts, const std::vector<std::uint8_t>& flags) {
  std::size_t c = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    if (flags[v]) c += counts[v];
  }
  return c;
}

/// A density-zero expectation turned into a verdict.
inline Verdict zero_verdict(const DensityEstimate& e) {
  switch (e.cls) {
    case DensityClass::estimated_zero: return Verdict::pass;
    case DensityClass::estimated_positive: return Verdict::fail;
    case DensityClass::indeterminate: return Verdict::indeterminate;
  }
  return Verdict::indeterminate;
}

/// pass if all pass, fail if any fails, otherwise indeterminate.
inline Verdict combine(const std::vector<Verdict>& vs) {
  if (std::any_of(vs.begin(), vs.end(), [](Verdict v) { return v == Verdict::fail; })) return Verdict::fail;
  if (std::all_of(vs.begin(), vs.end(), [](Verdict v) { return v == Verdict::pass; })) return Verdict::pass;
  return Verdict::indeterminate;
}

/// Strong convergence at truncation: for every t of the grid, no index in
/// (N/2, N] (restricted to `subset` when given) has distance >= t.
struct TailCheck {
  bool passed = true;
  std::size_t witness = 0;
  double t = 0.0;
  double distance = 0.0;
};

inline TailCheck strong_tail_check(const std::vector<double>& dist, const std::vector<double>& t_grid,
                                   const IndexMask* subset = nullptr) {
  TailCheck check;
  const std::size_t N = dist.size() - 1;
  const double finest = *std::min_element(t_grid.begin(), t_grid.end());
  for (std::size_t k = N / 2 + 1; k <= N; ++k) {
    if (subset && !(*subset)[k]) continue;
    if (dist[k] >= finest) {
      check.passed = false;
      check.witness = k;
      check.distance = dist[k];
      // Report the coarsest radius that is violated.
      for (double t : t_grid) {
        if (dist[k] >= t) check.t = std::max(check.t, t);
      }
      return check;
    }
  }
  return check;
}

template <PointType Point>
struct ConvergenceReport {
  Point candidate;
  std::vector<double> t_grid;
  std::vector<DensityEstimate> exceptions;  // E_t = {k : d(x_k, L) >= t}, one per t
  Verdict verdict = Verdict::indeterminate;
};

struct CauchyGammaResult {
  double gamma = 0.0;
  Verdict verdict = Verdict::indeterminate;
  std::size_t anchor = 0;  // k_0 that worked (0 if none)
  DensityEstimate estimate;  // of the far set for the reported anchor
  std::size_t anchors_tried = 0;
  double nested_bad_fraction = 0.0;  // share of sampled j with delta(D_j) not estimated-zero
};

struct CauchyReport {
  std::vector<CauchyGammaResult> per_gamma;
  std::vector<std::size_t> j_grid;
  Verdict verdict = Verdict::indeterminate;
};

struct TruncationError : std::runtime_error {
  TruncationError(std::size_t deepest, std::size_t required)
      : std::runtime_error("truncation too small: thresholds reached t = " + std::to_string(deepest) +
                           ", need t = " + std::to_string(required)),
        deepest_t(deepest),
        required_t(required) {}
  std::size_t deepest_t;
  std::size_t required_t;
};

struct ExtractionResult {
  IndexMask mask;                       // G up to N
  std::vector<std::size_t> thresholds;  // u_1 < u_2 < ... < u_T
  std::size_t required_t = 0;
  DensityEstimate density;
  TailCheck tail;
  Verdict verdict = Verdict::indeterminate;

  std::size_t deepest_t() const { return thresholds.size(); }
  IndexSet set(std::string name = "G") const { return IndexSet::from_mask(mask, std::move(name)); }
};

struct SpliceReport {
  DensityEstimate difference;  // {k : x_k != g_k}
  TailCheck tail;              // g strongly convergent to L at truncation
  Verdict verdict = Verdict::indeterminate;
};

template <PointType Point>
struct ClusterReport {
  std::vector<Point> candidates;
  std::vector<double> t_grid;
  double nonthin_floor = 0.0;
  std::size_t limit_depth = 0;  // 1/t schedule depth used for limit points
  std::vector<std::size_t> gamma;     // cluster points (indices into candidates)
  std::vector<std::size_t> lambda;    // limit points, heuristic
  std::vector<std::size_t> ordinary;  // ordinary limit points at truncation
  bool containment_ok = true;         // lambda within gamma within ordinary
  std::string note;

  std::vector<Point> points(const std::vector<std::size_t>& which) const {
    std::vector<Point> out;
    for (auto i : which) out.push_back(candidates[i]);
    return out;
  }
};

struct BoundednessReport {
  Verdict verdict = Verdict::indeterminate;
  DensityEstimate escape;  // {k : x_k not in C}
};

struct CauchyStructureReport {
  double t = 0.0;
  double alpha = 0.0;
  bool alpha_found = false;
  std::size_t anchor = 0;
  DensityEstimate p_density;  // P_t = {k : d(x_k, x_anchor) >= alpha}
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  Verdict verdict = Verdict::indeterminate;
};

namespace detail {

/// Shared Def-style Cauchy search over a materialized sequence with a
/// value-level distance. Anchors k_0 are the first 8 indices plus a
/// geometric set, one per distinct value.
template <class Dist>
CauchyReport cauchy_core(const DensityEngine& engine, const DensityOptions& opt,
                         const std::vector<std::uint32_t>& index, std::size_t distinct, Dist&& dist,
                         const std::vector<double>& gamma_grid, std::size_t j_samples) {
  require_t_grid(gamma_grid, "is_stat_cauchy");
  const std::size_t N = index.size() - 1;
  std::map<std::size_t, std::vector<double>> rows;  // value -> distances to every value
  auto row = [&](std::size_t v) -> const std::vector<double>& {
    auto it = rows.find(v);
    if (it == rows.end()) {
      std::vector<double> r(distinct);
      for (std::size_t w = 0; w < distinct; ++w) r[w] = dist(w, v);
      it = rows.emplace(v, std::move(r)).first;
    }
    return it->second;
  };
  std::map<std::pair<std::size_t, double>, DensityEstimate> cache;
  auto far_density = [&](std::size_t v, double gamma) -> const DensityEstimate& {
    auto key = std::make_pair(v, gamma);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const auto& r = row(v);
      std::vector<std::uint8_t> flags(distinct);
      for (std::size_t w = 0; w < distinct; ++w) flags[w] = r[w] >= gamma;
      it = cache.emplace(key, density(engine, mask_from_values(index, flags), opt)).first;
    }
    return it->second;
  };

  std::vector<std::size_t> anchors;
  {
    std::vector<std::size_t> raw;
    for (std::size_t k = 1; k <= std::min<std::size_t>(8, N); ++k) raw.push_back(k);
    for (double x = static_cast<double>(N); x >= 1.0; x /= 1.25) raw.push_back(static_cast<std::size_t>(std::ceil(x - 1e-9)));
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    std::vector<std::uint8_t> seen(distinct, 0);
    for (auto k : raw) {
      if (!seen[index[k]]) {
        seen[index[k]] = 1;
        anchors.push_back(k);
      }
    }
  }

  CauchyReport rep;
  const std::size_t J = std::max<std::size_t>(1, std::min(j_samples, N));
  for (std::size_t i = 1; i <= J; ++i) rep.j_grid.push_back(std::max<std::size_t>(1, (i * N) / J));

  std::vector<Verdict> verdicts;
  for (double gamma : gamma_grid) {
    CauchyGammaResult g;
    g.gamma = gamma;
    bool all_positive = true;
    for (auto k0 : anchors) {
      ++g.anchors_tried;
      const auto& est = far_density(index[k0], gamma);
      if (est.cls == DensityClass::estimated_zero) {
        g.verdict = Verdict::pass;
        g.anchor = k0;
        g.estimate = est;
        break;
      }
      if (est.cls != DensityClass::estimated_positive) all_positive = false;
      if (g.anchor == 0) g.estimate = est;
    }
    if (g.verdict != Verdict::pass) g.verdict = all_positive ? Verdict::fail : Verdict::indeterminate;

    std::size_t bad = 0;
    for (auto j : rep.j_grid) {
      if (far_density(index[j], gamma).cls != DensityClass::estimated_zero) ++bad;
    }
    g.nested_bad_fraction = static_cast<double>(bad) / static_cast<double>(rep.j_grid.size());
    verdicts.push_back(g.verdict);
    rep.per_gamma.push_back(std::move(g));
  }
  rep.verdict = combine(verdicts);
  return rep;
}

/// Builds sum_t ([u_t, u_{t+1}] intersect S_t) with S_1 over [1, u_1];
/// member(k, t) tests k in S_t.
template <class Member>
IndexMask splice_levels(std::size_t N, const std::vector<std::size_t>& u, Member&& member) {
  IndexMask mask(N + 1, 0);
  std::size_t t = 1;  // k in [u_t, u_{t+1}] (or beyond u_T)
  for (std::size_t k = 1; k <= N; ++k) {
    if (u.empty()) break;
    if (k <= u[0]) {
      mask[k] = 1;
      continue;
    }
    while (t < u.size() && u[t] < k) ++t;
    mask[k] = member(k, t);
  }
  return mask;
}

/// Smallest probe position from which every later probe satisfies `ok`;
/// nullopt when the last probe fails.
template <class Pred>
std::optional<std::size_t> settled_from(const std::vector<double>& sums, Pred&& ok) {
  if (sums.empty() || !ok(sums.back())) return std::nullopt;
  std::size_t i = sums.size() - 1;
  while (i > 0 && ok(sums[i - 1])) --i;
  return i;
}

}  // namespace detail

template <PointType Point>
class SequenceDiagnostics {
 public:
  SequenceDiagnostics(SequenceSpec<Point> x, const SummabilityMatrix& A, const DensityOptions& opt = {})
      : x_(std::move(x)), opt_(opt), engine_(A, x_.length, opt), seq_(materialize<Point>(x_.generator, x_.length)) {
    if (x_.length < opt_.window) throw std::invalid_argument("sequence shorter than the density window");
  }

  const SequenceSpec<Point>& sequence() const { return x_; }
  const Materialized<Point>& values() const { return seq_; }
  const DensityEngine& engine() const { return engine_; }
  const DensityOptions& options() const { return opt_; }
  std::size_t truncation() const { return x_.length; }

  /// d(x_k, L) per distinct value.
  std::vector<double> value_distances(const Point& L) const {
    std::vector<double> d(seq_.distinct());
    for (std::size_t v = 0; v < d.size(); ++v) d[v] = x_.space.strong_distance(seq_.values[v], L);
    return d;
  }

  /// d(x_k, L) per index, k = 1..N.
  std::vector<double> distances(const Point& L) const { return spread(value_distances(L)); }

  DensityEstimate density_of(const IndexMask& mask) const { return density(engine_, mask, opt_); }

  ConvergenceReport<Point> converges_to(const Point& L, const std::vector<double>& t_grid = default_t_grid()) const {
    require_t_grid(t_grid, "stat_converges_to");
    ConvergenceReport<Point> rep{L, t_grid, {}, Verdict::indeterminate};
    const auto dv = value_distances(L);
    std::vector<Verdict> vs;
    for (double t : t_grid) {
      rep.exceptions.push_back(density_of(mask_where(dv, [t](double d) { return d >= t; })));
      vs.push_back(zero_verdict(rep.exceptions.back()));
    }
    rep.verdict = combine(vs);
    return rep;
  }

  CauchyReport cauchy(const std::vector<double>& gamma_grid = default_t_grid(), std::size_t j_samples = 64) const {
    auto dist = [this](std::size_t w, std::size_t v) {
      return x_.space.strong_distance(seq_.values[w], seq_.values[v]);
    };
    return detail::cauchy_core(engine_, opt_, seq_.index, seq_.distinct(), dist, gamma_grid, j_samples);
  }

  /// The nested construction of a density-one G along which x converges
  /// strongly to L. Throws TruncationError when the 1/t thresholds cannot be
  /// placed deep enough inside N.
  ExtractionResult extract(const Point& L, const std::vector<double>& t_grid = default_t_grid(),
                           std::size_t t_cap = 1024) const {
    require_t_grid(t_grid, "extract_full_density_subsequence");
    const std::size_t N = truncation();
    const auto dv = value_distances(L);
    ExtractionResult res;
    res.required_t = required_depth(t_grid);
    const auto& probes = engine_.probes();
    const auto& A = engine_.matrix();

    std::size_t prev_count = static_cast<std::size_t>(-1);
    std::vector<double> sums;
    for (std::size_t t = 1; t <= std::max(t_cap, res.required_t); ++t) {
      const double radius = 1.0 / static_cast<double>(t);
      std::vector<std::uint8_t> flags(dv.size());
      for (std::size_t v = 0; v < dv.size(); ++v) flags[v] = dv[v] < radius;
      const std::size_t count = count_members(seq_.counts, flags);
      if (count != prev_count) {  // G_t is nested, so equal counts mean equal sets
        sums = engine_.partial_sums(mask_from_values(seq_.index, flags));
        prev_count = count;
      }
      const double need = static_cast<double>(t - 1) / static_cast<double>(t);
      const auto from = detail::settled_from(sums, [need](double s) { return s > need; });
      if (!from) break;
      std::size_t u = A.support_bound(probes[*from]);
      if (!res.thresholds.empty()) u = std::max(u, res.thresholds.back() + 1);
      if (u > N) break;
      res.thresholds.push_back(u);
    }
    if (res.deepest_t() < res.required_t) throw TruncationError(res.deepest_t(), res.required_t);

    const auto d = spread(dv);
    res.mask = detail::splice_levels(N, res.thresholds, [&d](std::size_t k, std::size_t t) {
      return d[k] < 1.0 / static_cast<double>(t);
    });
    res.density = density_of(res.mask);
    res.tail = strong_tail_check(d, t_grid, &res.mask);
    const bool dense = res.density.limit_estimate() >= 1.0 - opt_.osc_tol;
    res.verdict = dense && res.tail.passed ? Verdict::pass : Verdict::fail;
    return res;
  }

  ClusterReport<Point> clusters(const std::vector<Point>& candidates,
                                const std::vector<double>& t_grid = default_t_grid()) const {
    require_t_grid(t_grid, "cluster_points");
    if (candidates.empty()) throw std::invalid_argument("cluster_points: candidate grid must be nonempty");
    ClusterReport<Point> rep;
    rep.candidates = candidates;
    rep.t_grid = t_grid;
    rep.nonthin_floor = opt_.nonthin_floor;
    rep.limit_depth = required_depth(t_grid);
    const std::size_t N = truncation();

    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::vector<double> dv(seq_.distinct());
      for (std::size_t v = 0; v < dv.size(); ++v) dv[v] = x_.space.strong_distance(candidates[c], seq_.values[v]);
      const auto d = spread(dv);

      bool ordinary = true;
      for (double t : t_grid) {
        bool hit = false;
        for (std::size_t k = N / 2 + 1; k <= N && !hit; ++k) hit = d[k] < t;
        ordinary = ordinary && hit;
      }

      bool cluster = true;
      for (double t : t_grid) {
        const auto est = density_of(mask_where(dv, [t](double x) { return x < t; }));
        cluster = cluster && est.cls == DensityClass::estimated_positive && est.tail.min >= opt_.nonthin_floor;
        if (!cluster) break;
      }

      if (ordinary) rep.ordinary.push_back(c);
      if (cluster) rep.gamma.push_back(c);
      if (limit_point(dv, d, rep.limit_depth, t_grid)) rep.lambda.push_back(c);
    }

    auto subset = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
      return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    rep.containment_ok = subset(rep.lambda, rep.gamma) && subset(rep.gamma, rep.ordinary);
    rep.note = "limit points are heuristic: a nonthin subsequence is assembled greedily along radii 1/t, t <= " +
               std::to_string(rep.limit_depth);
    if (!rep.containment_ok) rep.note += "; containment lambda <= gamma <= ordinary violated";
    return rep;
  }

  /// Escape set {k : x_k not in C}; `same` decides membership.
  BoundednessReport bounded(const std::vector<Point>& C,
                            const std::function<bool(const Point&, const Point&)>& same = std::equal_to<Point>{}) const {
    if (C.empty()) throw std::invalid_argument("is_stat_bounded: C must be nonempty");
    std::vector<std::uint8_t> flags(seq_.distinct());
    for (std::size_t v = 0; v < flags.size(); ++v) {
      flags[v] = std::none_of(C.begin(), C.end(), [&](const Point& c) { return same(seq_.values[v], c); });
    }
    BoundednessReport rep;
    rep.escape = density_of(mask_from_values(seq_.index, flags));
    rep.verdict = zero_verdict(rep.escape);
    return rep;
  }

  /// Density of {k : x_k in C} for a finite C that avoids the cluster points.
  DensityEstimate compact_disjoint(const std::vector<Point>& C, const std::vector<Point>& gamma) const {
    for (const auto& c : C) {
      if (std::find(gamma.begin(), gamma.end(), c) != gamma.end()) {
        throw std::domain_error("compact_disjoint_check: C meets the cluster-point estimate");
      }
    }
    std::vector<std::uint8_t> flags(seq_.distinct());
    for (std::size_t v = 0; v < flags.size(); ++v) {
      flags[v] = std::find(C.begin(), C.end(), seq_.values[v]) != C.end();
    }
    return density_of(mask_from_values(seq_.index, flags));
  }

  /// For a Cauchy sequence: alpha with V(alpha) o V(alpha) within V(t) on the
  /// observed values, an anchor k_0 at gamma = alpha, P_t = {k : d(x_k, x_k0) >= alpha},
  /// and F_{x_m x_j}(t) > 1 - t for value pairs outside P_t.
  CauchyStructureReport cauchy_structure(double t, std::size_t max_values = 256) const {
    if (!(t > 0.0)) throw std::domain_error("cauchy_structure: t must be positive");
    CauchyStructureReport rep;
    rep.t = t;
    std::vector<std::size_t> chosen(seq_.distinct());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    if (chosen.size() > max_values) {
      std::stable_sort(chosen.begin(), chosen.end(),
                       [this](std::size_t a, std::size_t b) { return seq_.counts[a] > seq_.counts[b]; });
      chosen.resize(max_values);
      std::sort(chosen.begin(), chosen.end());
    }
    std::vector<Point> pts;
    for (auto v : chosen) pts.push_back(seq_.values[v]);
    const auto vic = find_vicinity_alpha(x_.space, t, pts);
    rep.alpha = vic.alpha;
    rep.alpha_found = vic.found;

    const auto cr = cauchy({rep.alpha}, 1);
    rep.anchor = cr.per_gamma.front().anchor;
    if (rep.anchor == 0) {
      rep.verdict = cr.verdict;
      return rep;
    }
    const auto dv = value_distances(seq_[rep.anchor]);
    std::vector<std::uint8_t> in_p(dv.size());
    for (std::size_t v = 0; v < dv.size(); ++v) in_p[v] = dv[v] >= rep.alpha;
    rep.p_density = density_of(mask_from_values(seq_.index, in_p));

    for (std::size_t a = 0; a < chosen.size(); ++a) {
      if (in_p[chosen[a]]) continue;
      for (std::size_t b = a; b < chosen.size(); ++b) {
        if (in_p[chosen[b]]) continue;
        ++rep.pairs_checked;
        if (!in_vicinity(x_.space, pts[a], pts[b], t)) ++rep.violations;
      }
    }
    if (rep.violations > 0) {
      rep.verdict = Verdict::fail;
    } else {
      rep.verdict = vic.found ? zero_verdict(rep.p_density) : Verdict::indeterminate;
    }
    return rep;
  }

 private:
  std::vector<double> spread(const std::vector<double>& dv) const {
    std::vector<double> d(seq_.index.size(), 0.0);
    for (std::size_t k = 1; k < d.size(); ++k) d[k] = dv[seq_.index[k]];
    return d;
  }

  template <class Pred>
  IndexMask mask_where(const std::vector<double>& dv, Pred&& pred) const {
    std::vector<std::uint8_t> flags(dv.size());
    for (std::size_t v = 0; v < dv.size(); ++v) flags[v] = pred(dv[v]);
    return mask_from_values(seq_.index, flags);
  }

  // Greedy assembly of M = [1, v_1] + sum_t ([v_t, v_{t+1}] intersect H_t),
  // H_t = {k : d(zeta, x_k) < 1/t}, requiring every H_t to stay nonthin.
  bool limit_point(const std::vector<double>& dv, const std::vector<double>& d, std::size_t depth,
                   const std::vector<double>& t_grid) const {
    const auto& probes = engine_.probes();
    const auto& A = engine_.matrix();
    const std::size_t N = truncation();
    std::vector<std::size_t> v_thresholds;
    std::size_t prev_count = static_cast<std::size_t>(-1);
    std::vector<double> sums;
    for (std::size_t t = 1; t <= depth; ++t) {
      const double radius = 1.0 / static_cast<double>(t);
      std::vector<std::uint8_t> flags(dv.size());
      for (std::size_t v = 0; v < dv.size(); ++v) flags[v] = dv[v] < radius;
      const std::size_t count = count_members(seq_.counts, flags);
      if (count == 0) return false;
      if (count != prev_count) {
        sums = engine_.partial_sums(mask_from_values(seq_.index, flags));
        prev_count = count;
      }
      if (tail_stats(sums, opt_.window).min < opt_.nonthin_floor) return false;
      const double floor = opt_.nonthin_floor;
      const auto from = detail::settled_from(sums, [floor](double s) { return s >= floor; });
      std::size_t v = A.support_bound(probes[*from]);
      if (!v_thresholds.empty()) v = std::max(v, v_thresholds.back() + 1);
      if (v > N) return false;
      v_thresholds.push_back(v);
    }
    const auto mask = detail::splice_levels(N, v_thresholds, [&d](std::size_t k, std::size_t t) {
      return d[k] < 1.0 / static_cast<double>(t);
    });
    const auto est = density_of(mask);
    return est.cls == DensityClass::estimated_positive && strong_tail_check(d, t_grid, &mask).passed;
  }

  SequenceSpec<Point> x_;
  DensityOptions opt_;
  DensityEngine engine_;
  Materialized<Point> seq_;
};

// ---------------------------------------------------------------------------
// Free-function entry points

template <PointType Point>
ConvergenceReport<Point> stat_converges_to(const SequenceSpec<Point>& x, const Point& L, const SummabilityMatrix& A,
                                           const std::vector<double>& t_grid = default_t_grid(),
                                           const DensityOptions& opt = {}) {
  return SequenceDiagnostics<Point>(x, A, opt).converges_to(L, t_grid);
}

template <PointType Point>
CauchyReport is_stat_cauchy(const SequenceSpec<Point>& x, const SummabilityMatrix& A,
                            const std::vector<double>& gamma_grid = default_t_grid(), const DensityOptions& opt = {}) {
  return SequenceDiagnostics<Point>(x, A, opt).cauchy(gamma_grid);
}

template <PointType Point>
ExtractionResult extract_full_density_subsequence(const SequenceSpec<Point>& x, const Point& L,
                                                  const SummabilityMatrix& A,
                                                  const std::vector<double>& t_grid = default_t_grid(),
                                                  const DensityOptions& opt = {}) {
  return SequenceDiagnostics<Point>(x, A, opt).extract(L, t_grid);
}

/// g_k = x_k on G, L elsewhere.
template <PointType Point>
SequenceSpec<Point> splice_on_null_set(const SequenceSpec<Point>& x, const Point& L, const IndexSet& G) {
  auto gen = x.generator;
  return SequenceSpec<Point>{x.space, [gen, L, G](std::size_t k) { return G.contains(k) ? gen(k) : L; }, x.length,
                             x.label + " spliced"};
}

template <PointType Point>
SpliceReport verify_splice(const SequenceSpec<Point>& x, const SequenceSpec<Point>& g, const Point& L,
                           const SummabilityMatrix& A, const std::vector<double>& t_grid = default_t_grid(),
                           const DensityOptions& opt = {}) {
  const std::size_t N = std::min(x.length, g.length);
  const SequenceDiagnostics<Point> diag(g, A, opt);
  IndexMask differ(N + 1, 0);
  for (std::size_t k = 1; k <= N; ++k) differ[k] = !(x.at(k) == diag.values()[k]);
  SpliceReport rep;
  rep.difference = diag.density_of(differ);
  rep.tail = strong_tail_check(diag.distances(L), t_grid);
  const Verdict d = zero_verdict(rep.difference);
  rep.verdict = !rep.tail.passed ? Verdict::fail : d;
  return rep;
}

template <PointType Point>
ClusterReport<Point> cluster_points(const SequenceSpec<Point>& x, const SummabilityMatrix& A,
                                    const std::vector<Point>& candidates,
                                    const std::vector<double>& t_grid = default_t_grid(),
                                    const DensityOptions& opt = {}) {
  return SequenceDiagnostics<Point>(x, A, opt).clusters(candidates, t_grid);
}

template <PointType Point>
BoundednessReport is_stat_bounded(const SequenceSpec<Point>& x, const SummabilityMatrix& A,
                                  const std::vector<Point>& C, std::optional<double> membership_radius = std::nullopt,
                                  const DensityOptions& opt = {}) {
  const SequenceDiagnostics<Point> diag(x, A, opt);
  if (!membership_radius) return diag.bounded(C);
  const auto& space = x.space;
  const double r = *membership_radius;
  return diag.bounded(C, [&space, r](const Point& a, const Point& b) { return space.strong_distance(a, b) < r; });
}

template <PointType Point>
DensityEstimate compact_disjoint_check(const SequenceSpec<Point>& x, const SummabilityMatrix& A,
                                       const std::vector<Point>& C, const std::vector<Point>& gamma,
                                       const DensityOptions& opt = {}) {
  return SequenceDiagnostics<Point>(x, A, opt).compact_disjoint(C, gamma);
}

struct PairwiseReport {
  std::vector<double> t_grid;
  std::vector<DensityEstimate> exceptions;  // {k : d_L(F_{x_k y_k}, F_pq) >= t}
  Verdict verdict = Verdict::indeterminate;
};

namespace detail {

/// Distinct (x_k, y_k) pairs with their distribution functions.
template <PointType Point>
struct PairSequence {
  std::vector<Ddf> ddfs;
  std::vector<std::uint32_t> index;
};

template <PointType Point>
PairSequence<Point> pair_sequence(const SequenceSpec<Point>& x, const SequenceSpec<Point>& y) {
  const std::size_t N = std::min(x.length, y.length);
  const auto mx = materialize<Point>(x.generator, N);
  const auto my = materialize<Point>(y.generator, N);
  PairSequence<Point> ps;
  ps.index.assign(N + 1, 0);
  std::unordered_map<std::uint64_t, std::uint32_t> seen;
  for (std::size_t k = 1; k <= N; ++k) {
    const std::uint64_t key = (static_cast<std::uint64_t>(mx.index[k]) << 32) | my.index[k];
    auto it = seen.find(key);
    if (it == seen.end()) {
      it = seen.emplace(key, static_cast<std::uint32_t>(ps.ddfs.size())).first;
      ps.ddfs.push_back(x.space.distribution(mx[k], my[k]));
    }
    ps.index[k] = it->second;
  }
  return ps;
}

}  // namespace detail

template <PointType Point>
PairwiseReport pairwise_distance_convergence(const SequenceSpec<Point>& x, const SequenceSpec<Point>& y,
                                             const Point& p, const Point& q, const SummabilityMatrix& A,
                                             const std::vector<double>& t_grid = default_t_grid(),
                                             const DensityOptions& opt = {}) {
  require_t_grid(t_grid, "pairwise_distance_convergence");
  const auto ps = detail::pair_sequence(x, y);
  const std::size_t N = ps.index.size() - 1;
  const Ddf target = x.space.distribution(p, q);
  std::vector<double> dv;
  for (const auto& F : ps.ddfs) dv.push_back(levy_distance(F, target).value);
  const DensityEngine engine(A, N, opt);
  PairwiseReport rep;
  rep.t_grid = t_grid;
  std::vector<Verdict> vs;
  for (double t : t_grid) {
    std::vector<std::uint8_t> flags(dv.size());
    for (std::size_t v = 0; v < dv.size(); ++v) flags[v] = dv[v] >= t;
    rep.exceptions.push_back(density(engine, mask_from_values(ps.index, flags), opt));
    vs.push_back(zero_verdict(rep.exceptions.back()));
  }
  rep.verdict = combine(vs);
  return rep;
}

/// The sequence k -> F_{x_k y_k} in (D+, d_L) is A-statistically Cauchy.
template <PointType Point>
CauchyReport ddf_sequence_cauchy(const SequenceSpec<Point>& x, const SequenceSpec<Point>& y,
                                 const SummabilityMatrix& A, const std::vector<double>& gamma_grid = default_t_grid(),
                                 const DensityOptions& opt = {}) {
  const auto ps = detail::pair_sequence(x, y);
  const DensityEngine engine(A, ps.index.size() - 1, opt);
  std::map<std::pair<std::size_t, std::size_t>, double> memo;
  auto dist = [&](std::size_t a, std::size_t b) {
    if (a == b) return 0.0;
    const auto key = std::minmax(a, b);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, levy_distance(ps.ddfs[a], ps.ddfs[b]).value).first;
    return it->second;
  };
  return detail::cauchy_core(engine, opt, ps.index, ps.ddfs.size(), dist, gamma_grid, 64);
}

/// Cluster points equal the grid points indistinguishable from L at the
/// finest radius (just {L} on a well-separated grid).
template <PointType Point>
bool gamma_matches_limit(const ClusterReport<Point>& rep, const ProbabilisticMetricSpace<Point>& space,
                         const Point& L) {
  const double finest = *std::min_element(rep.t_grid.begin(), rep.t_grid.end());
  std::vector<std::size_t> expected;
  for (std::size_t c = 0; c < rep.candidates.size(); ++c) {
    if (space.strong_distance(L, rep.candidates[c]) < finest) expected.push_back(c);
  }
  return !expected.empty() && expected == rep.gamma;
}

/// Grid points adherent to the cluster-point estimate at every radius
/// belong to it: strong closedness checked on the grid only.
template <PointType Point>
bool gamma_closed_on_grid(const ClusterReport<Point>& rep, const ProbabilisticMetricSpace<Point>& space) {
  const auto gamma = rep.points(rep.gamma);
  if (gamma.empty()) return true;
  for (std::size_t c = 0; c < rep.candidates.size(); ++c) {
    const bool member = std::binary_search(rep.gamma.begin(), rep.gamma.end(), c);
    if (!member && adherent(space, rep.candidates[c], gamma, rep.t_grid)) return false;
  }
  return true;
}

/// Uniform grid on [lo, hi] plus every observed value with multiplicity
/// >= max(2, N/1000); sorted, duplicates removed.
inline std::vector<double> scalar_candidate_grid(const Materialized<double>& seq, double lo, double hi,
                                                 std::size_t steps) {
  if (steps == 0 || !(hi >= lo)) throw std::invalid_argument("scalar_candidate_grid: bad range");
  std::vector<double> grid;
  for (std::size_t i = 0; i <= steps; ++i) {
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps));
  }
  const std::size_t floor = std::max<std::size_t>(2, seq.length() / 1000);
  for (std::size_t v = 0; v < seq.distinct(); ++v) {
    if (seq.counts[v] >= floor) grid.push_back(seq.values[v]);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace pmstat
