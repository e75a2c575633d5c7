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

// Strong A-summability: the transform
//
//   y_j = sum_k a_jk d_L(F_{x_k L}, eps_0)
//
// should tend to 0 (strongly summable) or tend to 0 outside a set of
// natural density zero (strongly statistically summable).

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmstat/density.hpp"
#include "pmstat/matrix.hpp"
#include "pmstat/statconv.hpp"
#include "pmstat/verdict.hpp"

namespace pmstat {

struct TransformTrace {
  std::vector<double> y;  // y[j] for j = 1..J; y[0] unused
  std::size_t J = 0;
  std::vector<std::size_t> row_support;  // support_bound(j) used for each row
  double max_tail = 0.0;                 // largest declared tail mass dropped

  double operator[](std::size_t j) const { return y[j]; }
};

/// Transform of a per-index distance sequence d[k], k = 1..N.
inline TransformTrace a_transform(const std::vector<double>& d, const SummabilityMatrix& A, std::size_t J) {
  if (J == 0) throw std::invalid_argument("a_transform: J must be at least 1");
  const std::size_t N = d.size() - 1;
  TransformTrace tr;
  tr.J = J;
  tr.y.assign(J + 1, 0.0);
  tr.row_support.assign(J + 1, 0);
  for (std::size_t j = 1; j <= J; ++j) {
    const std::size_t s = A.support_bound(j);
    if (s > N) {
      throw std::domain_error("a_transform: row " + std::to_string(j) + " reaches column " + std::to_string(s) +
                              " but the sequence has length " + std::to_string(N));
    }
    tr.row_support[j] = s;
  }
  if (const auto& w = A.window()) {
    std::vector<double> pw(N + 1, 0.0), pwd(N + 1, 0.0);
    for (std::size_t k = 1; k <= N; ++k) {
      const double p = w->weight(k);
      pw[k] = pw[k - 1] + p;
      pwd[k] = pwd[k - 1] + p * d[k];
    }
    for (std::size_t j = 1; j <= J; ++j) {
      const auto [lo, hi] = w->range(j);
      tr.y[j] = std::max(0.0, w->gain * (pwd[hi] - pwd[lo - 1]) / (pw[hi] - pw[lo - 1]));
    }
  } else {
    for (std::size_t j = 1; j <= J; ++j) {
      double s = 0.0;
      for (const auto& e : A.row(j)) s += e.a * d[e.k];
      tr.y[j] = s;
      tr.max_tail = std::max(tr.max_tail, A.tail_bound(j));
    }
  }
  return tr;
}

template <PointType Point>
TransformTrace a_transform(const SequenceSpec<Point>& x, const Point& L, const SummabilityMatrix& A, std::size_t J) {
  const auto seq = materialize<Point>(x.generator, x.length);
  std::vector<double> dv(seq.distinct());
  for (std::size_t v = 0; v < dv.size(); ++v) dv[v] = x.space.strong_distance(seq.values[v], L);
  std::vector<double> d(x.length + 1, 0.0);
  for (std::size_t k = 1; k <= x.length; ++k) d[k] = dv[seq.index[k]];
  return a_transform(d, A, J);
}

/// max y_j over (previous probe, probe] for a geometric schedule in j.
struct Envelope {
  std::vector<std::size_t> probes;
  std::vector<double> block_max;
};

inline Envelope block_envelope(const TransformTrace& tr, double ratio = 1.25) {
  Envelope env;
  for (double x = static_cast<double>(tr.J); x >= 1.0; x /= ratio) {
    const auto j = static_cast<std::size_t>(std::ceil(x - 1e-9));
    if (env.probes.empty() || env.probes.back() != j) env.probes.push_back(j);
  }
  std::reverse(env.probes.begin(), env.probes.end());
  std::size_t prev = 0;
  for (auto j : env.probes) {
    double m = 0.0;
    for (std::size_t i = prev + 1; i <= j; ++i) m = std::max(m, tr.y[i]);
    env.block_max.push_back(m);
    prev = j;
  }
  return env;
}

/// A trailing window whose late maximum keeps this share of its early
/// maximum is treated as flat rather than decaying.
inline constexpr double kFlatShare = 0.9;

/// pass when the trailing block maxima of y_j vanish (settled at or below
/// tol, or small and decaying); fail when every block in the window stays
/// above tol and the envelope is flat; indeterminate otherwise.
inline Verdict is_strongly_a_summable(const TransformTrace& tr, double tol = 5e-3, const DensityOptions& opt = {}) {
  if (tr.J == 0) throw std::invalid_argument("is_strongly_a_summable: empty trace");
  const auto env = block_envelope(tr, opt.ratio);
  const auto s = tail_stats(env.block_max, opt.window);
  if (tail_vanishes(s, tol, tol)) return Verdict::pass;
  if (s.min > tol && s.late_max >= kFlatShare * s.early_max) return Verdict::fail;
  return Verdict::indeterminate;
}

struct StatSummabilityReport {
  std::vector<double> t_grid;
  std::vector<DensityEstimate> exceptions;  // {j : y_j >= t}
  bool outer_is_natural = true;
  Verdict verdict = Verdict::indeterminate;
};

/// Outer density is natural density (Cesaro in j) unless `outer` is given.
inline StatSummabilityReport is_stat_a_summable(const TransformTrace& tr,
                                                const std::vector<double>& t_grid = default_t_grid(),
                                                const DensityOptions& opt = {},
                                                const SummabilityMatrix* outer = nullptr) {
  if (tr.J == 0) throw std::invalid_argument("is_stat_a_summable: empty trace");
  require_t_grid(t_grid, "is_stat_a_summable");
  const SummabilityMatrix C1 = cesaro();
  const DensityEngine engine(outer ? *outer : C1, tr.J, opt);
  StatSummabilityReport rep;
  rep.t_grid = t_grid;
  rep.outer_is_natural = outer == nullptr;
  std::vector<Verdict> vs;
  for (double t : t_grid) {
    IndexMask mask(tr.J + 1, 0);
    for (std::size_t j = 1; j <= tr.J; ++j) mask[j] = tr.y[j] >= t;
    rep.exceptions.push_back(density(engine, mask, opt));
    vs.push_back(zero_verdict(rep.exceptions.back()));
  }
  rep.verdict = combine(vs);
  return rep;
}

// ---------------------------------------------------------------------------
// Implication suite

enum class ImplicationStatus { holds, vacuous, unresolved, violated };

inline std::string to_string(ImplicationStatus s) {
  switch (s) {
    case ImplicationStatus::holds: return "holds";
    case ImplicationStatus::vacuous: return "vacuous";
    case ImplicationStatus::unresolved: return "unresolved";
    case ImplicationStatus::violated: return "violated";
  }
  return "?";
}

struct ImplicationCheck {
  std::string name;
  std::string antecedent;
  std::string consequent;
  ImplicationStatus status = ImplicationStatus::vacuous;
};

inline ImplicationStatus implication(Verdict antecedent, Verdict consequent) {
  if (antecedent != Verdict::pass) return ImplicationStatus::vacuous;
  if (consequent == Verdict::pass) return ImplicationStatus::holds;
  return consequent == Verdict::fail ? ImplicationStatus::violated : ImplicationStatus::unresolved;
}

struct SuiteReport {
  Verdict strongly_convergent = Verdict::indeterminate;
  Verdict stat_convergent = Verdict::indeterminate;
  Verdict strongly_summable = Verdict::indeterminate;
  Verdict stat_summable = Verdict::indeterminate;
  std::vector<ImplicationCheck> checks;
  TransformTrace trace;
  std::size_t N = 0;
  std::size_t J = 0;

  bool no_violation() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const ImplicationCheck& c) { return c.status == ImplicationStatus::violated; });
  }
};

inline SuiteReport implication_suite_from(Verdict strongly_convergent, Verdict stat_convergent, TransformTrace trace,
                                          const std::vector<double>& t_grid, double tol, const DensityOptions& opt) {
  SuiteReport rep;
  rep.strongly_convergent = strongly_convergent;
  rep.stat_convergent = stat_convergent;
  rep.strongly_summable = is_strongly_a_summable(trace, tol, opt);
  rep.stat_summable = is_stat_a_summable(trace, t_grid, opt).verdict;
  rep.J = trace.J;
  rep.trace = std::move(trace);
  auto add = [&rep](std::string name, std::string a, Verdict va, std::string c, Verdict vc) {
    rep.checks.push_back({std::move(name), std::move(a), std::move(c), implication(va, vc)});
  };
  add("strong => statistical convergence", "strongly convergent", rep.strongly_convergent, "stat-convergent",
      rep.stat_convergent);
  add("stat-convergent => strongly summable", "stat-convergent", rep.stat_convergent, "strongly summable",
      rep.strongly_summable);
  add("strongly summable => stat-convergent", "strongly summable", rep.strongly_summable, "stat-convergent",
      rep.stat_convergent);
  add("strongly summable => stat-summable", "strongly summable", rep.strongly_summable, "stat-summable",
      rep.stat_summable);
  return rep;
}

/// J defaults to the last row of A supported inside [1, N].
template <PointType Point>
SuiteReport implication_suite(const SequenceSpec<Point>& x, const Point& L, const SummabilityMatrix& A,
                              std::size_t J = 0, const std::vector<double>& t_grid = default_t_grid(),
                              double tol = 5e-3, const DensityOptions& opt = {}) {
  const SequenceDiagnostics<Point> diag(x, A, opt);
  const auto tail = strong_tail_check(diag.distances(L), t_grid);
  const Verdict strong = tail.passed ? Verdict::pass : Verdict::fail;
  const Verdict stat = diag.converges_to(L, t_grid).verdict;
  if (J == 0) J = A.max_row_within(x.length);
  auto rep = implication_suite_from(strong, stat, a_transform(diag.distances(L), A, J), t_grid, tol, opt);
  rep.N = x.length;
  return rep;
}

}  // namespace pmstat
