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

// A-density estimation from truncated partial sums
//
//   s_n(B) = sum_{k in B} a_nk
//
// evaluated on a geometric probe schedule. Nothing here proves a limit: every
// estimate carries the truncation N it was computed at.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmstat/index_set.hpp"
#include "pmstat/matrix.hpp"
#include "pmstat/verdict.hpp"

namespace pmstat {

struct DensityOptions {
  std::size_t window = 12;
  double ratio = 1.25;
  double osc_tol = 5e-3;
  double zero_tol = 5e-3;
  double nonthin_floor = 0.01;
  // A set with no members in (N/finite_span, N] is treated as finite within
  // the truncation: its partial sums only decay like |B|/n.
  std::size_t finite_span = 16;
};

/// Rows n_max, ceil(n_max / r), ceil(n_max / r^2), ... returned ascending,
/// where n_max is the last row supported inside [1, N]. When that gives
/// fewer than `min_probes` distinct rows (slowly growing supports, e.g.
/// lacunary blocks) every row 1..n_max is used instead.
inline std::vector<std::size_t> probe_schedule(const SummabilityMatrix& A, std::size_t N,
                                               double ratio = 1.25, std::size_t min_probes = 12) {
  if (!(ratio > 1.0)) throw std::invalid_argument("probe_schedule: ratio must exceed 1");
  const std::size_t n_max = A.max_row_within(N);
  std::vector<std::size_t> probes;
  if (n_max == 0) return probes;
  double x = static_cast<double>(n_max);
  std::size_t last = 0;
  while (true) {
    const auto n = static_cast<std::size_t>(std::ceil(x - 1e-9));
    if (n < 1) break;
    if (n != last) probes.push_back(n);
    if (n == 1) break;
    last = n;
    x /= ratio;
  }
  std::reverse(probes.begin(), probes.end());
  if (probes.size() < min_probes) {
    probes.resize(n_max);
    std::iota(probes.begin(), probes.end(), std::size_t{1});
  }
  return probes;
}

/// Summary of the last `window` values of a probe series.
struct TailStats {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double last = 0.0;
  double early_max = 0.0;  // max over the older half of the window
  double late_max = 0.0;   // max over the newer half
  double oscillation() const { return max - min; }
};

inline TailStats tail_stats(const std::vector<double>& series, std::size_t window) {
  TailStats s;
  if (series.empty()) return s;
  const std::size_t w = std::min(window, series.size());
  const auto first = series.end() - static_cast<std::ptrdiff_t>(w);
  s.count = w;
  s.min = *std::min_element(first, series.end());
  s.max = *std::max_element(first, series.end());
  s.mean = std::accumulate(first, series.end(), 0.0) / static_cast<double>(w);
  s.last = series.back();
  const auto mid = first + static_cast<std::ptrdiff_t>(w / 2);
  s.early_max = mid == first ? *first : *std::max_element(first, mid);
  s.late_max = *std::max_element(mid, series.end());
  return s;
}

/// Tail vanishes: either settled near 0, or already small and not rising.
inline bool tail_vanishes(const TailStats& s, double osc_tol, double zero_tol) {
  if (s.count == 0) return false;
  return (s.oscillation() <= osc_tol && s.mean <= zero_tol) ||
         (s.last <= zero_tol && s.late_max <= s.early_max);
}

enum class DensityClass { estimated_zero, estimated_positive, indeterminate };

inline std::string to_string(DensityClass c) {
  switch (c) {
    case DensityClass::estimated_zero: return "estimated-zero";
    case DensityClass::estimated_positive: return "estimated-positive";
    case DensityClass::indeterminate: return "indeterminate";
  }
  return "?";
}

inline DensityClass classify(const TailStats& s, const DensityOptions& opt) {
  if (s.count == 0) return DensityClass::indeterminate;
  if (tail_vanishes(s, opt.osc_tol, opt.zero_tol)) return DensityClass::estimated_zero;
  if (s.min >= opt.nonthin_floor) return DensityClass::estimated_positive;
  return DensityClass::indeterminate;
}

struct DensityEstimate {
  bool converged = false;
  double value = 0.0;  // trailing-window mean; meaningful when converged
  std::vector<std::size_t> probes;
  std::vector<double> partial_sums;
  std::size_t truncation = 0;
  double oscillation = 0.0;
  TailStats tail;
  DensityClass cls = DensityClass::indeterminate;
  std::string note;

  /// Best single number: the window mean if converged, else the last probe.
  double limit_estimate() const { return converged ? value : tail.last; }
};

/// Evaluates s_n over masks for a fixed matrix and truncation. Window
/// matrices use prefix sums of the weights; other matrices have their probe
/// rows materialized once and reused.
class DensityEngine {
 public:
  DensityEngine(const SummabilityMatrix& A, std::size_t N, const DensityOptions& opt = {})
      : A_(A), N_(N), probes_(probe_schedule(A, N, opt.ratio, opt.window)) {
    if (A_.window()) {
      const auto& w = *A_.window();
      prefix_.assign(N_ + 1, 0.0);
      for (std::size_t k = 1; k <= N_; ++k) prefix_[k] = prefix_[k - 1] + w.weight(k);
    } else {
      for (auto n : probes_) rows_.emplace(n, A_.row(n));
    }
  }

  const std::vector<std::size_t>& probes() const { return probes_; }
  std::size_t truncation() const { return N_; }
  const SummabilityMatrix& matrix() const { return A_; }

  /// s_n for a mask covering at least [1, support_bound(n)].
  double partial_sum(const IndexMask& mask, std::size_t n) const {
    if (A_.window()) {
      const auto& w = *A_.window();
      const auto [lo, hi] = w.range(n);
      require(mask, hi, n);
      double num = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) {
        if (mask[k]) num += w.weight(k);
      }
      return w.gain * num / total_weight(lo, hi);
    }
    const auto& r = row(n);
    if (!r.empty()) require(mask, r.back().k, n);
    double s = 0.0;
    for (const auto& e : r) {
      if (mask[e.k]) s += e.a;
    }
    return s;
  }

  /// s_n over the probe schedule. For window matrices the masked weights are
  /// accumulated once, so this is O(N) regardless of the number of probes.
  std::vector<double> partial_sums(const IndexMask& mask) const {
    std::vector<double> out;
    out.reserve(probes_.size());
    if (A_.window()) {
      const auto& w = *A_.window();
      if (!probes_.empty()) require(mask, w.range(probes_.back()).second, probes_.back());
      std::vector<double> masked(N_ + 1, 0.0);
      for (std::size_t k = 1; k <= N_ && k < mask.size(); ++k) {
        masked[k] = masked[k - 1] + (mask[k] ? w.weight(k) : 0.0);
      }
      for (auto n : probes_) {
        const auto [lo, hi] = w.range(n);
        out.push_back(w.gain * (masked[hi] - masked[lo - 1]) / total_weight(lo, hi));
      }
      return out;
    }
    for (auto n : probes_) out.push_back(partial_sum(mask, n));
    return out;
  }

  std::vector<double> partial_sums(const IndexSet& B) const { return partial_sums(B.mask(N_)); }

  /// Row sums over the schedule (the partial sums of B = N).
  std::vector<double> row_sums() const {
    std::vector<double> out;
    for (auto n : probes_) out.push_back(A_.row_sum(n));
    return out;
  }

  /// a_nk for one column across the schedule.
  std::vector<double> column(std::size_t k) const {
    std::vector<double> out;
    for (auto n : probes_) {
      if (A_.window()) {
        const auto& w = *A_.window();
        const auto [lo, hi] = w.range(n);
        out.push_back(k >= lo && k <= hi ? w.gain * w.weight(k) / total_weight(lo, hi) : 0.0);
      } else {
        const auto& r = row(n);
        auto it = std::lower_bound(r.begin(), r.end(), k,
                                   [](const Entry& e, std::size_t key) { return e.k < key; });
        out.push_back(it != r.end() && it->k == k ? it->a : 0.0);
      }
    }
    return out;
  }

 private:
  const std::vector<Entry>& row(std::size_t n) const {
    auto it = rows_.find(n);
    if (it == rows_.end()) it = rows_.emplace(n, A_.row(n)).first;
    return it->second;
  }

  double total_weight(std::size_t lo, std::size_t hi) const {
    if (hi <= N_) return prefix_[hi] - prefix_[lo - 1];
    double s = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) s += A_.window()->weight(k);
    return s;
  }

  static void require(const IndexMask& mask, std::size_t hi, std::size_t n) {
    if (mask.size() <= hi) {
      throw std::out_of_range("row " + std::to_string(n) + " reaches column " + std::to_string(hi) +
                              " beyond the mask");
    }
  }

  SummabilityMatrix A_;
  std::size_t N_;
  std::vector<std::size_t> probes_;
  std::vector<double> prefix_;
  mutable std::map<std::size_t, std::vector<Entry>> rows_;
};

inline DensityEstimate estimate_from_series(std::vector<std::size_t> probes, std::vector<double> sums,
                                            std::size_t N, const DensityOptions& opt) {
  DensityEstimate est;
  est.truncation = N;
  est.probes = std::move(probes);
  est.partial_sums = std::move(sums);
  for (double s : est.partial_sums) {
    if (!(s >= -1e-12)) throw std::logic_error("negative partial sum: matrix entries must be nonnegative");
  }
  est.tail = tail_stats(est.partial_sums, opt.window);
  est.oscillation = est.tail.oscillation();
  est.cls = classify(est.tail, opt);
  if (est.tail.count < opt.window) {
    est.note = "only " + std::to_string(est.tail.count) + " probe rows fit inside N=" + std::to_string(N);
    return est;
  }
  est.converged = est.oscillation <= opt.osc_tol;
  if (est.converged) {
    est.value = est.tail.mean;
  } else {
    est.note = "trailing-window oscillation " + std::to_string(est.oscillation) + " exceeds " +
               std::to_string(opt.osc_tol);
  }
  return est;
}

inline DensityEstimate density(const DensityEngine& engine, const IndexMask& mask,
                               const DensityOptions& opt = {}) {
  auto est = estimate_from_series(engine.probes(), engine.partial_sums(mask), engine.truncation(), opt);
  if (est.cls == DensityClass::estimated_zero || est.tail.count < opt.window || opt.finite_span < 2) return est;
  const std::size_t N = std::min(engine.truncation(), mask.empty() ? 0 : mask.size() - 1);
  std::size_t last = 0;
  for (std::size_t k = N; k >= 1; --k) {
    if (mask[k]) {
      last = k;
      break;
    }
  }
  const std::size_t from = engine.truncation() / opt.finite_span + 1;
  if (last < from && est.tail.late_max <= est.tail.early_max) {
    est.cls = DensityClass::estimated_zero;
    est.note = "no members in (" + std::to_string(from - 1) + ", N]; treated as finite";
  } else if (est.cls == DensityClass::estimated_positive && last <= est.probes[est.probes.size() - opt.window / 2]) {
    // Positive density needs members to keep arriving: some must fall in
    // the later half of the trailing window.
    est.cls = DensityClass::indeterminate;
    est.note = "no members after row " + std::to_string(last) + "; truncation too short to tell";
  }
  return est;
}

inline DensityEstimate density(const SummabilityMatrix& A, const IndexSet& B, std::size_t N,
                               const DensityOptions& opt = {}) {
  if (opt.window < 10 || N < opt.window) {
    throw std::invalid_argument("density: need N >= window >= 10");
  }
  const DensityEngine engine(A, N, opt);
  return density(engine, B.mask(N), opt);
}

// ---------------------------------------------------------------------------
// Regularity at truncation

enum class RegularityVerdict { consistent, violates_i, violates_ii, violates_iii };

inline std::string to_string(RegularityVerdict v) {
  switch (v) {
    case RegularityVerdict::consistent: return "consistent-with-regular";
    case RegularityVerdict::violates_i: return "violates(i)";
    case RegularityVerdict::violates_ii: return "violates(ii)";
    case RegularityVerdict::violates_iii: return "violates(iii)";
  }
  return "?";
}

struct ColumnTrend {
  std::size_t k = 0;
  TailStats tail;
  bool vanishes = false;
};

struct RegularityReport {
  std::string matrix;
  std::size_t truncation = 0;
  double sup_abs_row_sum = 0.0;  // (i)
  std::size_t sup_row = 0;
  bool sup_growing = false;
  std::vector<ColumnTrend> columns;  // (ii)
  TailStats row_sum_tail;            // (iii)
  RegularityVerdict verdict = RegularityVerdict::consistent;
  std::string note;
};

inline RegularityReport check_regularity(const SummabilityMatrix& A, std::size_t N, double tol = 5e-3,
                                         std::size_t k_probe = 10, const DensityOptions& opt = {}) {
  if (N < 10) throw std::invalid_argument("check_regularity: need N >= 10");
  RegularityReport rep;
  rep.matrix = A.name();
  rep.truncation = N;
  const DensityEngine engine(A, N, opt);
  const auto& probes = engine.probes();
  if (probes.empty()) {
    rep.verdict = RegularityVerdict::violates_iii;
    rep.note = "no row fits inside N";
    return rep;
  }

  // (i): every row for window matrices (row sum = gain); otherwise the first
  // rows plus the probe schedule.
  const std::size_t n_max = probes.back();
  std::vector<std::size_t> rows;
  if (A.window() || n_max <= 2000) {
    rows.resize(n_max);
    std::iota(rows.begin(), rows.end(), std::size_t{1});
  } else {
    rows.resize(2000);
    std::iota(rows.begin(), rows.end(), std::size_t{1});
    rows.insert(rows.end(), probes.begin(), probes.end());
  }
  double half_sup = 0.0;
  for (auto n : rows) {
    const double s = A.row_sum(n);
    if (s > rep.sup_abs_row_sum) {
      rep.sup_abs_row_sum = s;
      rep.sup_row = n;
    }
    if (n <= n_max / 2) half_sup = std::max(half_sup, s);
  }
  const auto sums = engine.row_sums();
  rep.row_sum_tail = tail_stats(sums, opt.window);
  const auto& rt = rep.row_sum_tail;
  rep.sup_growing = rt.oscillation() > tol && rt.late_max > rt.early_max * (1.0 + tol) &&
                    rep.sup_abs_row_sum > 2.0 * std::max(half_sup, 1.0);

  for (std::size_t k = 1; k <= k_probe; ++k) {
    ColumnTrend c;
    c.k = k;
    c.tail = tail_stats(engine.column(k), opt.window);
    c.vanishes = tail_vanishes(c.tail, tol, tol);
    rep.columns.push_back(c);
  }

  const bool iii = rt.oscillation() <= tol && std::abs(rt.mean - 1.0) <= tol;
  if (rep.sup_growing) {
    rep.verdict = RegularityVerdict::violates_i;
  } else if (!std::all_of(rep.columns.begin(), rep.columns.end(),
                          [](const ColumnTrend& c) { return c.vanishes; })) {
    rep.verdict = RegularityVerdict::violates_ii;
  } else if (!iii) {
    rep.verdict = RegularityVerdict::violates_iii;
  }
  rep.note = "truncated evidence up to N=" + std::to_string(N) + " (" + std::to_string(probes.size()) +
             " probe rows); not a proof of regularity";
  return rep;
}

// ---------------------------------------------------------------------------
// Null-set algebra

struct DensityAlgebraReport {
  Verdict verdict = Verdict::indeterminate;
  DensityEstimate b, c, b_union_c, b_complement;
  bool union_ok = false;
  bool complement_ok = false;
  std::string note;
};

/// For density-zero B and C: the union has density zero and B^c density one.
inline DensityAlgebraReport density_algebra_checks(const SummabilityMatrix& A, const IndexSet& B,
                                                   const IndexSet& C, std::size_t N,
                                                   const DensityOptions& opt = {}) {
  DensityAlgebraReport rep;
  const DensityEngine engine(A, N, opt);
  const auto mb = B.mask(N);
  const auto mc = C.mask(N);
  IndexMask mu(N + 1, 0), mcomp(N + 1, 0);
  for (std::size_t k = 1; k <= N; ++k) {
    mu[k] = mb[k] | mc[k];
    mcomp[k] = !mb[k];
  }
  rep.b = density(engine, mb, opt);
  rep.c = density(engine, mc, opt);
  rep.b_union_c = density(engine, mu, opt);
  rep.b_complement = density(engine, mcomp, opt);
  if (rep.b.cls != DensityClass::estimated_zero || rep.c.cls != DensityClass::estimated_zero) {
    rep.note = "inputs are not estimated-zero; checks skipped";
    return rep;
  }
  rep.union_ok = rep.b_union_c.limit_estimate() <=
                 rep.b.limit_estimate() + rep.c.limit_estimate() + opt.osc_tol;
  rep.complement_ok = std::abs(rep.b_complement.limit_estimate() - 1.0) <=
                      rep.b.limit_estimate() + opt.osc_tol;
  rep.verdict = rep.union_ok && rep.complement_ok ? Verdict::pass : Verdict::fail;
  return rep;
}

// ---------------------------------------------------------------------------
// Configuration strings

inline std::function<double(std::size_t)> riesz_weights(const std::string& id) {
  if (id == "unit") return [](std::size_t) { return 1.0; };
  if (id == "linear") return [](std::size_t k) { return static_cast<double>(k); };
  if (id == "sqrt") return [](std::size_t k) { return std::sqrt(static_cast<double>(k)); };
  throw std::invalid_argument("unknown riesz weights '" + id + "' (unit, linear, sqrt)");
}

inline std::function<std::size_t(std::size_t)> lambda_sequence(const std::string& id) {
  if (id == "identity") return [](std::size_t n) { return n; };
  if (id == "sqrt") {
    return [](std::size_t n) {
      auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
      while (r * r < n) ++r;
      while (r > 1 && (r - 1) * (r - 1) >= n) --r;
      return r;
    };
  }
  throw std::invalid_argument("unknown lambda sequence '" + id + "' (identity, sqrt)");
}

/// "cesaro" | "riesz:<id>" | "lacunary:<ratio>" | "lambda:<id>"
inline SummabilityMatrix parse_matrix(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "cesaro" && arg.empty()) return cesaro();
  if (kind == "riesz") return riesz(riesz_weights(arg), spec);
  if (kind == "lambda") return lambda_matrix(lambda_sequence(arg), spec);
  if (kind == "lacunary") {
    std::size_t used = 0;
    double q = 0.0;
    try {
      q = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) throw std::invalid_argument("lacunary ratio '" + arg + "' is not a number");
    return lacunary_geometric(q);
  }
  throw std::invalid_argument("unknown matrix '" + spec + "'");
}

inline std::vector<std::string> builtin_matrices() {
  return {"cesaro", "lacunary:2", "lambda:identity", "lambda:sqrt", "riesz:linear", "riesz:sqrt", "riesz:unit"};
}

}  // namespace pmstat
