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

// Nonnegative N x N summability matrices, described row by row.
//
// Every matrix has a row generator returning the finitely many nonzero
// entries of row n. Most classical methods are "window" matrices
//
//   a_nk = gain * p_k / (p_lo + ... + p_hi)   for lo(n) <= k <= hi(n),
//
// and additionally carry that description so that densities and transforms
// can be evaluated with prefix sums instead of row-by-row summation.
//
// Built-ins (rows are indexed from 1):
//   cesaro            a_nk = 1/n for k <= n
//   riesz(p)          a_nk = p_k / (p_1 + ... + p_n) for k <= n
//   lacunary(theta)   a_rk = 1/(k_r - k_{r-1}) for k_{r-1} < k <= k_r, k_0 = 0
//   lambda_matrix     a_nk = 1/lambda_n for n - lambda_n < k <= n
//   first_column      a_n1 = 1 (not regular: column 1 does not vanish)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pmstat {

struct Entry {
  std::size_t k = 0;
  double a = 0.0;
};

struct WindowForm {
  std::function<std::pair<std::size_t, std::size_t>(std::size_t)> range;  // [lo, hi]
  std::function<double(std::size_t)> weight;                              // p_k > 0
  double gain = 1.0;
};

inline constexpr double kTailTolerance = 1e-12;

class SummabilityMatrix {
 public:
  using RowFn = std::function<std::vector<Entry>(std::size_t)>;
  using TailFn = std::function<double(std::size_t)>;
  using SupportFn = std::function<std::size_t(std::size_t)>;

  /// `support` is an optional shortcut for the last column of row n; without
  /// it the row is materialized.
  SummabilityMatrix(std::string name, RowFn row, TailFn tail_bound = nullptr, SupportFn support = nullptr)
      : name_(std::move(name)), row_(std::move(row)), tail_(std::move(tail_bound)), support_(std::move(support)) {
    if (!row_) throw std::invalid_argument("SummabilityMatrix: empty row generator");
  }

  static SummabilityMatrix from_window(std::string name, WindowForm window) {
    if (!window.range || !window.weight) throw std::invalid_argument("WindowForm: missing function");
    if (!(window.gain > 0.0)) throw std::domain_error("WindowForm: gain must be positive");
    auto row = [window](std::size_t n) {
      const auto [lo, hi] = window.range(n);
      std::vector<Entry> entries;
      entries.reserve(hi - lo + 1);
      double total = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) {
        const double p = window.weight(k);
        if (!(p > 0.0)) throw std::domain_error("window weight p_" + std::to_string(k) + " must be positive");
        total += p;
        entries.push_back(Entry{k, p});
      }
      for (auto& e : entries) e.a = window.gain * e.a / total;
      return entries;
    };
    SummabilityMatrix m(std::move(name), std::move(row));
    m.window_ = std::move(window);
    return m;
  }

  /// Rows with infinitely many nonzero entries: entry(n, k) plus a bound on
  /// the mass beyond column K. Row n is cut at the first K (searched by
  /// doubling) whose tail bound is <= tail_tol.
  static SummabilityMatrix from_infinite_rows(std::string name,
                                              std::function<double(std::size_t, std::size_t)> entry,
                                              std::function<double(std::size_t, std::size_t)> tail,
                                              double tail_tol = kTailTolerance) {
    auto cut = [tail, tail_tol](std::size_t n) {
      std::size_t K = 1;
      while (tail(n, K) > tail_tol) {
        if (K > (std::numeric_limits<std::size_t>::max() >> 2)) {
          throw std::domain_error("infinite row " + std::to_string(n) + ": tail bound never small enough");
        }
        K *= 2;
      }
      return K;
    };
    auto row = [entry, cut](std::size_t n) {
      const std::size_t K = cut(n);
      std::vector<Entry> entries;
      for (std::size_t k = 1; k <= K; ++k) {
        const double a = entry(n, k);
        if (a != 0.0) entries.push_back(Entry{k, a});
      }
      return entries;
    };
    auto tail_at = [tail, cut](std::size_t n) { return tail(n, cut(n)); };
    return SummabilityMatrix(std::move(name), std::move(row), std::move(tail_at));
  }

  /// Nonzero entries of row n (n >= 1), ascending in k, all a_nk >= 0.
  std::vector<Entry> row(std::size_t n) const {
    if (n == 0) throw std::domain_error("SummabilityMatrix: rows start at 1");
    auto entries = row_(n);
    std::size_t prev = 0;
    for (const auto& e : entries) {
      if (e.k <= prev) throw std::domain_error(name_ + ": row " + std::to_string(n) + " columns not ascending");
      if (!(e.a >= 0.0)) throw std::domain_error(name_ + ": negative entry in row " + std::to_string(n));
      prev = e.k;
    }
    return entries;
  }

  /// Largest column with a nonzero (retained) entry in row n; 0 for an empty row.
  std::size_t support_bound(std::size_t n) const {
    if (window_) return window_->range(n).second;
    if (support_) return support_(n);
    const auto r = row(n);
    return r.empty() ? 0 : r.back().k;
  }

  /// Mass dropped when the row was truncated (0 for finite rows).
  double tail_bound(std::size_t n) const { return tail_ ? tail_(n) : 0.0; }

  double row_sum(std::size_t n) const {
    if (window_) return window_->gain;
    double s = 0.0;
    for (const auto& e : row(n)) s += e.a;
    return s;
  }

  /// Largest row n <= N whose support lies inside [1, N]; 0 if none.
  /// Assumes support_bound is nondecreasing in n.
  std::size_t max_row_within(std::size_t N) const {
    if (N == 0 || support_bound(1) > N) return 0;
    // Double first so that rows far outside [1, N] are never inspected.
    std::size_t lo = 1;
    while (lo < N && support_bound(std::min(2 * lo, N)) <= N) lo = std::min(2 * lo, N);
    if (lo == N) return N;
    std::size_t hi = std::min(2 * lo, N) - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo + 1) / 2;
      if (support_bound(mid) <= N) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    return lo;
  }

  SummabilityMatrix scaled(double gain, std::string name = "") const {
    if (!(gain > 0.0)) throw std::domain_error("SummabilityMatrix::scaled: gain must be positive");
    if (name.empty()) name = std::to_string(gain) + "*" + name_;
    if (window_) {
      WindowForm w = *window_;
      w.gain *= gain;
      return from_window(std::move(name), std::move(w));
    }
    auto inner = row_;
    auto tail = tail_;
    return SummabilityMatrix(
        std::move(name),
        [inner, gain](std::size_t n) {
          auto r = inner(n);
          for (auto& e : r) e.a *= gain;
          return r;
        },
        tail ? TailFn([tail, gain](std::size_t n) { return gain * tail(n); }) : nullptr, support_);
  }

  /// Same matrix without the window description (forces the row-by-row path).
  SummabilityMatrix generic() const {
    SupportFn support = support_;
    if (window_) {
      auto range = window_->range;
      support = [range](std::size_t n) { return range(n).second; };
    }
    return SummabilityMatrix(name_, row_, tail_, std::move(support));
  }

  const std::optional<WindowForm>& window() const { return window_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  RowFn row_;
  TailFn tail_;
  SupportFn support_;
  std::optional<WindowForm> window_;
};

inline SummabilityMatrix cesaro() {
  return SummabilityMatrix::from_window(
      "cesaro", WindowForm{[](std::size_t n) { return std::pair<std::size_t, std::size_t>{1, n}; },
                           [](std::size_t) { return 1.0; }});
}

/// Weighted mean (N, p). Regular when p_k > 0 and p_1 + ... + p_n -> infinity.
inline SummabilityMatrix riesz(std::function<double(std::size_t)> weights,
                               std::string name = "riesz") {
  for (std::size_t k = 1; k <= 64; ++k) {
    if (!(weights(k) > 0.0)) throw std::domain_error("riesz: weights must be positive");
  }
  return SummabilityMatrix::from_window(
      std::move(name),
      WindowForm{[](std::size_t n) { return std::pair<std::size_t, std::size_t>{1, n}; },
                 std::move(weights)});
}

/// Block averages over (k_{r-1}, k_r] for a strictly increasing integer
/// sequence theta(r) = k_r, r >= 1, with k_0 = 0.
inline SummabilityMatrix lacunary(std::function<std::size_t(std::size_t)> theta,
                                  std::string name = "lacunary") {
  std::size_t prev = 0;
  for (std::size_t r = 1; r <= 40; ++r) {
    const std::size_t k = theta(r);
    if (k <= prev) throw std::domain_error("lacunary: theta must be strictly increasing from k_0 = 0");
    prev = k;
  }
  return SummabilityMatrix::from_window(
      std::move(name),
      WindowForm{[theta](std::size_t r) {
                   const std::size_t lo = (r == 1 ? 0 : theta(r - 1)) + 1;
                   const std::size_t hi = theta(r);
                   if (hi < lo) throw std::domain_error("lacunary: theta not strictly increasing");
                   return std::pair<std::size_t, std::size_t>{lo, hi};
                 },
                 [](std::size_t) { return 1.0; }});
}

/// k_r = floor(q^r).
inline SummabilityMatrix lacunary_geometric(double q) {
  if (!(q > 1.0)) throw std::domain_error("lacunary: ratio must exceed 1");
  auto theta = [q](std::size_t r) -> std::size_t {
    const double v = std::floor(std::pow(q, static_cast<double>(r)));
    const double cap = static_cast<double>(std::numeric_limits<std::size_t>::max() >> 2);
    // Beyond any realistic truncation; keep the sequence strictly increasing.
    if (v >= cap) return static_cast<std::size_t>(cap) + r;
    return static_cast<std::size_t>(v);
  };
  std::string name = "lacunary:" + std::to_string(q);
  name.erase(name.find_last_not_of('0') + 1);
  if (name.back() == '.') name.pop_back();
  return lacunary(theta, std::move(name));
}

/// Moving averages over the last lambda_n terms. lambda must be
/// nondecreasing with lambda_1 = 1 and lambda_{n+1} <= lambda_n + 1.
inline SummabilityMatrix lambda_matrix(std::function<std::size_t(std::size_t)> lambda,
                                       std::string name = "lambda") {
  if (lambda(1) != 1) throw std::domain_error("lambda_matrix: lambda_1 must be 1");
  for (std::size_t n = 2; n <= 4096; ++n) {
    const auto cur = lambda(n);
    const auto prev = lambda(n - 1);
    if (cur < prev || cur > prev + 1) {
      throw std::domain_error("lambda_matrix: need lambda_n <= lambda_{n+1} <= lambda_n + 1");
    }
  }
  return SummabilityMatrix::from_window(
      std::move(name),
      WindowForm{[lambda](std::size_t n) {
                   const std::size_t l = lambda(n);
                   if (l == 0 || l > n) throw std::domain_error("lambda_matrix: need 1 <= lambda_n <= n");
                   return std::pair<std::size_t, std::size_t>{n - l + 1, n};
                 },
                 [](std::size_t) { return 1.0; }});
}

/// a_n1 = 1 for every n, all other entries 0.
inline SummabilityMatrix first_column() {
  return SummabilityMatrix::from_window(
      "first-column",
      WindowForm{[](std::size_t) { return std::pair<std::size_t, std::size_t>{1, 1}; },
                 [](std::size_t) { return 1.0; }});
}

}  // namespace pmstat
