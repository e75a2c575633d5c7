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

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmstat/statconv.hpp"
#include "support/oracles.hpp"

namespace pmstat {
namespace {

constexpr std::size_t kN = 100000;

ProbabilisticMetricSpace<double> real_line() {
  return metric_induced_space<double>([](double a, double b) { return std::abs(a - b); },
                                      TriangleFunction(TNorm::minimum, 64), "R");
}

SequenceSpec<double> constant(double L, std::size_t N = kN) {
  return {real_line(), [L](std::size_t) { return L; }, N, "constant"};
}

// L off the squares, `far` on them.
SequenceSpec<double> square_perturbed(double L = 0.0, double far = 5.0, std::size_t N = kN) {
  return {real_line(), [L, far](std::size_t k) { return testing::is_square(k) ? far : L; }, N, "squares"};
}

SequenceSpec<double> alternating(double p = 0.0, double q = 0.5, std::size_t N = kN) {
  return {real_line(), [p, q](std::size_t k) { return k % 2 ? p : q; }, N, "alternating"};
}

const std::vector<double> kCandidates{-1.0, -0.5, 0.0, 0.5, 1.0, 5.0};

TEST(Materialize, DistinctValuesAndCounts) {
  const auto m = materialize<double>(square_perturbed().generator, 1000);
  ASSERT_EQ(m.distinct(), 2u);
  EXPECT_EQ(m.values[0], 5.0);  // x_1 = 5 since 1 is a square
  EXPECT_EQ(m.counts[0], testing::isqrt(1000));
  EXPECT_EQ(m[4], 5.0);
  EXPECT_EQ(m[5], 0.0);
  EXPECT_EQ(m.first_occurrence(), (std::vector<std::size_t>{1, 2}));
}

TEST(StatConvergence, ConstantSequence) {
  const auto rep = stat_converges_to(constant(0.25), 0.25, cesaro());
  EXPECT_EQ(rep.verdict, Verdict::pass);
  for (const auto& e : rep.exceptions) {
    for (double s : e.partial_sums) EXPECT_EQ(s, 0.0);
  }
}

TEST(StatConvergence, SquarePerturbed) {
  const auto rep = stat_converges_to(square_perturbed(), 0.0, cesaro());
  EXPECT_EQ(rep.verdict, Verdict::pass);
  ASSERT_EQ(rep.exceptions.size(), default_t_grid().size());
  // Every E_t is exactly the squares: the oracle is floor(sqrt n) / n.
  for (const auto& e : rep.exceptions) {
    for (std::size_t i = 0; i < e.probes.size(); ++i) {
      const double n = static_cast<double>(e.probes[i]);
      ASSERT_NEAR(e.partial_sums[i], static_cast<double>(testing::isqrt(e.probes[i])) / n, 1e-12);
    }
  }
}

TEST(StatConvergence, AlternatingDiverges) {
  const auto rep = stat_converges_to(alternating(), 0.0, cesaro(), {0.2, 0.1});
  EXPECT_EQ(rep.verdict, Verdict::fail);
  EXPECT_NEAR(rep.exceptions[0].limit_estimate(), 0.5, 1e-3);
}

TEST(StatConvergence, ValidatesGrid) {
  EXPECT_THROW(stat_converges_to(constant(0.0), 0.0, cesaro(), {}), std::invalid_argument);
  EXPECT_THROW(stat_converges_to(constant(0.0), 0.0, cesaro(), {0.1, 0.0}), std::invalid_argument);
}

TEST(StatConvergence, AtMostOneCandidatePasses) {
  for (const auto& x : {constant(0.5), square_perturbed(), alternating()}) {
    const SequenceDiagnostics<double> diag(x, cesaro());
    int passing = 0;
    for (double c : kCandidates) passing += diag.converges_to(c).verdict == Verdict::pass;
    EXPECT_LE(passing, 1) << x.label;
  }
}

TEST(StatConvergence, StrongImpliesStatisticalForBuiltins) {
  // x_k = 1/k converges strongly to 0.
  const SequenceSpec<double> x{real_line(), [](std::size_t k) { return 1.0 / static_cast<double>(k); }, 20000, "1/k"};
  for (const auto& id : builtin_matrices()) {
    EXPECT_EQ(stat_converges_to(x, 0.0, parse_matrix(id)).verdict, Verdict::pass) << id;
  }
}

TEST(Cauchy, ConstantUsesFirstIndex) {
  const auto rep = is_stat_cauchy(constant(1.0), cesaro());
  EXPECT_EQ(rep.verdict, Verdict::pass);
  for (const auto& g : rep.per_gamma) EXPECT_EQ(g.anchor, 1u);
}

TEST(Cauchy, ConvergentImpliesCauchy) {
  const auto x = square_perturbed();
  ASSERT_EQ(stat_converges_to(x, 0.0, cesaro()).verdict, Verdict::pass);
  const auto rep = is_stat_cauchy(x, cesaro());
  EXPECT_EQ(rep.verdict, Verdict::pass);
  // x_1 = 5 is a square, so the first usable anchor is k_0 = 2.
  EXPECT_EQ(rep.per_gamma.front().anchor, 2u);
  for (const auto& g : rep.per_gamma) EXPECT_LE(g.nested_bad_fraction, 0.1);
}

TEST(Cauchy, AlternatingIsNotCauchy) {
  const auto rep = is_stat_cauchy(alternating(), cesaro(), {0.4, 0.1});
  EXPECT_EQ(rep.verdict, Verdict::fail);
  for (const auto& g : rep.per_gamma) {
    EXPECT_EQ(g.anchor, 0u);
    EXPECT_DOUBLE_EQ(g.nested_bad_fraction, 1.0);
  }
}

TEST(Extraction, ConstantGivesEverything) {
  const auto res = extract_full_density_subsequence(constant(0.0, 20000), 0.0, cesaro());
  EXPECT_EQ(res.verdict, Verdict::pass);
  for (std::size_t k = 1; k <= 20000; ++k) ASSERT_TRUE(res.mask[k]);
  EXPECT_TRUE(std::is_sorted(res.thresholds.begin(), res.thresholds.end()));
}

TEST(Extraction, SquarePerturbed) {
  const auto x = square_perturbed();
  const auto res = extract_full_density_subsequence(x, 0.0, cesaro());
  EXPECT_EQ(res.verdict, Verdict::pass);
  EXPECT_GE(res.density.limit_estimate(), 0.99);
  EXPECT_GE(res.deepest_t(), res.required_t);
  // Only finitely many squares (those before u_1) survive.
  std::size_t squares_kept = 0;
  for (std::size_t k = 1; k <= kN; ++k) squares_kept += res.mask[k] && testing::is_square(k);
  EXPECT_LE(squares_kept, 1u);
  // Inside [u_t, u_{t+1}] every kept index is within 1/t of L.
  const auto& u = res.thresholds;
  for (std::size_t t = 1; t < u.size(); ++t) {
    for (std::size_t k = u[t - 1]; k <= u[t]; ++k) {
      if (res.mask[k]) {
        ASSERT_LT(std::abs(x.at(k)), 1.0 / static_cast<double>(t));
      }
    }
  }
}

TEST(Extraction, TooShortTruncationReportsDepth) {
  // Squares have partial sums floor(sqrt n)/n, so (t-1)/t is first exceeded
  // for good around n = t^2; t = 50 needs more than 500 terms.
  try {
    extract_full_density_subsequence(square_perturbed(0.0, 5.0, 500), 0.0, cesaro());
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_LT(e.deepest_t, e.required_t);
    EXPECT_GE(e.deepest_t, 10u);
    EXPECT_NE(std::string(e.what()).find("truncation too small"), std::string::npos);
  }
}

TEST(Extraction, DivergentSequenceStallsEarly) {
  try {
    extract_full_density_subsequence(alternating(0.0, 0.5, 5000), 0.0, cesaro());
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_EQ(e.deepest_t, 1u);
  }
}

TEST(Splice, IdentityOnFullSet) {
  const auto x = alternating(0.0, 0.5, 2000);
  const auto g = splice_on_null_set(x, 0.0, IndexSet::all());
  for (std::size_t k = 1; k <= 2000; ++k) ASSERT_EQ(g.at(k), x.at(k));
}

TEST(Splice, ComplementOfSquaresGivesConstant) {
  const auto x = square_perturbed();
  const auto g = splice_on_null_set(x, 0.0, sets::squares().complement());
  for (std::size_t k = 1; k <= 2000; ++k) ASSERT_EQ(g.at(k), 0.0);
  const auto rep = verify_splice(x, g, 0.0, cesaro());
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_TRUE(rep.tail.passed);
}

TEST(Splice, RoundTrip) {
  const auto x = square_perturbed();
  const auto G = extract_full_density_subsequence(x, 0.0, cesaro());
  const auto g = splice_on_null_set(x, 0.0, G.set());
  const auto rep = verify_splice(x, g, 0.0, cesaro());
  EXPECT_EQ(rep.verdict, Verdict::pass);
  // {k : g_k != x_k} lies in the complement of G.
  for (std::size_t k = 1; k <= kN; k += 7) {
    if (g.at(k) != x.at(k)) {
      ASSERT_FALSE(G.mask[k]);
    }
  }
  EXPECT_EQ(stat_converges_to(g, 0.0, cesaro()).verdict, Verdict::pass);
}

TEST(StrongTail, DetectsLateExceptions) {
  const auto x = square_perturbed();
  const SequenceDiagnostics<double> diag(x, cesaro());
  const auto tail = strong_tail_check(diag.distances(0.0), default_t_grid());
  EXPECT_FALSE(tail.passed);
  EXPECT_TRUE(testing::is_square(tail.witness));
  EXPECT_GT(tail.witness, kN / 2);
}

TEST(Clusters, ConvergentHasSingleClusterPoint) {
  const auto x = square_perturbed();
  const auto rep = cluster_points(x, cesaro(), kCandidates);
  EXPECT_EQ(rep.points(rep.gamma), std::vector<double>{0.0});
  EXPECT_EQ(rep.points(rep.lambda), std::vector<double>{0.0});
  EXPECT_TRUE(rep.containment_ok);
  EXPECT_TRUE(gamma_matches_limit(rep, x.space, 0.0));
  EXPECT_TRUE(gamma_closed_on_grid(rep, x.space));
  // 5 is hit infinitely often but only on a null set.
  EXPECT_NE(std::find(rep.ordinary.begin(), rep.ordinary.end(), 5u), rep.ordinary.end());
}

TEST(Clusters, AlternatingHasBothPoints) {
  const auto rep = cluster_points(alternating(), cesaro(), kCandidates);
  EXPECT_EQ(rep.points(rep.gamma), (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(rep.points(rep.lambda), (std::vector<double>{0.0, 0.5}));
  EXPECT_TRUE(rep.containment_ok);
}

TEST(Clusters, NullSetModificationIsInvisible) {
  // x alternates; y additionally jumps to 5 on the squares.
  const auto x = alternating();
  const SequenceSpec<double> y{real_line(), [](std::size_t k) { return testing::is_square(k) ? 5.0 : (k % 2 ? 0.0 : 0.5); },
                               kN, "alternating+squares"};
  const auto rx = cluster_points(x, cesaro(), kCandidates);
  const auto ry = cluster_points(y, cesaro(), kCandidates);
  EXPECT_EQ(rx.gamma, ry.gamma);
  EXPECT_EQ(rx.lambda, ry.lambda);
}

TEST(Clusters, ConvergingValuesGiveLimitPoint) {
  // Evens approach 1 like 1 + 1/k, odds sit at -1.
  const SequenceSpec<double> x{real_line(),
                               [](std::size_t k) { return k % 2 ? -1.0 : 1.0 + 1.0 / static_cast<double>(k); }, kN,
                               "approach"};
  const auto rep = cluster_points(x, cesaro(), kCandidates);
  EXPECT_EQ(rep.points(rep.lambda), (std::vector<double>{-1.0, 1.0}));
  EXPECT_TRUE(rep.containment_ok);
}

TEST(Clusters, RejectsEmptyGrid) {
  EXPECT_THROW(cluster_points(constant(0.0), cesaro(), std::vector<double>{}), std::invalid_argument);
}

TEST(Boundedness, Cases) {
  const std::vector<double> C{0.0};
  const auto all_in = is_stat_bounded(constant(0.0), cesaro(), C);
  EXPECT_EQ(all_in.verdict, Verdict::pass);
  for (double s : all_in.escape.partial_sums) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(is_stat_bounded(square_perturbed(), cesaro(), C).verdict, Verdict::pass);
  EXPECT_EQ(is_stat_bounded(alternating(), cesaro(), C).verdict, Verdict::fail);
  // Radius membership: 0.5 lies within 0.6 of 0.
  EXPECT_EQ(is_stat_bounded(alternating(), cesaro(), C, 0.6).verdict, Verdict::pass);
  EXPECT_THROW(is_stat_bounded(constant(0.0), cesaro(), std::vector<double>{}), std::invalid_argument);
}

TEST(CompactDisjoint, Cases) {
  const auto x = square_perturbed();
  const std::vector<double> gamma{0.0};
  EXPECT_EQ(compact_disjoint_check(x, cesaro(), {5.0, 1.0}, gamma).cls, DensityClass::estimated_zero);
  for (double s : compact_disjoint_check(x, cesaro(), {}, gamma).partial_sums) EXPECT_EQ(s, 0.0);
  for (double s : compact_disjoint_check(alternating(), cesaro(), {0.25}, {0.0, 0.5}).partial_sums) EXPECT_EQ(s, 0.0);
  EXPECT_THROW(compact_disjoint_check(x, cesaro(), {0.0}, gamma), std::domain_error);
}

TEST(Pairwise, ConstantPairs) {
  const auto rep = pairwise_distance_convergence(constant(0.0), constant(0.3), 0.0, 0.3, cesaro());
  EXPECT_EQ(rep.verdict, Verdict::pass);
  for (const auto& e : rep.exceptions) {
    for (double s : e.partial_sums) EXPECT_EQ(s, 0.0);
  }
}

TEST(Pairwise, SquarePerturbedPair) {
  const auto x = square_perturbed(0.0, 5.0);
  const SequenceSpec<double> y{real_line(), [](std::size_t k) { return sets::is_perfect_power(k, 3) ? -2.0 : 0.3; },
                               kN, "cubes"};
  EXPECT_EQ(pairwise_distance_convergence(x, y, 0.0, 0.3, cesaro()).verdict, Verdict::pass);
  EXPECT_EQ(ddf_sequence_cauchy(x, y, cesaro()).verdict, Verdict::pass);
}

TEST(Pairwise, AlternatingPairFails) {
  EXPECT_EQ(pairwise_distance_convergence(alternating(), constant(0.0), 0.0, 0.0, cesaro()).verdict, Verdict::fail);
  EXPECT_EQ(ddf_sequence_cauchy(alternating(), constant(0.0), cesaro(), {0.2}).verdict, Verdict::fail);
}

TEST(CauchyStructure, ComplementPairsAreClose) {
  const auto x = square_perturbed();
  const SequenceDiagnostics<double> diag(x, cesaro());
  for (double t : {0.5, 0.1}) {
    const auto rep = diag.cauchy_structure(t);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_TRUE(rep.alpha_found);
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_GT(rep.pairs_checked, 0u);
    EXPECT_EQ(rep.p_density.cls, DensityClass::estimated_zero);
  }
}

TEST(CandidateGrid, IncludesFrequentValues) {
  const auto m = materialize<double>(square_perturbed(0.3).generator, 10000);
  const auto grid = scalar_candidate_grid(m, -1.0, 1.0, 4);
  EXPECT_EQ(grid, (std::vector<double>{-1.0, -0.5, 0.0, 0.3, 0.5, 1.0, 5.0}));
}

}  // namespace
}  // namespace pmstat
