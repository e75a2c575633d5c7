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

#include "pmstat/summable.hpp"
#include "support/oracles.hpp"

namespace pmstat {
namespace {

constexpr std::size_t kN = 100000;

ProbabilisticMetricSpace<double> real_line() {
  return metric_induced_space<double>([](double a, double b) { return std::abs(a - b); },
                                      TriangleFunction(TNorm::minimum, 64), "R");
}

SequenceSpec<double> sequence(std::function<double(std::size_t)> gen, std::string label, std::size_t N = kN) {
  return {real_line(), std::move(gen), N, std::move(label)};
}

TransformTrace spike_trace(std::size_t J) {
  TransformTrace tr;
  tr.J = J;
  tr.y.assign(J + 1, 0.0);
  for (std::size_t r = 1; r * r <= J; ++r) tr.y[r * r] = 1.0;
  return tr;
}

TEST(Transform, ConstantIsZero) {
  const auto tr = a_transform(sequence([](std::size_t) { return 2.0; }, "c"), 2.0, cesaro(), kN);
  for (std::size_t j = 1; j <= kN; ++j) ASSERT_EQ(tr[j], 0.0);
}

TEST(Transform, SquaresMatchClosedForm) {
  const auto x = sequence([](std::size_t k) { return testing::is_square(k) ? 5.0 : 0.0; }, "squares");
  const auto tr = a_transform(x, 0.0, cesaro(), kN);
  for (std::size_t j = 1; j <= kN; j += 97) {
    ASSERT_NEAR(tr[j], static_cast<double>(testing::isqrt(j)) / static_cast<double>(j), 1e-12) << j;
  }
}

TEST(Transform, AlternatingTendsToHalfDistance) {
  const auto x = sequence([](std::size_t k) { return k % 2 ? 0.0 : 0.3; }, "alt");
  const auto tr = a_transform(x, 0.0, cesaro(), kN);
  EXPECT_NEAR(tr[kN], 0.15, 1e-6);
  EXPECT_NEAR(tr[kN - 1], 0.15, 1e-5);
}

TEST(Transform, GenericRowsAgreeWithWindow) {
  const auto x = sequence([](std::size_t k) { return std::sin(static_cast<double>(k)); }, "sin", 3000);
  for (const auto& id : builtin_matrices()) {
    const auto A = parse_matrix(id);
    const std::size_t J = A.max_row_within(3000);
    const auto fast = a_transform(x, 0.0, A, J);
    const auto slow = a_transform(x, 0.0, A.generic(), J);
    for (std::size_t j = 1; j <= J; ++j) ASSERT_NEAR(fast[j], slow[j], 1e-12) << id << " row " << j;
  }
}

TEST(Transform, BoundedByRowSums) {
  const auto x = sequence([](std::size_t k) { return std::fmod(static_cast<double>(k) * 0.618, 3.0); }, "frac", 5000);
  for (const auto& id : builtin_matrices()) {
    const auto A = parse_matrix(id);
    const auto tr = a_transform(x, 0.0, A, A.max_row_within(5000));
    for (std::size_t j = 1; j <= tr.J; ++j) {
      ASSERT_GE(tr[j], 0.0);
      ASSERT_LE(tr[j], A.row_sum(j) + 1e-12);
    }
  }
}

TEST(Transform, ShortSequenceNamesRow) {
  const auto x = sequence([](std::size_t) { return 0.0; }, "short", 100);
  try {
    a_transform(x, 0.0, cesaro(), 101);
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("row 101"), std::string::npos);
  }
  EXPECT_THROW(a_transform(x, 0.0, cesaro(), 0), std::invalid_argument);
}

TEST(StrongSummability, Verdicts) {
  TransformTrace zero;
  zero.J = 1000;
  zero.y.assign(1001, 0.0);
  EXPECT_EQ(is_strongly_a_summable(zero), Verdict::pass);

  const auto squares = a_transform(sequence([](std::size_t k) { return testing::is_square(k) ? 5.0 : 0.0; }, "sq"), 0.0,
                                   cesaro(), kN);
  EXPECT_EQ(is_strongly_a_summable(squares, 5e-3), Verdict::pass);

  const auto alt = a_transform(sequence([](std::size_t k) { return k % 2 ? 0.0 : 5.0; }, "alt"), 0.0, cesaro(), kN);
  EXPECT_EQ(is_strongly_a_summable(alt, 5e-3), Verdict::fail);
}

TEST(StatSummability, Verdicts) {
  const auto squares = a_transform(sequence([](std::size_t k) { return testing::is_square(k) ? 5.0 : 0.0; }, "sq"), 0.0,
                                   cesaro(), kN);
  EXPECT_EQ(is_stat_a_summable(squares).verdict, Verdict::pass);

  const auto alt = a_transform(sequence([](std::size_t k) { return k % 2 ? 0.0 : 5.0; }, "alt"), 0.0, cesaro(), kN);
  EXPECT_EQ(is_stat_a_summable(alt).verdict, Verdict::fail);
}

TEST(StatSummability, SpikeSeparatesTheNotions) {
  const auto tr = spike_trace(kN);
  EXPECT_EQ(is_stat_a_summable(tr).verdict, Verdict::pass);
  EXPECT_EQ(is_strongly_a_summable(tr), Verdict::fail);
}

TEST(StatSummability, OuterDensityIsNaturalByDefault) {
  const auto tr = spike_trace(20000);
  const auto rep = is_stat_a_summable(tr);
  EXPECT_TRUE(rep.outer_is_natural);
  const auto lac = lacunary_geometric(2.0);
  EXPECT_FALSE(is_stat_a_summable(tr, default_t_grid(), {}, &lac).outer_is_natural);
}

TEST(Suite, ConstantAllPass) {
  const auto rep = implication_suite(sequence([](std::size_t) { return 1.0; }, "c"), 1.0, cesaro());
  EXPECT_EQ(rep.strongly_convergent, Verdict::pass);
  EXPECT_EQ(rep.stat_convergent, Verdict::pass);
  EXPECT_EQ(rep.strongly_summable, Verdict::pass);
  EXPECT_EQ(rep.stat_summable, Verdict::pass);
  EXPECT_TRUE(rep.no_violation());
  for (const auto& c : rep.checks) EXPECT_EQ(c.status, ImplicationStatus::holds) << c.name;
}

TEST(Suite, SquarePerturbedConsistent) {
  const auto rep =
      implication_suite(sequence([](std::size_t k) { return testing::is_square(k) ? 5.0 : 0.0; }, "sq"), 0.0, cesaro());
  EXPECT_EQ(rep.strongly_convergent, Verdict::fail);
  EXPECT_EQ(rep.stat_convergent, Verdict::pass);
  EXPECT_EQ(rep.strongly_summable, Verdict::pass);
  EXPECT_EQ(rep.stat_summable, Verdict::pass);
  EXPECT_TRUE(rep.no_violation());
}

TEST(Suite, AlternatingFailsCoherently) {
  const auto rep = implication_suite(sequence([](std::size_t k) { return k % 2 ? 0.0 : 5.0; }, "alt"), 0.0, cesaro());
  EXPECT_EQ(rep.strongly_convergent, Verdict::fail);
  EXPECT_EQ(rep.stat_convergent, Verdict::fail);
  EXPECT_EQ(rep.strongly_summable, Verdict::fail);
  EXPECT_EQ(rep.stat_summable, Verdict::fail);
  EXPECT_TRUE(rep.no_violation());
  for (const auto& c : rep.checks) EXPECT_EQ(c.status, ImplicationStatus::vacuous) << c.name;
}

TEST(Suite, ChainAcrossMatrices) {
  const auto x = sequence([](std::size_t k) { return testing::is_square(k) ? 5.0 : 1.0 / static_cast<double>(k); },
                          "sq+1/k", 50000);
  for (const auto& id : builtin_matrices()) {
    const auto rep = implication_suite(x, 0.0, parse_matrix(id));
    EXPECT_TRUE(rep.no_violation()) << id;
  }
}

TEST(Suite, ShortTruncationIsUnresolvedNotViolated) {
  // y_j = 8/j: strongly summable, but {y_j >= 0.02} = [1, 400] still looks
  // dense at J = 5000.
  const auto rep = implication_suite(
      sequence([](std::size_t k) { return k <= 15 && k % 2 ? 3.0 : 0.0; }, "3 on odd k <= 15", 5000),
      0.0, cesaro());
  EXPECT_EQ(rep.strongly_summable, Verdict::pass);
  EXPECT_NE(rep.stat_summable, Verdict::fail);
  EXPECT_TRUE(rep.no_violation());
}

TEST(Implication, StatusTable) {
  EXPECT_EQ(implication(Verdict::pass, Verdict::pass), ImplicationStatus::holds);
  EXPECT_EQ(implication(Verdict::pass, Verdict::fail), ImplicationStatus::violated);
  EXPECT_EQ(implication(Verdict::pass, Verdict::indeterminate), ImplicationStatus::unresolved);
  EXPECT_EQ(implication(Verdict::fail, Verdict::fail), ImplicationStatus::vacuous);
}

}  // namespace
}  // namespace pmstat
