#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "mcal/bounds.hpp"
#include "mcal/rng.hpp"

using namespace mcal;

namespace {

BoundParams finite_example() {
  BoundParams p;
  p.epsilon = 0.1;
  p.delta = 0.1;
  p.gamma = 0.2;
  p.psi = 0.2;
  p.lambda = 0.25;
  p.card_gamma = 4;
  p.card_H = 16;
  return p;
}

double finite_pre(const BoundParams& p) {
  return 8.0 / (p.epsilon * p.epsilon * p.gamma * p.psi) *
         std::log(8.0 * double(p.card_gamma) * double(p.card_H) / (p.delta * p.lambda));
}

double graph_pre(const BoundParams& p) {
  return p.c_graph * (double(p.d) + std::log(double(p.card_gamma) * double(p.card_Y) / p.delta)) /
         (p.epsilon * p.epsilon * p.psi * p.psi * p.gamma);
}

}  // namespace

TEST(FiniteClassBound, WorkedExample) {
  const auto s = finite_class_bound(finite_example());
  ASSERT_FALSE(s.astronomical);
  EXPECT_EQ(s.value, 198545u);
  EXPECT_EQ(s.value, static_cast<std::uint64_t>(std::ceil(finite_pre(finite_example()))));
}

TEST(FiniteClassBound, DoublingClassAddsLogTwo) {
  BoundParams p = finite_example();
  BoundParams q = p;
  q.card_H *= 2;
  const double coeff = 8.0 / (p.epsilon * p.epsilon * p.gamma * p.psi);
  EXPECT_NEAR(finite_pre(q) - finite_pre(p), coeff * std::log(2.0), 1e-6);
  EXPECT_EQ(finite_class_bound(q).value,
            static_cast<std::uint64_t>(std::ceil(finite_pre(p) + coeff * std::log(2.0))));
}

TEST(FiniteClassBound, HalvingEpsilonQuadruples) {
  BoundParams p = finite_example();
  BoundParams q = p;
  q.epsilon = p.epsilon / 2.0;
  EXPECT_NEAR(finite_pre(q), 4.0 * finite_pre(p), 1e-6);
}

TEST(GraphDimBound, LinearInConstantAndPsiScaling) {
  BoundParams p;
  p.epsilon = 0.2;
  p.delta = 0.05;
  p.gamma = 0.2;
  p.psi = 0.2;
  p.card_gamma = 5;
  p.card_Y = 4;
  p.d = 10;
  p.c_graph = 64.0;

  EXPECT_EQ(graph_dim_bound(p).value, 3198293u);
  EXPECT_EQ(graph_dim_bound(p).value, static_cast<std::uint64_t>(std::ceil(graph_pre(p))));

  BoundParams doubled = p;
  doubled.c_graph *= 2.0;
  EXPECT_NEAR(graph_pre(doubled), 2.0 * graph_pre(p), 1e-6);

  BoundParams halved_psi = p;
  halved_psi.psi = p.psi / 2.0;
  EXPECT_NEAR(graph_pre(halved_psi), 4.0 * graph_pre(p), 1e-5);
}

TEST(LowerBound, UnitCollapse) {
  BoundParams p;
  p.epsilon = 1.0;
  p.delta = std::exp(-1.0);
  p.gamma = 1.0;
  p.psi = 1.0;
  p.c_lower = 1.0;
  EXPECT_EQ(lower_bound(p).value, 1u);
}

TEST(LowerBound, HalvingGammaDoubles) {
  BoundParams p;
  p.epsilon = 0.1;
  p.delta = 0.05;
  p.gamma = 0.5;
  p.psi = 0.5;
  const double pre = p.c_lower * std::log(1.0 / p.delta) / (p.psi * p.gamma * p.epsilon * p.epsilon);
  BoundParams q = p;
  q.gamma /= 2.0;
  const double pre2 = q.c_lower * std::log(1.0 / q.delta) / (q.psi * q.gamma * q.epsilon * q.epsilon);
  EXPECT_NEAR(pre2, 2.0 * pre, 1e-9);
}

TEST(LowerBound, NeverExceedsFiniteClassBoundOnGrid) {
  // With unit constant the lower form stays below the finite-class form.
  for (double eps : {0.05, 0.1, 0.2, 0.5}) {
    for (double delta : {0.01, 0.05, 0.2}) {
      for (double gamma : {0.1, 0.3, 1.0}) {
        for (double psi : {0.1, 0.3, 1.0}) {
          BoundParams p;
          p.epsilon = eps;
          p.delta = delta;
          p.gamma = gamma;
          p.psi = psi;
          p.lambda = 0.25;
          p.card_gamma = 3;
          p.card_H = 7;
          p.c_lower = 1.0;
          EXPECT_LE(lower_bound(p).value, finite_class_bound(p).value);
        }
      }
    }
  }
}

TEST(SubpopulationCoverageBound, Examples) {
  EXPECT_EQ(subpopulation_coverage_bound(0.5, 2.0 / std::exp(1.0), 2).value, 16u);
  EXPECT_EQ(subpopulation_coverage_bound(0.1, 0.05, 10).value,
            static_cast<std::uint64_t>(std::ceil(80.0 * std::log(200.0))));
  // Halving gamma doubles the pre-ceiling value.
  const double pre1 = (8.0 / 0.4) * std::log(10.0 / 0.05);
  const double pre2 = (8.0 / 0.2) * std::log(10.0 / 0.05);
  EXPECT_NEAR(pre2, 2.0 * pre1, 1e-9);
  EXPECT_THROW(subpopulation_coverage_bound(0.0, 0.05, 2), std::invalid_argument);
  EXPECT_THROW(subpopulation_coverage_bound(0.5, 1.0, 2), std::invalid_argument);
}

TEST(ChernoffAbsoluteTail, ValuesAndAlgebra) {
  EXPECT_NEAR(chernoff_absolute_tail(100, 0.2), 2.0 * std::exp(-8.0), 1e-12);
  EXPECT_NEAR(chernoff_absolute_tail(100, 0.2), 6.709e-4, 1e-6);
  // Vacuous regime is clamped to 1.
  EXPECT_EQ(chernoff_absolute_tail(1, 1e-9), 1.0);
  // Doubling n squares the exponential factor: tail(2n) = tail(n)^2 / 2,
  // away from the clamp.
  const double t1 = chernoff_absolute_tail(500, 0.1);
  const double t2 = chernoff_absolute_tail(1000, 0.1);
  EXPECT_NEAR(t2, t1 * t1 / 2.0, 1e-12);
  EXPECT_THROW(chernoff_absolute_tail(0, 0.1), std::invalid_argument);
  EXPECT_THROW(chernoff_absolute_tail(10, 0.0), std::invalid_argument);
}

TEST(ChernoffRelativeTail, ValuesAndDomain) {
  EXPECT_EQ(chernoff_relative_tail(0.0, 0.5), 1.0);
  EXPECT_NEAR(chernoff_relative_tail(8.0, 0.5), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(chernoff_relative_tail(8.0, 0.5), 0.3679, 1e-4);
  EXPECT_THROW(chernoff_relative_tail(8.0, 1.0), std::invalid_argument);
  EXPECT_THROW(chernoff_relative_tail(-1.0, 0.5), std::invalid_argument);
}

TEST(BinaryUcBound, Examples) {
  EXPECT_EQ(binary_uc_bound(0, 1.0, std::exp(-1.0), 8.0).value, 8u);
  EXPECT_EQ(binary_uc_bound(5, 0.1, 0.05, 8.0).value,
            static_cast<std::uint64_t>(std::ceil(800.0 * (5.0 + std::log(20.0)))));
  // Linear in d (pre-ceiling).
  const double d1 = 8.0 * (7.0 + std::log(20.0)) / 0.01;
  const double d2 = 8.0 * (14.0 + std::log(20.0)) / 0.01;
  EXPECT_NEAR(d2 - d1, 8.0 * 7.0 / 0.01, 1e-6);
}

TEST(Bounds, MonotoneInEveryParameter) {
  // Antitone in epsilon, delta, gamma, psi, lambda; isotone in the counts.
  SplitMix64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    BoundParams p;
    p.epsilon = 0.05 + 0.9 * rng.next_unit();
    p.delta = 0.05 + 0.9 * rng.next_unit();
    p.gamma = 0.05 + 0.9 * rng.next_unit();
    p.psi = 0.05 + 0.9 * rng.next_unit();
    p.lambda = 1.0 / double(1 + rng.next_below(10));
    p.card_gamma = 1 + rng.next_below(20);
    p.card_H = 1 + rng.next_below(50);
    p.card_Y = 1 + rng.next_below(8);
    p.d = rng.next_below(12);

    auto fpre = finite_pre(p);
    auto gpre = graph_pre(p);

    BoundParams q = p;
    q.epsilon = p.epsilon * 0.7;
    EXPECT_GT(finite_pre(q), fpre);
    EXPECT_GT(graph_pre(q), gpre);
    q = p;
    q.delta = p.delta * 0.7;
    EXPECT_GT(finite_pre(q), fpre);
    EXPECT_GT(graph_pre(q), gpre);
    q = p;
    q.gamma = p.gamma * 0.7;
    EXPECT_GT(finite_pre(q), fpre);
    EXPECT_GT(graph_pre(q), gpre);
    q = p;
    q.psi = p.psi * 0.7;
    EXPECT_GT(finite_pre(q), fpre);
    EXPECT_GT(graph_pre(q), gpre);
    q = p;
    q.lambda = p.lambda * 0.5;
    EXPECT_GT(finite_pre(q), fpre);
    q = p;
    q.card_H = p.card_H * 2;
    EXPECT_GT(finite_pre(q), fpre);
    q = p;
    q.card_gamma = p.card_gamma * 2;
    EXPECT_GT(finite_pre(q), fpre);
    EXPECT_GT(graph_pre(q), gpre);
    q = p;
    q.card_Y = p.card_Y * 2;
    EXPECT_GT(graph_pre(q), gpre);
    q = p;
    q.d = p.d + 3;
    EXPECT_GT(graph_pre(q), gpre);
  }
}

TEST(Bounds, AstronomicalFlagInsteadOfSaturation) {
  BoundParams p;
  p.epsilon = 1e-12;  // not in (0,1]? it is in (0,1]; formula blows up
  p.delta = 1e-3;
  p.gamma = 1e-3;
  p.psi = 1e-3;
  p.lambda = 1e-3;
  p.card_gamma = 1000;
  p.card_H = 1000000;
  const auto s = finite_class_bound(p);
  EXPECT_TRUE(s.astronomical);
}

TEST(AchievableEpsilon, FiniteRoundTrip) {
  BoundParams p = finite_example();
  const auto m = finite_class_bound(p);
  ASSERT_FALSE(m.astronomical);
  const auto eps = achievable_epsilon(m.value, p, BoundMode::kFiniteClass);
  ASSERT_TRUE(eps.has_value());
  EXPECT_LE(*eps, p.epsilon + std::abs(std::nextafter(p.epsilon, 1.0) - p.epsilon));
  // Feasibility at the returned value.
  BoundParams q = p;
  q.epsilon = *eps;
  EXPECT_LE(finite_class_bound(q).value, m.value);
}

TEST(AchievableEpsilon, InfeasibleWhenMTooSmall) {
  BoundParams p = finite_example();
  EXPECT_FALSE(achievable_epsilon(1, p, BoundMode::kFiniteClass).has_value());
  EXPECT_FALSE(achievable_epsilon(1, p, BoundMode::kGraphDimension).has_value());
}

TEST(AchievableEpsilon, GraphBisectionBrackets) {
  BoundParams p;
  p.delta = 0.05;
  p.gamma = 0.3;
  p.psi = 0.4;
  p.card_gamma = 5;
  p.card_Y = 4;
  p.d = 6;
  const std::uint64_t m = 4000000;
  const auto eps = achievable_epsilon(m, p, BoundMode::kGraphDimension);
  ASSERT_TRUE(eps.has_value());
  BoundParams q = p;
  q.epsilon = *eps;
  EXPECT_LE(graph_dim_bound(q).value, m);
  if (*eps - 1e-6 > 0.0) {
    q.epsilon = *eps - 1e-6;
    EXPECT_GT(graph_dim_bound(q).value, m);
  }
}

TEST(CategoryOccupancyThreshold, MatchesFormula) {
  BoundParams p = finite_example();
  const double expected =
      (2.0 / (p.epsilon * p.epsilon)) *
      std::log(8.0 * double(p.card_gamma) * double(p.card_H) / (p.delta * p.lambda));
  EXPECT_NEAR(category_occupancy_threshold(p), expected, 1e-9);
}
