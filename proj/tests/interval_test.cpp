#include <gtest/gtest.h>

#include "checks.hpp"

namespace {

using namespace scenegen;

TEST(Interval, RejectsReversedBounds) { EXPECT_THROW(Interval(2.0, 1.0), std::invalid_argument); }

TEST(Interval, ArithmeticMatchesEndpointFormulas) {
  const Interval a(1, 3), b(-2, 5);
  EXPECT_EQ(add(a, b), Interval(-1, 8));
  EXPECT_EQ(sub(a, b), Interval(-4, 5));
  EXPECT_EQ(scale_shift(a, -2.0, 1.0), Interval(-5, -1));
  EXPECT_EQ(scale_shift(a, 0.0, 4.0), Interval(4.0));
  EXPECT_EQ(-a, Interval(-3, -1));
}

TEST(Interval, SplitCoversAndSharesMidpoint) {
  const auto [l, h] = split(Interval(0, 3));
  EXPECT_EQ(l, Interval(0, 1.5));
  EXPECT_EQ(h, Interval(1.5, 3));
}

TEST(Interval, IntersectAndHull) {
  EXPECT_EQ(*intersect(Interval(0, 2), Interval(1, 3)), Interval(1, 2));
  EXPECT_EQ(*intersect(Interval(0, 1), Interval(1, 3)), Interval(1.0));
  EXPECT_FALSE(intersect(Interval(0, 1), Interval(1.5, 3)));
  EXPECT_EQ(hull(Interval(0, 1), Interval(4, 5)), Interval(0, 5));
}

TEST(Interval, LessThanIsThreeValued) {
  EXPECT_EQ(lt(Interval(0, 1), Interval(2, 3)), Tribool::True);
  EXPECT_EQ(lt(Interval(2, 3), Interval(0, 1)), Tribool::False);
  EXPECT_EQ(lt(Interval(0, 2), Interval(1, 3)), Tribool::Maybe);
  // Touching endpoints: x < y fails at x = y = 1, so not definitely true.
  EXPECT_EQ(lt(Interval(0, 1), Interval(1, 2)), Tribool::Maybe);
  EXPECT_EQ(lt(Interval(1.0), Interval(1.0)), Tribool::False);
  EXPECT_EQ(le(Interval(0, 1), Interval(1, 2)), Tribool::True);
}

TEST(Interval, EqualityWithTolerance) {
  EXPECT_EQ(eq_tol(Interval(0.0), Interval(0.1), 0.2), Tribool::True);
  EXPECT_EQ(eq_tol(Interval(0.0), Interval(0.5), 0.2), Tribool::False);
  EXPECT_EQ(eq_tol(Interval(0, 0.3), Interval(0.1), 0.2), Tribool::True);
  EXPECT_EQ(eq_tol(Interval(0, 0.4), Interval(0.1), 0.2), Tribool::Maybe);
}

TEST(Kleene, TruthTables) {
  const Tribool all[] = {Tribool::False, Tribool::Maybe, Tribool::True};
  for (Tribool a : all) {
    EXPECT_EQ(!!a, a);
    for (Tribool b : all) {
      EXPECT_EQ(a && b, std::min(a, b));
      EXPECT_EQ(a || b, std::max(a, b));
      EXPECT_EQ(!(a && b), !a || !b);
    }
  }
  EXPECT_EQ(Tribool::Maybe && Tribool::False, Tribool::False);
  EXPECT_EQ(Tribool::Maybe || Tribool::True, Tribool::True);
}

TEST(Kleene, LogicalIntervalEncodingRoundTrips) {
  for (Tribool t : {Tribool::False, Tribool::Maybe, Tribool::True}) EXPECT_EQ(decode(encode(t)), t);
  EXPECT_THROW(decode(Interval(0.2, 0.3)), std::invalid_argument);
}

TEST(IntervalProperties, ContainmentAndMonotonicity) {
  const auto c = checks::interval_kernel(2000, 5);
  EXPECT_EQ(c.violations, 0u);
}

}  // namespace
