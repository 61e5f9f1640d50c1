#include <random>

#include <gtest/gtest.h>

#include "divfield/rational.hpp"

namespace divfield {
namespace {

TEST(Rational, NormalizesSignAndTerms) {
  const Rational r(6, -4);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 2);
  EXPECT_EQ(Rational(0, -7), Rational(0));
  EXPECT_EQ(Rational(0, -7).den(), 1);
}

TEST(Rational, ZeroDenominatorThrows) { EXPECT_THROW(Rational(1, 0), std::domain_error); }

TEST(Rational, ArithmeticAndOrdering) {
  EXPECT_EQ(Rational(1, 9) + Rational(7, 9) + Rational(1, 9), Rational(1));
  EXPECT_EQ(Rational(1, 2) - Rational(1, 3), Rational(1, 6));
  EXPECT_EQ(Rational(2, 3) * Rational(9, 4), Rational(3, 2));
  EXPECT_EQ(Rational(2, 3) / Rational(4, 9), Rational(3, 2));
  EXPECT_LT(Rational(36, 49), Rational(3, 4));
  EXPECT_GT(Rational(-1, 3), Rational(-1, 2));
  EXPECT_EQ(abs(Rational(-5, 7)), Rational(5, 7));
}

TEST(Rational, HugeDenominatorsStayExact) {
  // (2^31 - 1)^2 is the largest denominator of any single-level law.
  const i128 s = (i128{1} << 31) - 1;
  const Rational p(s * s - 1, s * s);
  EXPECT_EQ(p + Rational(1, s * s), Rational(1));
  EXPECT_EQ(to_string(s * s), "4611686014132420609");
}

TEST(Rational, StringRoundTrip) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 200; ++i) {
    const i128 v = (static_cast<i128>(gen()) << 40) - static_cast<i128>(gen());
    EXPECT_EQ(parse_i128(to_string(v)), v);
  }
  EXPECT_THROW(parse_i128("12a"), std::invalid_argument);
  EXPECT_THROW(parse_i128("-"), std::invalid_argument);
}

}  // namespace
}  // namespace divfield
