#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rankone/error.hpp"
#include "rankone/numeric.hpp"

using namespace rankone;

TEST(ParseRational, AcceptsFractionsIntegersAndDecimals) {
  EXPECT_EQ(parse_rational("3/2"), Rational(3, 2));
  EXPECT_EQ(parse_rational("-7"), Rational(-7));
  EXPECT_EQ(parse_rational("1.25"), Rational(5, 4));
  EXPECT_EQ(parse_rational("-3e-2"), Rational(-3, 100));
  EXPECT_EQ(parse_rational("6/4"), Rational(3, 2));
}

TEST(ParseRational, RejectsGarbage) {
  EXPECT_THROW(parse_rational("abc"), ValidationError);
  EXPECT_THROW(parse_rational("1/0"), ValidationError);
  EXPECT_THROW(parse_rational(""), ValidationError);
}

TEST(RationalFromDouble, RoundTripsShortestDecimal) {
  EXPECT_EQ(rational_from_double(0.1), Rational(1, 10));
  EXPECT_EQ(rational_from_double(2.5), Rational(5, 2));
}

TEST(Rounding, FloorAndCeil) {
  EXPECT_EQ(floor_rational(Rational(15, 2)), 7);
  EXPECT_EQ(ceil_rational(Rational(15, 2)), 8);
  EXPECT_EQ(floor_rational(Rational(-1, 2)), -1);
  EXPECT_EQ(ceil_rational(Rational(-1, 2)), 0);
  EXPECT_TRUE(is_integer(Rational(4, 2)));
}

TEST(IrootFloor, MatchesBruteForce) {
  for (unsigned k = 1; k <= 5; ++k) {
    for (std::uint64_t x = 0; x < 3000; x += 7) {
      std::uint64_t r = 0;
      while (static_cast<double>(std::pow(static_cast<double>(r + 1), k)) <= static_cast<double>(x)) ++r;
      EXPECT_EQ(iroot_floor(BigInt(x), k), r) << x << " " << k;
    }
  }
}

TEST(FloorPow, ExactRationalExponents) {
  EXPECT_EQ(floor_pow(BigInt(8), Rational(4, 3)), 16);
  EXPECT_EQ(floor_pow(BigInt(4), Rational(3, 2)), 8);
  EXPECT_EQ(floor_pow(BigInt(2), Rational(1, 2)), 1);
  EXPECT_EQ(floor_pow(BigInt(10), Rational(0)), 1);
  EXPECT_EQ(floor_pow(Rational(8, 2), Rational(1)), 4);
  EXPECT_EQ(floor_pow(Rational(9, 4), Rational(1, 2)), 1);  // 3/2
}

TEST(FloorPow, AgreesWithLongDoubleAwayFromIntegers) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t b = gen() % 10000;
    const Rational a(static_cast<long>(gen() % 7 + 1), static_cast<long>(gen() % 5 + 1));
    const long double v = std::pow(static_cast<long double>(b), static_cast<long double>(to_double(a)));
    const long double fl = std::floor(v);
    if (v - fl < 1e-6L || fl + 1 - v < 1e-6L || v > 1e15L) continue;
    EXPECT_EQ(floor_pow(BigInt(b), a), BigInt(static_cast<std::uint64_t>(fl)));
  }
}

TEST(Binomial, SmallValues) {
  EXPECT_EQ(binomial(7, 5), 21);
  EXPECT_EQ(binomial(4, 3), 4);
  EXPECT_EQ(binomial(5, 0), 1);
  EXPECT_EQ(binomial(3, 5), 0);
  EXPECT_EQ(binomial(60, 30), BigInt("118264581564861424"));
}

TEST(PowBig, Values) {
  EXPECT_EQ(pow_big(2, 100), BigInt(1) << 100);
  EXPECT_EQ(pow_big(7, 0), 1);
}

TEST(LogBig, HugeValues) {
  EXPECT_NEAR(log_big(BigInt(1) << 5000), 5000 * std::log(2.0), 1e-9);
  EXPECT_NEAR(log_big(BigInt(12345)), std::log(12345.0), 1e-12);
}

TEST(CheckedArithmetic, DetectsOverflow) {
  EXPECT_FALSE(checked_add(~std::uint64_t{0}, 1).has_value());
  EXPECT_EQ(*checked_add(2, 3), 5U);
  EXPECT_FALSE(checked_mul(std::uint64_t{1} << 33, std::uint64_t{1} << 31).has_value());
  EXPECT_EQ(*checked_mul(6, 7), 42U);
  EXPECT_FALSE(to_u64(BigInt(1) << 64).has_value());
  EXPECT_THROW(require_u64(BigInt(1) << 64, "x"), ResourceGuardError);
}

TEST(EntropyTerm, Values) {
  EXPECT_EQ(entropy_term(0.0), 0.0);
  EXPECT_EQ(entropy_term(1.0), 0.0);
  EXPECT_NEAR(entropy_term(0.5), 0.5 * std::log(2.0), 1e-15);
}

TEST(FormatFixed, StableText) {
  EXPECT_EQ(format_fixed(0.5), "0.500000000000");
  EXPECT_EQ(format_fixed(-0.0), "0.000000000000");
  EXPECT_EQ(format_fixed(-1e-20), "0.000000000000");
  EXPECT_EQ(format_fixed(std::log(2.0) / 2), "0.346573590280");
  EXPECT_EQ(format_fixed(INFINITY), "inf");
}

TEST(ToString, Rationals) {
  EXPECT_EQ(to_string(Rational(2, 7)), "2/7");
  EXPECT_EQ(to_string(Rational(3)), "3");
}
