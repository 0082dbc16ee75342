#include <gtest/gtest.h>

#include <cmath>

#include "rankone/error.hpp"
#include "rankone/recipes.hpp"

using namespace rankone;

TEST(Recipe, ParseNames) {
  EXPECT_EQ(recipe_from_string("1.5i"), Recipe::positive_polynomial);
  EXPECT_EQ(recipe_from_string("1.5ii"), Recipe::positive_nlog);
  EXPECT_EQ(recipe_from_string("1.6"), Recipe::flexible);
  EXPECT_THROW(recipe_from_string("1.7"), ValidationError);
}

TEST(Recipe, PolynomialExample) {
  RecipeInput in;
  in.recipe = Recipe::positive_polynomial;
  in.alpha = Rational(2);
  in.beta = 1;
  in.gamma = Rational(3, 2);
  in.h = 4;
  const auto b = recipe_params(in);
  EXPECT_EQ(*b.N0, 5);
  EXPECT_EQ(*b.q, 32);
  EXPECT_EQ(*b.N, 8);
  EXPECT_FALSE(b.notes.empty());  // 7.5 rounded up
  EXPECT_EQ(*b.rate, Rational(1, 3));
  EXPECT_NEAR(*b.log_delta, -(1.0 / 3) * 8 * std::log(2.0), 1e-12);
}

TEST(Recipe, PolynomialRangeViolation) {
  RecipeInput in;
  in.recipe = Recipe::positive_polynomial;
  in.alpha = Rational(3, 2);
  in.beta = 1;
  in.h = 4;
  EXPECT_THROW(recipe_params(in), ValidationError);
  in.alpha.reset();
  EXPECT_THROW(recipe_params(in), ValidationError);
}

TEST(Recipe, NlogVariant) {
  RecipeInput in;
  in.recipe = Recipe::positive_nlog;
  in.alpha = Rational(1);
  in.beta = 1;
  in.h = 2;
  const auto b = recipe_params(in);
  EXPECT_EQ(*b.N0, 21);  // floor(e^3) + 1
  EXPECT_EQ(*b.q, BigInt(1) << 21);
  EXPECT_EQ(*b.N, 32);  // ceil(31.5)
}

TEST(Recipe, FailureBoundsWithTerms) {
  RecipeInput in;
  in.recipe = Recipe::positive_polynomial;
  in.alpha = Rational(2);
  in.h = 4;
  for (std::uint64_t n = 1; n <= 10; ++n) in.A.push_back(n * n);
  const auto b = recipe_params(in);
  ASSERT_TRUE(b.m && b.log_failure_t && b.log_failure_m);
  EXPECT_EQ(*b.m, 64 / 4 + 2);
  // 3^N exp(-2 floor(q / t_N) delta^2) with q = 32, t_N = 64: floor = 0.
  EXPECT_NEAR(*b.log_failure_t, 8 * std::log(3.0), 1e-12);
  const double delta = std::exp(*b.log_delta);
  EXPECT_NEAR(*b.log_failure_m, 8 * std::log(3.0) - 2.0 * 1 * delta * delta, 1e-12);
}

TEST(Recipe, FlexibleExamples) {
  RecipeInput in;
  in.recipe = Recipe::flexible;
  in.beta = 1;
  in.kappa = 2;
  in.h = 10;
  auto b = recipe_params(in);
  EXPECT_EQ(*b.q, 1025);
  EXPECT_EQ(b.alpha, 2);
  EXPECT_EQ(*b.N, 3);
  in.h = 2;
  b = recipe_params(in);
  EXPECT_EQ(*b.q, 5);
  EXPECT_FALSE(b.N.has_value());
  EXPECT_FALSE(b.notes.empty());
  in.alpha = Rational(3);
  EXPECT_THROW(recipe_params(in), ValidationError);
}

TEST(Recipe, FlexibleNonIntegerBeta) {
  RecipeInput in;
  in.recipe = Recipe::flexible;
  in.beta = Rational(1, 2);
  in.kappa = 2;
  in.h = 16;
  const auto b = recipe_params(in);
  EXPECT_EQ(*b.q, 17);  // 2^4 + 1
  EXPECT_EQ(b.alpha, 3);
}

TEST(Flexibility, ExampleValues) {
  const auto f = flexibility_bounds(2, 1, std::sqrt(2.0));
  EXPECT_NEAR(f.lower, 0.5 * std::log(2.0), 1e-12);
  EXPECT_NEAR(f.upper, std::sqrt(2.0) * std::log(2.0), 1e-12);
  EXPECT_NEAR(f.lower, 0.346574, 1e-6);
  EXPECT_NEAR(f.upper, 0.980258, 1e-6);
}

TEST(Flexibility, CanonicalKappaGivesTheConstants) {
  for (double beta : {0.5, 1.0, 2.0}) {
    for (double L : {2.0, 4.0, 8.0}) {
      const auto f = flexibility_bounds(L, beta, canonical_kappa(L, beta));
      EXPECT_NEAR(f.lower, beta / (1 + beta) * std::log(L), 1e-12);
      EXPECT_NEAR(f.upper, std::pow(2 * beta, 1 / (1 + beta)) * std::log(L), 1e-12);
      EXPECT_NEAR(f.c1_log_L, f.lower, 1e-12);
      EXPECT_NEAR(f.c2_log_L, f.upper, 1e-12);
    }
  }
}

TEST(Flexibility, LowerNeverExceedsUpper) {
  for (double beta = 0.25; beta <= 4.0; beta += 0.25) {
    for (double L = 2; L <= 32; L *= 2) {
      for (double kappa = 1.1; kappa <= 40; kappa *= 1.7) {
        const auto f = flexibility_bounds(L, beta, kappa);
        EXPECT_LE(f.lower, f.upper + 1e-12) << beta << " " << L << " " << kappa;
      }
    }
  }
  EXPECT_THROW(flexibility_bounds(1.5, 1, 2), ValidationError);
  EXPECT_THROW(flexibility_bounds(2, 0, 2), ValidationError);
  EXPECT_THROW(flexibility_bounds(2, 1, 1), ValidationError);
}
