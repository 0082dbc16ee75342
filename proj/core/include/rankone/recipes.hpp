#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankone/numeric.hpp"

namespace rankone {

enum class Recipe {
  positive_polynomial,  // Thm 1.5 (i): A = floor(n^alpha), alpha >= 1 + 1/beta
  positive_nlog,        // Thm 1.5 (ii): A = floor(n (log n)^alpha), alpha >= 1/beta
  flexible,             // Thm 1.6: alpha = 1 + 1/beta, spacers bounded by L - 1
};

std::string_view to_string(Recipe r) noexcept;
// Accepts "1.5i", "1.5ii", "1.6".
Recipe recipe_from_string(std::string_view text);

struct RecipeInput {
  Recipe recipe = Recipe::positive_polynomial;
  std::optional<Rational> alpha;  // required for the 1.5 recipes; derived for 1.6
  Rational beta = 1;
  std::uint32_t L = 2;
  Rational kappa = 2;
  Rational gamma = Rational(3, 2);
  Rational eps = 0;
  BigInt h = 2;                  // h_n
  std::optional<BigInt> h1;      // initial height for the (h + L)^N count; defaults to h
  std::vector<std::uint64_t> A;  // optional terms t_1, t_2, ... for m and the failure bound
};

struct RecipeBundle {
  Recipe recipe = Recipe::positive_polynomial;
  Rational alpha = 0;
  std::optional<BigInt> N0;
  std::optional<BigInt> N;
  std::optional<BigInt> q;
  std::optional<BigInt> m;          // floor(t_N / h_n) + 2, when t_N is known
  std::optional<double> log_delta;  // natural log of delta
  std::optional<double> delta;
  // log of the failure bound: 3^N exp(-2 floor(q / t_N) delta^2) and the same
  // with m in place of t_N (1.5); (h + L)^N exp(-2 floor(q / m) delta^2) (1.6).
  std::optional<double> log_failure_t;
  std::optional<double> log_failure_m;
  std::optional<Rational> rate;  // max{1 - 1/gamma, 1/(2 gamma) - eps} for 1.5
  std::vector<std::string> notes;
};

RecipeBundle recipe_params(const RecipeInput& in);

struct FlexibilityBounds {
  double alpha = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double c1_log_L = 0.0;
  double c2_log_L = 0.0;
};

// lower = alpha^beta log min{L^(alpha^(-1-beta)), kappa^(1/2)},
// upper = (1 + beta) (beta^(-beta) log kappa (log L)^beta)^(1/(1+beta)).
FlexibilityBounds flexibility_bounds(double L, double beta, double kappa);

// kappa = L^(2 alpha^(-1-beta)), where the two bounds become C_1 log L and C_2 log L.
double canonical_kappa(double L, double beta);

}  // namespace rankone
