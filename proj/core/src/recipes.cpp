#include "rankone/recipes.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "rankone/error.hpp"

namespace rankone {

namespace {

namespace mp = boost::multiprecision;
using Float = mp::cpp_bin_float_100;

constexpr std::size_t kMaxExponentBits = std::size_t{1} << 22;

Float to_float(const Rational& r) { return Float(mp::numerator(r)) / Float(mp::denominator(r)); }

BigInt floor_float(const Float& x) { return BigInt(mp::floor(x)); }

// log(floor(q / d)) for q, d > 0; -inf when the quotient is zero.
double log_quotient(const BigInt& q, const BigInt& d) {
  const BigInt f = q / d;
  if (f == 0) return -INFINITY;
  return log_big(f);
}

// Natural log of base^N exp(-2 count delta^2), from N log base, log count and log delta.
double log_failure(double n_log_base, double log_count, double log_delta) {
  if (std::isinf(log_count) && log_count < 0) return n_log_base;
  return n_log_base - 2.0 * std::exp(log_count + 2.0 * log_delta);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

std::string_view to_string(Recipe r) noexcept {
  switch (r) {
    case Recipe::positive_polynomial:
      return "1.5i";
    case Recipe::positive_nlog:
      return "1.5ii";
    case Recipe::flexible:
      return "1.6";
  }
  return "1.5i";
}

Recipe recipe_from_string(std::string_view text) {
  if (text == "1.5i") return Recipe::positive_polynomial;
  if (text == "1.5ii") return Recipe::positive_nlog;
  if (text == "1.6") return Recipe::flexible;
  throw ValidationError("recipe must be one of 1.5i, 1.5ii, 1.6; got '" + std::string(text) + "'");
}

RecipeBundle recipe_params(const RecipeInput& in) {
  RecipeBundle b;
  b.recipe = in.recipe;
  require(in.beta > 0, "beta must be positive");
  require(in.h >= 1, "h_n must be positive");

  if (in.recipe == Recipe::flexible) {
    const Rational alpha = 1 + 1 / in.beta;
    if (in.alpha && *in.alpha != alpha) {
      throw ValidationError("recipe 1.6 requires alpha = 1 + 1/beta = " + to_string(alpha) + ", got " +
                            to_string(*in.alpha));
    }
    require(in.kappa > 1, "recipe 1.6 requires kappa > 1");
    require(in.L >= 2, "recipe 1.6 requires L >= 2");
    require(in.eps >= 0 && in.eps < Rational(1, 2), "recipe 1.6 requires 0 <= eps < 1/2");
    b.alpha = alpha;
    const BigInt h1 = in.h1.value_or(in.h);
    if (h1 <= in.L) b.notes.push_back("the construction assumes h_1 > L; h_1 = " + h1.str());

    // q = floor(kappa^(h^beta)) + 1
    double hb = 0.0;
    if (is_integer(in.beta)) {
      const BigInt e = pow_big(in.h, static_cast<std::uint64_t>(floor_rational(in.beta)));
      if (e > kMaxExponentBits) throw ResourceGuardError("h^beta = " + e.str() + " is too large to expand q exactly");
      const auto e64 = static_cast<std::uint64_t>(e);
      const BigInt num = pow_big(mp::numerator(in.kappa), e64);
      const BigInt den = pow_big(mp::denominator(in.kappa), e64);
      b.q = num / den + 1;
      hb = to_double(e);
    } else {
      const Float hbf = mp::pow(Float(in.h), to_float(in.beta));
      hb = static_cast<double>(hbf);
      const Float x = mp::pow(to_float(in.kappa), hbf);
      if (hb * std::log(to_double(in.kappa)) > 1e6) throw ResourceGuardError("kappa^(h^beta) is too large to expand");
      b.q = floor_float(x) + 1;
      b.notes.push_back("q evaluated in 100-digit floating point since h^beta is irrational");
    }

    // N = floor(((h - 2) / alpha)^beta) - 1
    if (in.h < 2) {
      b.notes.push_back("N undefined for h < 2");
    } else {
      const BigInt n = floor_pow(Rational(in.h - 2) / alpha, in.beta) - 1;
      if (n < 1) {
        b.notes.push_back("N = " + n.str() + " is not a positive length at h = " + in.h.str());
      } else {
        b.N = n;
      }
    }

    const double log_kappa = to_double(in.kappa) > 0 ? std::log(to_double(in.kappa)) : 0.0;
    b.log_delta = -(0.5 - to_double(in.eps)) * hb * log_kappa;
    b.delta = std::exp(*b.log_delta);
    if (b.N && !in.A.empty()) {
      if (*b.N > in.A.size()) {
        b.notes.push_back("A has fewer than N terms; m and the failure bound are omitted");
      } else {
        const BigInt tN = in.A[static_cast<std::size_t>(*b.N) - 1];
        b.m = tN / in.h + 2;
        const double n_log = to_double(*b.N) * std::log(to_double(h1) + in.L);
        b.log_failure_m = log_failure(n_log, log_quotient(*b.q, *b.m), *b.log_delta);
      }
    }
    return b;
  }

  require(in.alpha.has_value(), "recipe " + std::string(to_string(in.recipe)) + " needs alpha");
  const Rational alpha = *in.alpha;
  require(alpha > 0, "alpha must be positive");
  require(in.gamma > 1, "gamma must exceed 1");
  require(in.eps >= 0 && in.eps < 1 / (2 * in.gamma), "eps must lie in [0, 1/(2 gamma))");
  b.alpha = alpha;

  if (in.recipe == Recipe::positive_polynomial) {
    if (alpha < 1 + 1 / in.beta) {
      throw ValidationError("recipe 1.5i requires alpha >= 1 + 1/beta = " + to_string(1 + 1 / in.beta));
    }
    b.N0 = floor_pow(in.h, in.beta) + 1;
  } else {
    if (alpha < 1 / in.beta) throw ValidationError("recipe 1.5ii requires alpha >= 1/beta = " + to_string(1 / in.beta));
    const Float hb = mp::pow(Float(in.h), to_float(in.beta));
    if (hb > 1e6) throw ResourceGuardError("e^(h^beta + 1) is too large to expand");
    b.N0 = floor_float(mp::exp(hb + 1)) + 1;
  }
  if (*b.N0 > kMaxExponentBits) throw ResourceGuardError("q = 2^" + b.N0->str() + " is too large to expand");
  b.q = BigInt(1) << static_cast<unsigned>(*b.N0);
  b.N = ceil_rational(in.gamma * Rational(*b.N0));
  if (!is_integer(in.gamma * Rational(*b.N0))) {
    b.notes.push_back("N = ceil(gamma N0) = " + b.N->str() + " rounded up from " + to_string(in.gamma * Rational(*b.N0)));
  }
  const Rational rate_a = 1 - 1 / in.gamma;
  const Rational rate_b = 1 / (2 * in.gamma) - in.eps;
  b.rate = std::max(rate_a, rate_b);

  // delta = 2^(-(1/(2 gamma) - eps) N)
  b.log_delta = -to_double(rate_b) * to_double(*b.N) * std::log(2.0);
  b.delta = std::exp(*b.log_delta);

  if (!in.A.empty()) {
    if (*b.N > in.A.size()) {
      b.notes.push_back("A has fewer than N terms; m and the failure bounds are omitted");
    } else {
      const BigInt tN = in.A[static_cast<std::size_t>(*b.N) - 1];
      b.m = tN / in.h + 2;
      const double n_log = to_double(*b.N) * std::log(3.0);
      b.log_failure_t = tN > 0 ? log_failure(n_log, log_quotient(*b.q, tN), *b.log_delta) : n_log;
      b.log_failure_m = log_failure(n_log, log_quotient(*b.q, *b.m), *b.log_delta);
    }
  }
  return b;
}

FlexibilityBounds flexibility_bounds(double L, double beta, double kappa) {
  if (!(L >= 2.0)) throw ValidationError("flexibility bounds need L >= 2");
  if (!(beta > 0.0)) throw ValidationError("flexibility bounds need beta > 0");
  if (!(kappa > 1.0)) throw ValidationError("flexibility bounds need kappa > 1");
  FlexibilityBounds f;
  const long double b = beta;
  const long double a = 1.0L + 1.0L / b;
  const long double logL = std::log(static_cast<long double>(L));
  const long double logK = std::log(static_cast<long double>(kappa));
  f.alpha = static_cast<double>(a);
  f.lower = static_cast<double>(std::pow(a, b) * std::min(std::pow(a, -1.0L - b) * logL, 0.5L * logK));
  f.upper = static_cast<double>((1.0L + b) * std::pow(std::pow(b, -b) * logK * std::pow(logL, b), 1.0L / (1.0L + b)));
  f.c1_log_L = static_cast<double>(b / (1.0L + b) * logL);
  f.c2_log_L = static_cast<double>(std::pow(2.0L * b, 1.0L / (1.0L + b)) * logL);
  return f;
}

double canonical_kappa(double L, double beta) {
  const long double a = 1.0L + 1.0L / beta;
  return static_cast<double>(std::pow(static_cast<long double>(L), 2.0L * std::pow(a, -1.0L - beta)));
}

}  // namespace rankone
