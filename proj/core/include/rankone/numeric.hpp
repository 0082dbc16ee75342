#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace rankone {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "p/q", integers, and decimal/scientific literals ("1.25", "-3e-2"),
// all converted exactly.
Rational parse_rational(std::string_view text);

// Exact rational value of a double, via its shortest round-trip decimal form.
Rational rational_from_double(double value);

std::string to_string(const Rational& value);
double to_double(const Rational& value);
double to_double(const BigInt& value);

bool is_integer(const Rational& value);
BigInt floor_rational(const Rational& value);
BigInt ceil_rational(const Rational& value);

// floor(x^(1/k)) for x >= 0, k >= 1.
BigInt iroot_floor(const BigInt& x, unsigned k);

// floor(base^alpha) for base >= 0 and rational alpha >= 0; exact.
BigInt floor_pow(const BigInt& base, const Rational& alpha);
// floor(base^alpha) for rational base >= 0 and rational alpha >= 0; exact.
BigInt floor_pow(const Rational& base, const Rational& alpha);

// Natural log of a positive integer of any size.
double log_big(const BigInt& value);

BigInt pow_big(const BigInt& base, std::uint64_t exponent);
BigInt binomial(std::uint64_t n, std::uint64_t k);

std::optional<std::uint64_t> to_u64(const BigInt& value);

// Throws ResourceGuardError with `what` when the value does not fit.
std::uint64_t require_u64(const BigInt& value, std::string_view what);

std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b);
std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b);

// f(x) = -x log x with f(0) = 0, natural log.
double entropy_term(double x);

// Fixed-precision decimal used by every CSV/summary writer.
std::string format_fixed(double value, int precision = 12);

}  // namespace rankone
