#include "rankone/numeric.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "rankone/error.hpp"

namespace rankone {

namespace mp = boost::multiprecision;

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation:
      return 2;
    case ErrorKind::resource_guard:
      return 3;
    case ErrorKind::search_exhausted:
      return 4;
    case ErrorKind::escape:
    case ErrorKind::convergence:
      return 1;
  }
  return 1;
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

BigInt parse_digits(std::string_view s) {
  BigInt out = 0;
  for (char c : s) out = out * 10 + (c - '0');
  return out;
}

Rational parse_decimal(std::string_view text, std::string_view original) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6) {
      throw ValidationError("malformed number '" + std::string(original) + "'");
    }
    exponent = std::stoll(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }
  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part))) {
    throw ValidationError("malformed number '" + std::string(original) + "'");
  }
  BigInt mantissa = parse_digits(std::string(int_part) + std::string(frac_part));
  exponent -= static_cast<long long>(frac_part.size());
  Rational value(mantissa);
  const BigInt scale = pow_big(10, static_cast<std::uint64_t>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) {
    value /= Rational(scale);
  } else {
    value *= Rational(scale);
  }
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view original = text;
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw ValidationError("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash), original);
    Rational den = parse_decimal(text.substr(slash + 1), original);
    if (den == 0) throw ValidationError("zero denominator in '" + std::string(original) + "'");
    return num / den;
  }
  return parse_decimal(text, original);
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw ValidationError("non-finite number");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ValidationError("cannot format number");
  return parse_rational(std::string_view(buf, static_cast<std::size_t>(end - buf)));
}

std::string to_string(const Rational& value) {
  if (mp::denominator(value) == 1) return mp::numerator(value).str();
  return mp::numerator(value).str() + "/" + mp::denominator(value).str();
}

double to_double(const Rational& value) {
  mp::cpp_bin_float_100 num(mp::numerator(value));
  mp::cpp_bin_float_100 den(mp::denominator(value));
  return static_cast<double>(num / den);
}

double to_double(const BigInt& value) { return static_cast<double>(mp::cpp_bin_float_100(value)); }

bool is_integer(const Rational& value) { return mp::denominator(value) == 1; }

BigInt floor_rational(const Rational& value) {
  BigInt q = mp::numerator(value) / mp::denominator(value);
  if (value < 0 && q * mp::denominator(value) != mp::numerator(value)) q -= 1;
  return q;
}

BigInt ceil_rational(const Rational& value) {
  BigInt f = floor_rational(value);
  return Rational(f) == value ? f : f + 1;
}

BigInt pow_big(const BigInt& base, std::uint64_t exponent) {
  BigInt result = 1;
  BigInt b = base;
  while (exponent > 0) {
    if (exponent & 1U) result *= b;
    exponent >>= 1U;
    if (exponent > 0) b *= b;
  }
  return result;
}

BigInt iroot_floor(const BigInt& x, unsigned k) {
  if (x < 0) throw ValidationError("iroot_floor of a negative number");
  if (k == 0) throw ValidationError("iroot_floor with k = 0");
  if (k == 1 || x < 2) return x;
  const std::size_t bits = mp::msb(x) + 1;
  BigInt y = BigInt(1) << ((bits + k - 1) / k);  // y^k > x
  // Newton iteration from above converges monotonically to floor.
  for (;;) {
    BigInt next = ((k - 1) * y + x / pow_big(y, k - 1)) / k;
    if (next >= y) break;
    y = next;
  }
  while (pow_big(y, k) > x) y -= 1;
  while (pow_big(y + 1, k) <= x) y += 1;
  return y;
}

BigInt floor_pow(const BigInt& base, const Rational& alpha) {
  if (alpha < 0) throw ValidationError("floor_pow requires a nonnegative exponent");
  const BigInt p = mp::numerator(alpha);
  const BigInt q = mp::denominator(alpha);
  const auto p64 = to_u64(p);
  const auto q64 = to_u64(q);
  if (!p64 || !q64 || *q64 > std::numeric_limits<unsigned>::max()) {
    throw ValidationError("exponent " + to_string(alpha) + " is too large for exact evaluation");
  }
  return iroot_floor(pow_big(base, *p64), static_cast<unsigned>(*q64));
}

BigInt floor_pow(const Rational& base, const Rational& alpha) {
  if (base < 0) throw ValidationError("floor_pow requires a nonnegative base");
  if (alpha < 0) throw ValidationError("floor_pow requires a nonnegative exponent");
  const auto p64 = to_u64(mp::numerator(alpha));
  const auto q64 = to_u64(mp::denominator(alpha));
  if (!p64 || !q64 || *q64 > std::numeric_limits<unsigned>::max()) {
    throw ValidationError("exponent " + to_string(alpha) + " is too large for exact evaluation");
  }
  // k^q <= (a/b)^p  <=>  k^q <= floor(a^p / b^p)
  const BigInt num = pow_big(mp::numerator(base), *p64);
  const BigInt den = pow_big(mp::denominator(base), *p64);
  return iroot_floor(num / den, static_cast<unsigned>(*q64));
}

double log_big(const BigInt& value) {
  if (value <= 0) throw ValidationError("log of a nonpositive integer");
  const std::size_t bits = mp::msb(value) + 1;
  if (bits <= 1000) return std::log(to_double(value));
  const std::size_t shift = bits - 64;
  const BigInt top = value >> shift;
  return std::log(to_double(top)) + static_cast<double>(shift) * std::log(2.0);
}

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= (n - k + i);
    result /= i;
  }
  return result;
}

std::optional<std::uint64_t> to_u64(const BigInt& value) {
  if (value < 0 || value > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  return static_cast<std::uint64_t>(value);
}

std::uint64_t require_u64(const BigInt& value, std::string_view what) {
  auto v = to_u64(value);
  if (!v) {
    throw ResourceGuardError(std::string(what) + " = " + value.str() +
                             " exceeds 64-bit addressing; choose a lower stage");
  }
  return *v;
}

std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) return std::nullopt;
  return out;
}

std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) return std::nullopt;
  return out;
}

double entropy_term(double x) {
  if (x <= 0.0) return 0.0;
  return -x * std::log(x);
}

std::string format_fixed(double value, int precision) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
  std::string out(buf);
  // "-0.000000000000" after rounding reads as a sign error in diffs
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

}  // namespace rankone
