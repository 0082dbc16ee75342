#include "rankone/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankone/error.hpp"

namespace rankone {

namespace {

double log_binomial(double n, double k) { return std::lgamma(n + k + 1.0) - std::lgamma(n + 1.0) - std::lgamma(k + 1.0); }

// Exponential growth leaves no room for the balance condition; lists are the
// only sequence kind that can grow that fast.
void reject_exponential(const SamplingSequence& seq, std::uint64_t horizon) {
  if (seq.spec().kind != SequenceKind::explicit_list || horizon < 16) return;
  const auto t = seq.terms(horizon);
  std::uint64_t s_half = 0;
  std::uint64_t s_full = 0;
  const std::uint64_t half = horizon / 2;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    s_full = std::max(s_full, t[i + 1] - t[i]);
    if (i + 2 == half) s_half = s_full;
  }
  const double h = static_cast<double>(horizon);
  const double per_index = std::log(static_cast<double>(s_full)) / h;
  const double half_rate =
      (std::log(static_cast<double>(s_full)) - std::log(static_cast<double>(std::max<std::uint64_t>(s_half, 1)))) /
      static_cast<double>(horizon - half);
  if (per_index >= 0.1 && half_rate >= 0.1) {
    throw ValidationError(
        "exponential sampling sequence: the balance condition (c_n/n) log s_n -> 0 can no longer hold for any "
        "choice of c_n");
  }
}

}  // namespace

BigInt word_count_bound(std::uint64_t N, std::uint64_t c, const BigInt& h, std::uint64_t s) {
  return binomial(N + c, N) * (h + 1) * pow_big(BigInt(s) + 1, c);
}

double word_count_bound_lambda(const BigInt& h, std::uint64_t L, double lambda_N) {
  if (L < 1) throw ValidationError("L must be positive");
  return (to_double(h) + 1.0) * std::pow(static_cast<double>(L), lambda_N + 1.0);
}

std::set<CodedWord> brute_force_words(const Tower& tower, std::size_t r, std::size_t n,
                                      std::span<const std::uint64_t> offsets, std::uint64_t max_levels) {
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] <= offsets[i - 1]) throw ValidationError("offsets must be strictly increasing");
  }
  const CodingSpec spec{r, CodingMode::base};
  tower.check_spec(spec, n);
  const std::uint64_t t_last = offsets.empty() ? 0 : offsets.back();
  const ValidLevels K = tower.valid_levels(n, t_last);
  if (K.size() > max_levels) {
    throw ResourceGuardError("|K| = " + std::to_string(K.size()) + " exceeds the brute-force limit of " +
                             std::to_string(max_levels) + " levels");
  }
  std::set<CodedWord> words;
  for (const std::uint64_t k : K) words.insert(tower.code_orbit(spec, n, k, offsets));
  return words;
}

std::size_t select_tau_strict(std::span<const BigInt> heights, std::uint64_t t_N, std::uint64_t c_N) {
  if (c_N < 1) throw ValidationError("c_N must be at least 1");
  for (std::size_t i = 0; i < heights.size(); ++i) {
    if (heights[i] * c_N > t_N) return i + 1;
  }
  throw SearchExhaustedError("no available height satisfies h_n c_N > t_N = " + std::to_string(t_N) +
                             " with c_N = " + std::to_string(c_N) + "; add stages");
}

std::size_t select_tau_lambda(std::span<const BigInt> heights, std::uint64_t t_N, const Rational& lambda_N) {
  if (lambda_N <= 0) throw ValidationError("lambda N must be positive");
  for (std::size_t i = 0; i < heights.size(); ++i) {
    if (Rational(heights[i]) * lambda_N >= t_N) return i + 1;
  }
  throw SearchExhaustedError("no available height satisfies h_n >= t_N / (lambda N) = " +
                             to_string(Rational(t_N) / lambda_N) + "; add stages");
}

CSchedule CSchedule::power_for(const Rational& alpha, const Rational& beta) {
  if (beta <= 0) throw ValidationError("beta must be positive");
  CSchedule c;
  c.kind = CKind::power;
  c.exponent = (alpha - 1 / beta + 1) / 2;
  if (c.exponent < 0) throw ValidationError("c_n exponent (alpha - 1/beta + 1)/2 must be nonnegative");
  return c;
}

CSchedule CSchedule::loglog() {
  CSchedule c;
  c.kind = CKind::loglog;
  return c;
}

std::uint64_t CSchedule::at(std::uint64_t n) const {
  if (n < 1) throw ValidationError("c_n is indexed from n = 1");
  switch (kind) {
    case CKind::constant:
      if (constant < 1) throw ValidationError("constant c must be at least 1");
      return constant;
    case CKind::power:
      return std::max<std::uint64_t>(1, require_u64(floor_pow(BigInt(n), exponent), "c_n"));
    case CKind::loglog: {
      if (n < 3) return 1;
      const double ll = std::log(std::log(static_cast<double>(n)));
      return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(static_cast<double>(n) / (ll * ll))));
    }
    case CKind::custom:
      if (n > values.size()) {
        throw ValidationError("custom c schedule has " + std::to_string(values.size()) + " values; c_" +
                              std::to_string(n) + " requested");
      }
      if (values[n - 1] < 1) throw ValidationError("custom c_" + std::to_string(n) + " must be at least 1");
      return values[n - 1];
  }
  return 1;
}

std::string CSchedule::describe() const {
  switch (kind) {
    case CKind::constant:
      return "constant:" + std::to_string(constant);
    case CKind::power:
      return "power:" + to_string(exponent);
    case CKind::loglog:
      return "loglog";
    case CKind::custom:
      return "custom:" + std::to_string(values.size());
  }
  return "";
}

double Phi::operator()(double x) const {
  x = std::max(x, 1.0);
  switch (kind) {
    case PhiKind::log:
      return std::log(x);
    case PhiKind::power:
      return std::pow(x, beta);
    case PhiKind::exp_power:
      return std::exp(std::pow(x, beta));
  }
  return 0.0;
}

std::string Phi::describe() const {
  switch (kind) {
    case PhiKind::log:
      return "log";
    case PhiKind::power:
      return "power:" + format_fixed(beta, 6);
    case PhiKind::exp_power:
      return "exp_power:" + format_fixed(beta, 6);
  }
  return "";
}

namespace {

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_count(std::string_view text, std::string_view what) {
  const Rational r = parse_rational(text);
  if (!is_integer(r) || r < 1) throw ValidationError(std::string(what) + " must be a positive integer");
  return require_u64(floor_rational(r), what);
}

}  // namespace

CSchedule c_schedule_from_string(std::string_view text) {
  const auto parts = split_on(text, ':');
  const std::string_view kind = parts[0];
  if (kind == "constant" && parts.size() == 2) {
    CSchedule c;
    c.constant = parse_count(parts[1], "constant c");
    return c;
  }
  if (kind == "power" && parts.size() == 3) return CSchedule::power_for(parse_rational(parts[1]), parse_rational(parts[2]));
  if (kind == "loglog" && parts.size() == 1) return CSchedule::loglog();
  if (kind == "custom" && parts.size() == 2) {
    CSchedule c;
    c.kind = CKind::custom;
    for (auto v : split_on(parts[1], ',')) c.values.push_back(parse_count(v, "custom c_n"));
    return c;
  }
  throw ValidationError("c schedule must be constant:k, power:alpha:beta, loglog or custom:c1,c2,...; got '" +
                        std::string(text) + "'");
}

Phi phi_from_string(std::string_view text) {
  const auto parts = split_on(text, ':');
  Phi phi;
  if (parts[0] == "log" && parts.size() == 1) return phi;
  if ((parts[0] == "power" || parts[0] == "exp_power") && parts.size() == 2) {
    phi.kind = parts[0] == "power" ? PhiKind::power : PhiKind::exp_power;
    phi.beta = to_double(parse_rational(parts[1]));
    if (!(phi.beta > 0.0)) throw ValidationError("phi exponent must be positive");
    return phi;
  }
  throw ValidationError("phi must be log, power:beta or exp_power:beta; got '" + std::string(text) + "'");
}

BalancingProfile balancing_profile(const SamplingSequence& seq, const Phi& phi, const CSchedule& c,
                                   std::uint64_t horizon, std::span<const BigInt> heights) {
  if (horizon < 2) throw ValidationError("balancing profile needs horizon >= 2");
  if (horizon > seq.term_count()) {
    throw ValidationError("horizon " + std::to_string(horizon) + " exceeds the " + std::to_string(seq.term_count()) +
                          " available terms");
  }
  if (phi.kind != PhiKind::log && !(phi.beta > 0.0)) throw ValidationError("phi exponent beta must be positive");
  reject_exponential(seq, horizon);

  BalancingProfile p;
  p.phi = phi;
  p.c = c;
  p.horizon = horizon;
  p.rows.reserve(horizon - 1);
  const auto t = seq.terms(horizon);
  std::uint64_t s = 0;
  for (std::uint64_t n = 2; n <= horizon; ++n) {
    s = std::max(s, t[n - 1] - t[n - 2]);
    BalancingRow row;
    row.n = n;
    row.c = c.at(n);
    const double dn = static_cast<double>(n);
    const double dc = static_cast<double>(row.c);
    row.diag_balance = dc / dn * std::log(static_cast<double>(s));
    const double x = static_cast<double>(t[n - 1]) / dc;
    if (phi.kind == PhiKind::exp_power) {
      // (1/n) e^(x^beta), kept finite as long as possible
      const double log_value = std::pow(std::max(x, 1.0), phi.beta) - std::log(dn);
      row.diag_phi = log_value > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(log_value);
    } else {
      row.diag_phi = phi(x) / dn;
    }
    row.diag_binom = log_binomial(dn, dc) / dn;
    if (!heights.empty()) {
      try {
        row.tau = select_tau_strict(heights, t[n - 1], row.c);
      } catch (const SearchExhaustedError&) {
      }
    }
    p.rows.push_back(row);
  }
  return p;
}

bool trends_to_zero(std::span<const double> values_from_2) {
  const std::size_t horizon = values_from_2.size() + 1;
  if (horizon < 200) throw ValidationError("trend check needs a horizon of at least 200");
  auto at = [&](std::size_t n) { return values_from_2[n - 2]; };
  const std::size_t n_pct = std::max<std::size_t>(2, horizon / 100);
  const std::size_t n_dec = horizon / 10;
  if (!(at(horizon) < at(n_pct))) return false;
  double early_min = std::numeric_limits<double>::infinity();
  for (std::size_t n = n_pct; n <= n_dec; ++n) early_min = std::min(early_min, at(n));
  double late_max = -std::numeric_limits<double>::infinity();
  for (std::size_t n = n_dec + 1; n <= horizon; ++n) late_max = std::max(late_max, at(n));
  return late_max < early_min;
}

Thm16Estimate thm16_upper_estimate(double kappa, double beta, double L) {
  if (!(kappa > 1.0)) throw ValidationError("kappa must exceed 1");
  if (!(L >= 2.0)) throw ValidationError("L must be at least 2");
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  const double log_k = std::log(kappa);
  const double log_l = std::log(L);
  // f(lambda) = lambda^-beta log kappa - lambda log L / beta is decreasing.
  auto f = [&](double lam) { return std::pow(lam, -beta) * log_k - lam * log_l / beta; };
  double lo = 1.0;
  double hi = 1.0;
  while (f(lo) < 0.0) lo /= 2.0;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && lo < hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  Thm16Estimate e;
  e.lambda = 0.5 * (lo + hi);
  e.value = std::pow(e.lambda, -beta) * log_k + e.lambda * log_l;
  e.closed_form = (1.0 + beta) * std::pow(std::pow(beta, -beta) * log_k * std::pow(log_l, beta), 1.0 / (1.0 + beta));
  e.balance_residual = std::abs(f(e.lambda)) / (std::pow(e.lambda, -beta) * log_k);
  return e;
}

}  // namespace rankone
