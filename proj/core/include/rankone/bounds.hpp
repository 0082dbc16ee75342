#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankone/entropy.hpp"
#include "rankone/numeric.hpp"
#include "rankone/sampling.hpp"
#include "rankone/tower.hpp"

namespace rankone {

// binom(N + c, N) (h + 1) (s + 1)^c, exactly.
BigInt word_count_bound(std::uint64_t N, std::uint64_t c, const BigInt& h, std::uint64_t s);

// (h + 1) L^(lambda N + 1) for real lambda N.
double word_count_bound_lambda(const BigInt& h, std::uint64_t L, double lambda_N);

// Distinct phi_{xi_r, A, N}-words over K of S_n; refuses |K| > max_levels.
std::set<CodedWord> brute_force_words(const Tower& tower, std::size_t r, std::size_t n,
                                      std::span<const std::uint64_t> offsets,
                                      std::uint64_t max_levels = 1'000'000);

// min { n : h_n c_N > t_N } (1-based); SearchExhaustedError if none.
std::size_t select_tau_strict(std::span<const BigInt> heights, std::uint64_t t_N, std::uint64_t c_N);
// min { n : h_n >= t_N / (lambda N) } for rational lambda N > 0.
std::size_t select_tau_lambda(std::span<const BigInt> heights, std::uint64_t t_N, const Rational& lambda_N);

enum class CKind { constant, power, loglog, custom };

struct CSchedule {
  CKind kind = CKind::constant;
  std::uint64_t constant = 1;
  Rational exponent = 1;              // power: c_n = floor(n^exponent)
  std::vector<std::uint64_t> values;  // custom: c_1, c_2, ...

  // c_n = floor(n^((alpha - 1/beta + 1)/2)).
  static CSchedule power_for(const Rational& alpha, const Rational& beta);
  static CSchedule loglog();
  // c_n >= 1 always.
  std::uint64_t at(std::uint64_t n) const;
  std::string describe() const;
};

enum class PhiKind { log, power, exp_power };

struct Phi {
  PhiKind kind = PhiKind::log;
  double beta = 1.0;
  double operator()(double x) const;
  std::string describe() const;
};

// "constant:k", "power:alpha:beta", "loglog", "custom:c1,c2,...".
CSchedule c_schedule_from_string(std::string_view text);
// "log", "power:beta", "exp_power:beta".
Phi phi_from_string(std::string_view text);

struct BalancingRow {
  std::uint64_t n = 0;
  std::uint64_t c = 0;
  double diag_balance = 0.0;  // (c_n / n) log s_n
  double diag_phi = 0.0;      // (1/n) phi(t_n / c_n)
  double diag_binom = 0.0;    // (1/n) log binom(n + c_n, n)
  std::optional<std::size_t> tau;
};

struct BalancingProfile {
  Phi phi;
  CSchedule c;
  std::uint64_t horizon = 0;
  std::vector<BalancingRow> rows;  // rows[i].n = i + 2
};

// Rows for n = 2..horizon over the terms of seq. With heights, tau(n) is
// the strict selection for (t_n, c_n) when some height qualifies.
BalancingProfile balancing_profile(const SamplingSequence& seq, const Phi& phi, const CSchedule& c,
                                   std::uint64_t horizon, std::span<const BigInt> heights = {});

// Finite-horizon stand-in for a limit of zero: the value at the horizon is
// below the value at 1% of the horizon, and the maximum over
// [horizon/10, horizon] is below the minimum over [horizon/100, horizon/10].
bool trends_to_zero(std::span<const double> values_from_2);

struct Thm16Estimate {
  double lambda = 0.0;       // minimizer, from the balance equation
  double value = 0.0;        // lambda^-beta log kappa + lambda log L at the minimizer
  double closed_form = 0.0;  // (1 + beta) (beta^-beta log kappa (log L)^beta)^(1/(1+beta))
  double balance_residual = 0.0;
};

Thm16Estimate thm16_upper_estimate(double kappa, double beta, double L);

}  // namespace rankone
