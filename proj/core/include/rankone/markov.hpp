#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rankone/numeric.hpp"

namespace rankone {

using RationalMatrix = std::vector<std::vector<Rational>>;

// The (H+1)x(H+1) recursion matrix of p_s = (p_{s-H} + p_{s-H-1}) / 2:
// row 0 holds 1/2 in its last two columns, row i >= 1 holds 1 in column i-1.
struct MarkovModel {
  std::size_t H = 0;
  RationalMatrix matrix;
  std::vector<Rational> stationary_exact;  // filled by stationary_distribution
  std::vector<double> stationary;          // power iteration result
  std::uint64_t iterations = 0;
  double residual = 0.0;  // max_j |(pi P)_j - pi_j|
};

MarkovModel build_markov_matrix(std::size_t H);

// Unique left eigenvector of the matrix, by exact Gaussian elimination.
std::vector<Rational> stationary_linear_solve(const RationalMatrix& matrix);

struct PowerIteration {
  std::vector<double> pi;
  std::uint64_t iterations = 0;
  double residual = 0.0;
};

// Iterates pi <- pi P from the uniform vector until max |pi P - pi| <= tol.
PowerIteration stationary_power_iteration(const MarkovModel& model, double tol = 1e-14,
                                          std::uint64_t max_iterations = 50'000'000);

// Fills stationary and stationary_exact; throws ConvergenceError when the two
// disagree by more than agreement or power iteration does not converge.
MarkovModel stationary_distribution(MarkovModel model, double tol = 1e-14, double agreement = 1e-10);

double stationarity_residual(const RationalMatrix& matrix, const std::vector<double>& pi);

// w = v 0^{b_1} v ... 0^{b_{g-1}} v with v = 1 2 ... h, and the string
// w 0^{a_1} w 0^{a_2} ... with a_i i.i.d. uniform on {0, 1}.
struct BlockPattern {
  std::uint32_t h = 2;
  std::vector<std::uint32_t> b;  // g - 1 entries in {0, 1}

  std::uint32_t g() const noexcept { return static_cast<std::uint32_t>(b.size() + 1); }
  std::uint64_t H() const noexcept;
  std::vector<std::uint32_t> word() const;

  // v^g with no internal spacers.
  static BlockPattern uniform(std::uint32_t h, std::uint32_t g);
  void validate() const;
};

// lim_s P(symbol at n+s = l1 | symbol at n = l0) from the stationary vector:
// pi . (p_H, ..., p_0), where p_i are exact window probabilities at n.
double chain_limit(const BlockPattern& pattern, std::uint32_t l0, std::uint32_t l1, std::uint64_t n);

// The same limit via the renewal identity (2 #_w(l1) + [l1 = 0]) / (2H + 1);
// it does not depend on l0 or n.
Rational renewal_limit(const BlockPattern& pattern, std::uint32_t l1);

// Exact P(symbol at n+s = l1 | symbol at n = l0) by forward recursion over
// the (offset, block length) state; positions are 1-based.
double conditional_probability(const BlockPattern& pattern, std::uint32_t l0, std::uint32_t l1, std::uint64_t n,
                               std::uint64_t s);

// Smallest 1-based position where l0 has positive probability.
std::uint64_t first_position(const BlockPattern& pattern, std::uint32_t l0);

struct ConditionalEstimate {
  std::uint64_t n = 0;
  std::uint64_t s = 0;
  std::uint64_t samples = 0;
  std::uint64_t conditioned = 0;  // samples where position n holds l0
  std::uint64_t hits = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double chain_limit = 0.0;
  bool below_one_over_h = false;  // chain limit < 1/h (only meaningful for l1 != 0)
};

// Monte Carlo estimate of P(symbol at n+s = l1 | symbol at n = l0). n
// defaults to first_position(l0). Throws ConvergenceError when no sample
// meets the condition.
ConditionalEstimate conditional_limit_mc(const BlockPattern& pattern, std::uint32_t l0, std::uint32_t l1,
                                         std::uint64_t s, std::uint64_t samples, std::uint64_t seed,
                                         std::optional<std::uint64_t> n = std::nullopt, std::size_t workers = 1);

}  // namespace rankone
