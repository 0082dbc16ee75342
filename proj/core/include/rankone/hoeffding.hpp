#pragma once

#include <cstdint>
#include <vector>

namespace rankone {

// exp(-2 floor(n/m) t^2) for (m-1)-dependent variables in [0, 1].
double hoeffding_bound(std::uint64_t n, std::uint64_t m, double t);

// X_i = 1[Z_i + ... + Z_{i+m-1} >= threshold] with Z_j i.i.d. Bernoulli(p):
// an (m-1)-dependent indicator process with known mean.
struct WindowProcess {
  std::uint64_t m = 1;
  std::uint64_t threshold = 1;
  double p = 0.5;

  // P(Binomial(m, p) >= threshold), exactly summed.
  double mean() const;
  void validate() const;
};

struct TailEstimate {
  double t = 0.0;
  double mu = 0.0;
  std::uint64_t exceed = 0;  // replications with mean - mu >= t
  double empirical = 0.0;
  double bound = 0.0;
  double sigma = 0.0;  // binomial standard error of the empirical rate under the bound
  bool within = false;  // empirical <= bound + 3 sigma
};

// Draws `replications` independent copies of (X_1..X_n) and estimates
// P(mean - mu >= t) for each t.
std::vector<TailEstimate> hoeffding_tail_check(const WindowProcess& process, std::uint64_t n,
                                               const std::vector<double>& ts, std::uint64_t replications,
                                               std::uint64_t seed, std::size_t workers = 1);

}  // namespace rankone
