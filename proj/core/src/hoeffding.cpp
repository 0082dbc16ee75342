#include "rankone/hoeffding.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "rankone/error.hpp"
#include "rankone/numeric.hpp"
#include "rankone/rng.hpp"

namespace rankone {

namespace {

constexpr std::uint32_t kHoeffdingStream = 0x484f4546;  // "HOEF"

}  // namespace

double hoeffding_bound(std::uint64_t n, std::uint64_t m, double t) {
  if (n < 1 || m < 1) throw ValidationError("hoeffding_bound needs n, m >= 1");
  if (!(t > 0.0)) throw ValidationError("hoeffding_bound needs t > 0");
  return std::exp(-2.0 * static_cast<double>(n / m) * t * t);
}

void WindowProcess::validate() const {
  if (m < 1) throw ValidationError("window length m must be positive");
  if (threshold > m) throw ValidationError("threshold cannot exceed the window length");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1]");
}

double WindowProcess::mean() const {
  validate();
  double total = 0.0;
  for (std::uint64_t k = threshold; k <= m; ++k) {
    const double logc = std::lgamma(static_cast<double>(m) + 1) - std::lgamma(static_cast<double>(k) + 1) -
                        std::lgamma(static_cast<double>(m - k) + 1);
    const double term = std::exp(logc) * std::pow(p, static_cast<double>(k)) * std::pow(1.0 - p, static_cast<double>(m - k));
    total += term;
  }
  return std::min(1.0, total);
}

std::vector<TailEstimate> hoeffding_tail_check(const WindowProcess& process, std::uint64_t n,
                                               const std::vector<double>& ts, std::uint64_t replications,
                                               std::uint64_t seed, std::size_t workers) {
  process.validate();
  if (n < 1) throw ValidationError("process length must be positive");
  if (replications < 1) throw ValidationError("need at least one replication");
  if (replications > 0xFFFFFFFFULL) throw ResourceGuardError("at most 2^32 replications");
  const double mu = process.mean();
  const std::uint64_t m = process.m;
  const CounterRng rng(seed, kHoeffdingStream);

  // Each replication reports its sample mean; the tail counts follow.
  std::vector<double> means(replications);
  detail::parallel_ranges(workers, replications, [&](std::size_t, std::uint64_t begin, std::uint64_t end) {
    std::vector<std::uint8_t> z(n + m - 1);
    for (std::uint64_t r = begin; r < end; ++r) {
      for (std::uint64_t j = 0; j < z.size(); ++j) {
        const std::uint64_t word = rng.block(j / 2, static_cast<std::uint32_t>(r))[j % 2];
        const double u = static_cast<double>(word >> 11) * 0x1.0p-53;
        z[j] = u < process.p ? 1 : 0;
      }
      std::uint64_t window = 0;
      for (std::uint64_t j = 0; j < m; ++j) window += z[j];
      std::uint64_t ones = 0;
      for (std::uint64_t i = 0; i < n; ++i) {
        if (i > 0) window = window + z[i + m - 1] - z[i - 1];
        ones += window >= process.threshold ? 1 : 0;
      }
      means[r] = static_cast<double>(ones) / static_cast<double>(n);
    }
  });

  std::vector<TailEstimate> out;
  for (double t : ts) {
    TailEstimate e;
    e.t = t;
    e.mu = mu;
    e.bound = hoeffding_bound(n, m, t);
    for (double x : means) e.exceed += (x - mu >= t) ? 1 : 0;
    e.empirical = static_cast<double>(e.exceed) / static_cast<double>(replications);
    e.sigma = std::sqrt(e.bound * (1.0 - e.bound) / static_cast<double>(replications));
    e.within = e.empirical <= e.bound + 3.0 * e.sigma;
    out.push_back(e);
  }
  return out;
}

}  // namespace rankone
