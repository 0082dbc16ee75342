#include "rankone/markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "parallel.hpp"
#include "rankone/error.hpp"
#include "rankone/rng.hpp"

namespace rankone {

namespace {

constexpr std::uint32_t kBlockStream = 0x424c4b53;  // "BLKS"

}  // namespace

MarkovModel build_markov_matrix(std::size_t H) {
  if (H < 2) throw ValidationError("H must be at least 2, got " + std::to_string(H));
  MarkovModel m;
  m.H = H;
  m.matrix.assign(H + 1, std::vector<Rational>(H + 1, Rational(0)));
  m.matrix[0][H - 1] = Rational(1, 2);
  m.matrix[0][H] = Rational(1, 2);
  for (std::size_t i = 1; i <= H; ++i) m.matrix[i][i - 1] = 1;
  return m;
}

std::vector<Rational> stationary_linear_solve(const RationalMatrix& P) {
  const std::size_t d = P.size();
  if (d == 0) throw ValidationError("empty matrix");
  // Rows j: sum_i pi_i (P_ij - [i == j]) = 0, with the last row replaced by
  // the normalization sum_i pi_i = 1.
  RationalMatrix a(d, std::vector<Rational>(d + 1, Rational(0)));
  for (std::size_t j = 0; j + 1 < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) a[j][i] = P[i][j] - (i == j ? Rational(1) : Rational(0));
  }
  for (std::size_t i = 0; i < d; ++i) a[d - 1][i] = 1;
  a[d - 1][d] = 1;

  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    while (pivot < d && a[pivot][col] == 0) ++pivot;
    if (pivot == d) throw ConvergenceError("stationary system is singular; the chain is not irreducible");
    std::swap(a[pivot], a[col]);
    const Rational inv = Rational(1) / a[col][col];
    for (std::size_t k = col; k <= d; ++k) a[col][k] *= inv;
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col];
      for (std::size_t k = col; k <= d; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::vector<Rational> pi(d);
  for (std::size_t i = 0; i < d; ++i) pi[i] = a[i][d];
  return pi;
}

namespace {

struct Entry {
  std::size_t from;
  std::size_t to;
  double p;
};

std::vector<Entry> sparse(const RationalMatrix& P) {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < P.size(); ++i) {
    for (std::size_t j = 0; j < P[i].size(); ++j) {
      if (P[i][j] != 0) out.push_back({i, j, to_double(P[i][j])});
    }
  }
  return out;
}

void step(const std::vector<Entry>& entries, const std::vector<double>& pi, std::vector<double>& next) {
  std::fill(next.begin(), next.end(), 0.0);
  for (const Entry& e : entries) next[e.to] += pi[e.from] * e.p;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

double stationarity_residual(const RationalMatrix& matrix, const std::vector<double>& pi) {
  const auto entries = sparse(matrix);
  std::vector<double> next(pi.size());
  step(entries, pi, next);
  return max_diff(next, pi);
}

PowerIteration stationary_power_iteration(const MarkovModel& model, double tol, std::uint64_t max_iterations) {
  const std::size_t d = model.matrix.size();
  const auto entries = sparse(model.matrix);
  PowerIteration r;
  r.pi.assign(d, 1.0 / static_cast<double>(d));
  std::vector<double> next(d);
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    step(entries, r.pi, next);
    double sum = 0.0;
    for (double x : next) sum += x;
    for (double& x : next) x /= sum;
    r.residual = max_diff(next, r.pi);
    r.pi.swap(next);
    if (r.residual <= tol) return r;
  }
  throw ConvergenceError("power iteration did not reach residual " + format_fixed(tol, 16) + " within " +
                         std::to_string(max_iterations) + " iterations");
}

MarkovModel stationary_distribution(MarkovModel model, double tol, double agreement) {
  model.stationary_exact = stationary_linear_solve(model.matrix);
  const PowerIteration pw = stationary_power_iteration(model, tol);
  model.stationary = pw.pi;
  model.iterations = pw.iterations;
  model.residual = stationarity_residual(model.matrix, pw.pi);
  for (std::size_t i = 0; i < pw.pi.size(); ++i) {
    const double diff = std::abs(pw.pi[i] - to_double(model.stationary_exact[i]));
    if (diff > agreement) {
      throw ConvergenceError("power iteration and linear solve differ by " + format_fixed(diff, 16) + " at entry " +
                             std::to_string(i));
    }
  }
  return model;
}

std::uint64_t BlockPattern::H() const noexcept {
  std::uint64_t sum = 0;
  for (auto x : b) sum += x;
  return static_cast<std::uint64_t>(g()) * h + sum;
}

std::vector<std::uint32_t> BlockPattern::word() const {
  std::vector<std::uint32_t> w;
  w.reserve(H());
  for (std::uint32_t k = 0; k < g(); ++k) {
    for (std::uint32_t i = 1; i <= h; ++i) w.push_back(i);
    if (k + 1 < g() && b[k]) w.push_back(0);
  }
  return w;
}

BlockPattern BlockPattern::uniform(std::uint32_t h, std::uint32_t g) {
  BlockPattern p;
  p.h = h;
  p.b.assign(g - 1, 0);
  return p;
}

void BlockPattern::validate() const {
  if (h < 2) throw ValidationError("block pattern needs h >= 2");
  for (auto x : b) {
    if (x > 1) throw ValidationError("internal spacers b_i must lie in {0, 1}");
  }
  if (H() < 2) throw ValidationError("block pattern needs H >= 2");
}

namespace {

// Distribution over (offset, block length H + a); index o for a = 0 and
// H + o for a = 1.
class BlockChain {
 public:
  explicit BlockChain(const BlockPattern& p) : H_(p.H()), w_(p.word()), dist_(2 * H_ + 1, 0.0), next_(dist_.size()) {
    dist_[0] = 0.5;
    dist_[H_] = 0.5;
  }

  std::uint32_t symbol(std::size_t idx) const {
    const std::size_t o = idx < H_ ? idx : idx - H_;
    return o < H_ ? w_[o] : 0U;
  }

  void advance() {
    std::fill(next_.begin(), next_.end(), 0.0);
    for (std::size_t idx = 0; idx < dist_.size(); ++idx) {
      const double p = dist_[idx];
      if (p == 0.0) continue;
      const bool long_block = idx >= H_;
      const std::size_t o = long_block ? idx - H_ : idx;
      const std::size_t len = H_ + (long_block ? 1 : 0);
      if (o + 1 < len) {
        next_[idx + 1] += p;
      } else {
        next_[0] += 0.5 * p;
        next_[H_] += 0.5 * p;
      }
    }
    dist_.swap(next_);
  }

  double mass(std::uint32_t l) const {
    double m = 0.0;
    for (std::size_t idx = 0; idx < dist_.size(); ++idx) {
      if (symbol(idx) == l) m += dist_[idx];
    }
    return m;
  }

  // Keep only states showing l and renormalize; returns the mass of l before.
  double condition(std::uint32_t l) {
    const double m = mass(l);
    if (m <= 0.0) return 0.0;
    for (std::size_t idx = 0; idx < dist_.size(); ++idx) dist_[idx] = symbol(idx) == l ? dist_[idx] / m : 0.0;
    return m;
  }

 private:
  std::size_t H_;
  std::vector<std::uint32_t> w_;
  std::vector<double> dist_;
  std::vector<double> next_;
};

void check_symbols(const BlockPattern& p, std::uint32_t l0, std::uint32_t l1) {
  p.validate();
  if (l0 > p.h || l1 > p.h) throw ValidationError("symbols must lie in {0, ..., h}");
}

BlockChain conditioned_chain(const BlockPattern& p, std::uint32_t l0, std::uint64_t n) {
  if (n < 1) throw ValidationError("positions are 1-based");
  BlockChain chain(p);
  for (std::uint64_t i = 1; i < n; ++i) chain.advance();
  if (chain.condition(l0) <= 0.0) {
    throw ValidationError("symbol " + std::to_string(l0) + " cannot occur at position " + std::to_string(n));
  }
  return chain;
}

}  // namespace

std::uint64_t first_position(const BlockPattern& pattern, std::uint32_t l0) {
  check_symbols(pattern, l0, 0);
  BlockChain chain(pattern);
  const std::uint64_t limit = 4 * (pattern.H() + 1);
  for (std::uint64_t pos = 1; pos <= limit; ++pos) {
    if (chain.mass(l0) > 0.0) return pos;
    chain.advance();
  }
  throw ValidationError("symbol " + std::to_string(l0) + " never occurs");
}

double conditional_probability(const BlockPattern& pattern, std::uint32_t l0, std::uint32_t l1, std::uint64_t n,
                               std::uint64_t s) {
  check_symbols(pattern, l0, l1);
  BlockChain chain = conditioned_chain(pattern, l0, n);
  for (std::uint64_t i = 0; i < s; ++i) chain.advance();
  return chain.mass(l1);
}

double chain_limit(const BlockPattern& pattern, std::uint32_t l0, std::uint32_t l1, std::uint64_t n) {
  check_symbols(pattern, l0, l1);
  const std::size_t H = pattern.H();
  const auto pi = stationary_linear_solve(build_markov_matrix(H).matrix);
  BlockChain chain = conditioned_chain(pattern, l0, n);
  std::vector<double> p(H + 1);  // p[i] = P(symbol at n+i = l1 | l0 at n)
  for (std::size_t i = 0; i <= H; ++i) {
    p[i] = chain.mass(l1);
    chain.advance();
  }
  // The state vector at s = H+1 is (p_H, p_{H-1}, ..., p_0).
  double acc = 0.0;
  for (std::size_t j = 0; j <= H; ++j) acc += to_double(pi[j]) * p[H - j];
  return acc;
}

Rational renewal_limit(const BlockPattern& pattern, std::uint32_t l1) {
  check_symbols(pattern, 0, l1);
  std::uint64_t count = 0;
  for (auto x : pattern.word()) count += x == l1 ? 1 : 0;
  const BigInt H = pattern.H();
  return Rational(BigInt(2 * count + (l1 == 0 ? 1 : 0))) / Rational(2 * H + 1);
}

ConditionalEstimate conditional_limit_mc(const BlockPattern& pattern, std::uint32_t l0, std::uint32_t l1,
                                         std::uint64_t s, std::uint64_t samples, std::uint64_t seed,
                                         std::optional<std::uint64_t> n, std::size_t workers) {
  check_symbols(pattern, l0, l1);
  if (samples == 0) throw ValidationError("sample count must be positive");
  ConditionalEstimate est;
  est.n = n ? *n : first_position(pattern, l0);
  est.s = s;
  est.samples = samples;
  const std::uint64_t H = pattern.H();
  const auto w = pattern.word();
  const std::uint64_t target0 = est.n;
  const std::uint64_t target1 = est.n + s;
  const CounterRng rng(seed, kBlockStream);

  struct Tally {
    std::uint64_t conditioned = 0;
    std::uint64_t hits = 0;
  };
  std::vector<Tally> tallies(std::max<std::size_t>(workers, 1));
  detail::parallel_ranges(workers, samples, [&](std::size_t wk, std::uint64_t begin, std::uint64_t end) {
    Tally& t = tallies[wk];
    for (std::uint64_t i = begin; i < end; ++i) {
      std::uint64_t start = 1;  // first position of the current block
      std::uint64_t k = 0;      // block counter, selects the spacer bit
      std::array<std::uint64_t, 2> bits{};
      std::uint32_t sym0 = 0;
      bool have0 = false;
      for (;;) {
        if (k % 128 == 0) bits = rng.block(i, static_cast<std::uint32_t>(k / 128));
        const std::uint64_t a = (bits[(k % 128) / 64] >> (k % 64)) & 1U;
        const std::uint64_t len = H + a;
        if (!have0 && target0 < start + len) {
          const std::uint64_t o = target0 - start;
          sym0 = o < H ? w[o] : 0U;
          have0 = true;
          if (sym0 != l0) break;
        }
        if (target1 < start + len) {
          const std::uint64_t o = target1 - start;
          const std::uint32_t sym1 = o < H ? w[o] : 0U;
          ++t.conditioned;
          t.hits += sym1 == l1 ? 1 : 0;
          break;
        }
        start += len;
        ++k;
      }
    }
  });
  for (const Tally& t : tallies) {
    est.conditioned += t.conditioned;
    est.hits += t.hits;
  }
  if (est.conditioned == 0) {
    throw ConvergenceError("no sample had symbol " + std::to_string(l0) + " at position " + std::to_string(est.n));
  }
  est.estimate = static_cast<double>(est.hits) / static_cast<double>(est.conditioned);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(est.conditioned));
  est.chain_limit = chain_limit(pattern, l0, l1, est.n);
  est.below_one_over_h = est.chain_limit < 1.0 / static_cast<double>(pattern.h);
  return est;
}

}  // namespace rankone
