#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rankone/numeric.hpp"

namespace rankone {

enum class SequenceKind {
  polynomial,  // floor(n^alpha)
  nlog,        // floor(C n (log n)^alpha)
  linear,      // a n + b
  explicit_list,
};

std::string_view to_string(SequenceKind kind) noexcept;

struct SequenceSpec {
  SequenceKind kind = SequenceKind::polynomial;
  Rational alpha = 1;
  Rational scale = 1;  // C for nlog
  std::int64_t a = 1;
  std::int64_t b = 0;
  std::vector<std::uint64_t> values;  // explicit_list
  std::uint64_t horizon = 0;          // last raw index; explicit lists use their length

  static SequenceSpec polynomial(Rational alpha, std::uint64_t horizon);
  static SequenceSpec nlog(Rational scale, Rational alpha, std::uint64_t horizon);
  static SequenceSpec linear(std::int64_t a, std::int64_t b, std::uint64_t horizon);
  static SequenceSpec list(std::vector<std::uint64_t> values);

  // Compact text form: "poly:3/2@1000", "nlog:1:2@500", "linear:2:0@100", "list:1,4,9".
  static SequenceSpec parse(std::string_view text);
  std::string describe() const;
};

// A strictly increasing nonnegative sampling sequence A = {t_n}. Raw indices
// run over [n0, horizon]; terms are re-indexed from 1 so term(1) = t_{n0}.
class SamplingSequence {
 public:
  explicit SamplingSequence(SequenceSpec spec);

  const SequenceSpec& spec() const noexcept { return spec_; }
  std::uint64_t start_index() const noexcept { return n0_; }
  std::uint64_t horizon() const noexcept { return spec_.horizon; }
  std::uint64_t term_count() const noexcept { return values_.size(); }

  // t_i at raw index i in [n0, horizon].
  std::uint64_t generate(std::uint64_t index) const;
  // i-th term, 1-based.
  std::uint64_t term(std::uint64_t i) const;
  // Terms 1..count as a contiguous span.
  std::span<const std::uint64_t> terms(std::uint64_t count) const;

 private:
  SequenceSpec spec_;
  std::uint64_t n0_ = 1;
  std::vector<std::uint64_t> values_;
};

// s_n = max_{1 <= i <= n-1} (t_{i+1} - t_i) over terms; n >= 2.
std::uint64_t max_gap(const SamplingSequence& seq, std::uint64_t n);

struct DilationDiagnostic {
  std::vector<std::uint64_t> gaps;              // gaps[i-1] = t_{i+1} - t_i
  std::vector<std::uint64_t> tail_min;          // tail_min[i-1] = min_{j >= i} gaps[j-1]
  std::uint64_t gap_decreases = 0;              // count of i with gap_{i+1} < gap_i
  bool dilating_on_horizon = false;             // finite-horizon heuristic
  static constexpr std::string_view note = "finite-horizon heuristic: tail minima strictly increase across quartiles";
};

// Inspects terms 1..horizon (horizon >= 2).
DilationDiagnostic dilation_diagnostic(const SamplingSequence& seq, std::uint64_t horizon);

// (1/n) #{ t_i + j : 1 <= i <= n, -r <= j <= r } exactly.
Rational krug_K_estimate(const SamplingSequence& seq, std::uint64_t r, std::uint64_t n);

// |J ∩ [1, n]| / n for a sorted or unsorted index list.
Rational lower_density_estimate(std::span<const std::uint64_t> J, std::uint64_t n);
Rational lower_density_estimate(const std::function<bool(std::uint64_t)>& in_J, std::uint64_t n);

}  // namespace rankone
