#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankone/entropy.hpp"
#include "rankone/numeric.hpp"
#include "rankone/stacking.hpp"

namespace rankone {

struct GenericnessConfig {
  StackingData base;             // S_1..S_n; the search appends stage n
  std::vector<std::uint64_t> A;  // t_1..t_N
  std::uint64_t N0 = 0;
  std::uint64_t q = 2;
  std::uint32_t alphabet = 2;  // spacer counts uniform on {0, ..., alphabet-1}
  std::uint64_t trial_cap = 100;
  std::uint64_t seed = 0;
  bool stop_at_first = true;  // false runs every trial (failure-rate estimates)
  EntropyOptions entropy;
};

// Worst word of one reference stage r in one trial.
struct ReferenceProbe {
  std::size_t r = 0;
  std::uint64_t max_count = 0;
  CodedWord worst_word;
  bool within_cap = false;
};

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t spacer_seed = 0;
  bool accepted = false;
  std::uint64_t valid_count = 0;
  double worst_frequency = 0.0;  // max_r max_count / |K|
  double cap = 0.0;              // 2 h_r^-(N - N0) for the r attaining the worst ratio
  std::vector<ReferenceProbe> probes;
};

struct GenericnessReport {
  bool accepted = false;
  std::optional<std::uint64_t> accepted_trial;
  std::optional<std::uint64_t> accepted_seed;     // seed of the accepted candidate stage
  std::vector<std::uint32_t> accepted_spacers;    // materialized when q is small
  std::uint64_t trials_used = 0;
  std::uint64_t failures = 0;
  double empirical_failure_rate = 0.0;
  double failure_bound = 0.0;  // P(N)
  std::vector<TrialRecord> trials;
  std::string rng_algorithm;
};

// Candidate stage for `trial`, as seeded spacers.
Stage candidate_stage(const GenericnessConfig& cfg, std::uint64_t trial);

// Exact acceptance test of one candidate stage: for every r <= n, every word
// occurs at no more than 2 h_r^-(N - N0) |K| levels of K.
TrialRecord evaluate_candidate(const GenericnessConfig& cfg, const Stage& stage, std::uint64_t trial = 0);

GenericnessReport genericness_search(const GenericnessConfig& cfg);

// count * h_r^(N - N0) <= 2 |K|, compared exactly.
bool within_frequency_cap(std::uint64_t count, std::uint64_t h_r, std::uint64_t N, std::uint64_t N0,
                          std::uint64_t valid_count);

// P(N) = (h_n + 1) sum_{r<=n} (h_r + 1)^N exp(-2 h_r^N).
double failure_probability(std::span<const BigInt> heights, std::uint64_t N);

}  // namespace rankone
