#include "rankone/genericness.hpp"

#include <algorithm>
#include <cmath>

#include "rankone/error.hpp"
#include "rankone/rng.hpp"
#include "rankone/tower.hpp"

namespace rankone {

namespace {

constexpr std::uint32_t kTrialStream = 0x47454e53;  // "GENS"
constexpr std::uint64_t kMaterializeLimit = std::uint64_t{1} << 16;

StackingData candidate_data(const GenericnessConfig& cfg, const Stage& stage) {
  StackingData sd = cfg.base;
  if (const auto* seeded = std::get_if<SeededSpacers>(&stage.spacers)) {
    if (seeded->distribution == SpacerDistribution::uniform) {
      sd.spacer_cap = cfg.alphabet;
    } else if (sd.spacer_cap && *sd.spacer_cap < 2) {
      sd.spacer_cap = 2;
    }
  }
  sd.stages.push_back(stage);
  return sd;
}

void check_config(const GenericnessConfig& cfg) {
  validate(cfg.base);
  if (cfg.q < 2) throw ValidationError("q must be at least 2");
  if (cfg.alphabet < 2) throw ValidationError("spacer alphabet must have at least 2 symbols");
  if (cfg.A.empty()) throw ValidationError("A must have at least one term");
  for (std::size_t i = 1; i < cfg.A.size(); ++i) {
    if (cfg.A[i] <= cfg.A[i - 1]) throw ValidationError("A must be strictly increasing");
  }
  if (cfg.trial_cap < 1) throw ValidationError("trial cap must be positive");
}

}  // namespace

bool within_frequency_cap(std::uint64_t count, std::uint64_t h_r, std::uint64_t N, std::uint64_t N0,
                          std::uint64_t valid_count) {
  if (N >= N0) return BigInt(count) * pow_big(h_r, N - N0) <= 2 * BigInt(valid_count);
  return BigInt(count) <= 2 * BigInt(valid_count) * pow_big(h_r, N0 - N);
}

double failure_probability(std::span<const BigInt> heights, std::uint64_t N) {
  if (heights.empty()) throw ValidationError("failure probability needs at least one height");
  double sum = 0.0;
  for (const BigInt& h : heights) {
    const double hr = to_double(h);
    const double log_power = static_cast<double>(N) * std::log(hr);  // log h_r^N
    if (log_power > 700.0) continue;                                  // exp(-2 h_r^N) underflows
    const double log_term = static_cast<double>(N) * std::log(hr + 1.0) - 2.0 * std::exp(log_power);
    sum += std::exp(log_term);
  }
  return (to_double(heights.back()) + 1.0) * sum;
}

Stage candidate_stage(const GenericnessConfig& cfg, std::uint64_t trial) {
  Stage st;
  st.q = cfg.q;
  SeededSpacers seeded;
  seeded.seed = CounterRng(cfg.seed, kTrialStream).bits(trial);
  seeded.distribution = cfg.alphabet == 2 ? SpacerDistribution::bernoulli : SpacerDistribution::uniform;
  st.spacers = seeded;
  return st;
}

TrialRecord evaluate_candidate(const GenericnessConfig& cfg, const Stage& stage, std::uint64_t trial) {
  check_config(cfg);
  const Tower tower(candidate_data(cfg, stage));
  const std::size_t top = tower.tower_count();
  const std::size_t n = top - 1;
  const std::uint64_t N = cfg.A.size();
  const std::uint64_t h_n = tower.height_u64(n);
  if (BigInt(cfg.A.back()) >= BigInt(cfg.q) * h_n) {
    throw ValidationError("t_N = " + std::to_string(cfg.A.back()) + " must stay below q h_n = " +
                          (BigInt(cfg.q) * h_n).str());
  }

  TrialRecord rec;
  rec.trial = trial;
  if (const auto* seeded = std::get_if<SeededSpacers>(&stage.spacers)) rec.spacer_seed = seeded->seed;
  rec.accepted = true;
  double worst_ratio = -INFINITY;
  for (std::size_t r = 1; r <= n; ++r) {
    const WordHistogram hist = word_histogram(tower, CodingSpec{r, CodingMode::base}, top, cfg.A, std::nullopt,
                                              cfg.entropy);
    rec.valid_count = hist.valid_count;
    ReferenceProbe probe;
    probe.r = r;
    for (const auto& [word, count] : hist.counts) {
      if (count > probe.max_count || (count == probe.max_count && word < probe.worst_word)) {
        probe.max_count = count;
        probe.worst_word = word;
      }
    }
    const std::uint64_t h_r = tower.height_u64(r);
    probe.within_cap = within_frequency_cap(probe.max_count, h_r, N, cfg.N0, hist.valid_count);
    rec.accepted = rec.accepted && probe.within_cap;

    const double exponent = static_cast<double>(N) - static_cast<double>(cfg.N0);
    const double log_cap = std::log(2.0) - exponent * std::log(static_cast<double>(h_r));
    const double freq = static_cast<double>(probe.max_count) / static_cast<double>(hist.valid_count);
    const double ratio = std::log(freq) - log_cap;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      rec.worst_frequency = freq;
      rec.cap = std::exp(log_cap);
    }
    rec.probes.push_back(std::move(probe));
  }
  return rec;
}

GenericnessReport genericness_search(const GenericnessConfig& cfg) {
  check_config(cfg);
  GenericnessReport rep;
  rep.rng_algorithm = std::string(CounterRng::algorithm_id);
  const Tower base(cfg.base);
  rep.failure_bound = failure_probability(base.heights(), cfg.A.size());

  for (std::uint64_t trial = 0; trial < cfg.trial_cap; ++trial) {
    const Stage stage = candidate_stage(cfg, trial);
    TrialRecord rec = evaluate_candidate(cfg, stage, trial);
    ++rep.trials_used;
    if (!rec.accepted) ++rep.failures;
    if (rec.accepted && !rep.accepted) {
      rep.accepted = true;
      rep.accepted_trial = trial;
      rep.accepted_seed = rec.spacer_seed;
      if (cfg.q <= kMaterializeLimit) {
        const Tower t(candidate_data(cfg, stage));
        const std::size_t n = t.tower_count() - 1;
        for (std::uint64_t i = 1; i < cfg.q; ++i) rep.accepted_spacers.push_back(t.spacer(n, i));
      }
    }
    rep.trials.push_back(std::move(rec));
    if (rep.accepted && cfg.stop_at_first) break;
  }
  rep.empirical_failure_rate = static_cast<double>(rep.failures) / static_cast<double>(rep.trials_used);
  return rep;
}

}  // namespace rankone
