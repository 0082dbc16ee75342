#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "oracle.hpp"
#include "rankone/error.hpp"
#include "rankone/genericness.hpp"

using namespace rankone;

namespace {

GenericnessConfig tiny_config() {
  GenericnessConfig cfg;
  cfg.base.initial_height = 2;
  cfg.base.spacer_cap = 2;
  cfg.A = {1, 3, 6};
  cfg.N0 = 1;
  cfg.q = 6;
  cfg.alphabet = 2;
  cfg.trial_cap = 64;
  cfg.seed = 2024;
  return cfg;
}

// Acceptance of one explicit spacer sequence by direct recount on the
// materialized words.
bool oracle_accepts(const GenericnessConfig& cfg, const std::vector<std::uint32_t>& spacers) {
  StackingData sd = cfg.base;
  Stage st;
  st.q = cfg.q;
  st.spacers = spacers;
  sd.stages.push_back(st);
  const std::size_t top = sd.stages.size() + 1;
  const auto h = oracle::heights(sd);
  const auto K = oracle::valid_levels(sd, top, cfg.A.back());
  if (K.empty()) return false;
  for (std::size_t r = 1; r < top; ++r) {
    const auto w = oracle::materialize(sd, r, top, CodingMode::base);
    std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
    for (auto k : K) {
      std::vector<std::uint32_t> word;
      for (auto t : cfg.A) word.push_back(w[k + t]);
      ++counts[word];
    }
    std::uint64_t scale = 1;
    for (std::uint64_t i = cfg.N0; i < cfg.A.size(); ++i) scale *= h[r - 1];
    for (const auto& [word, c] : counts) {
      if (c * scale > 2 * K.size()) return false;
    }
  }
  return true;
}

std::set<std::vector<std::uint32_t>> exhaustive_acceptors(const GenericnessConfig& cfg) {
  std::set<std::vector<std::uint32_t>> out;
  const std::uint64_t len = cfg.q - 1;
  for (std::uint64_t mask = 0; mask < (1ULL << len); ++mask) {
    std::vector<std::uint32_t> a(len);
    for (std::uint64_t i = 0; i < len; ++i) a[i] = (mask >> i) & 1U;
    if (oracle_accepts(cfg, a)) out.insert(a);
  }
  return out;
}

std::vector<std::uint32_t> trial_spacers(const GenericnessConfig& cfg, std::uint64_t trial) {
  StackingData sd = cfg.base;
  sd.spacer_cap = std::max<std::uint32_t>(sd.spacer_cap.value_or(2), 2);
  sd.stages.push_back(candidate_stage(cfg, trial));
  return oracle::stage_spacers(sd, sd.stages.size() - 1);
}

}  // namespace

TEST(FrequencyCap, ExactComparison) {
  EXPECT_TRUE(within_frequency_cap(2, 2, 3, 1, 4));   // 2*4 <= 8
  EXPECT_FALSE(within_frequency_cap(3, 2, 3, 1, 4));  // 12 > 8
  EXPECT_TRUE(within_frequency_cap(8, 2, 1, 1, 4));   // vacuous exponent
  EXPECT_TRUE(within_frequency_cap(16, 2, 1, 2, 4));  // 16 <= 2*4*2
}

TEST(FailureProbability, Formula) {
  const std::vector<BigInt> h{2, 5};
  const double expected =
      6.0 * (std::pow(3.0, 3) * std::exp(-2.0 * 8) + std::pow(6.0, 3) * std::exp(-2.0 * 125));
  EXPECT_NEAR(failure_probability(h, 3), expected, 1e-18);
}

TEST(Genericness, EvaluateCandidateMatchesOracleOnAllSequences) {
  const auto cfg = tiny_config();
  for (std::uint64_t mask = 0; mask < 32; ++mask) {
    std::vector<std::uint32_t> a(5);
    for (std::uint64_t i = 0; i < 5; ++i) a[i] = (mask >> i) & 1U;
    Stage st;
    st.q = 6;
    st.spacers = a;
    EXPECT_EQ(evaluate_candidate(cfg, st).accepted, oracle_accepts(cfg, a)) << mask;
  }
}

TEST(Genericness, SearchAcceptsIffExhaustiveOracleDoes) {
  auto cfg = tiny_config();
  const auto acceptors = exhaustive_acceptors(cfg);
  const auto rep = genericness_search(cfg);
  EXPECT_EQ(rep.accepted, !acceptors.empty());
  if (rep.accepted) {
    EXPECT_TRUE(acceptors.count(rep.accepted_spacers));
    EXPECT_EQ(trial_spacers(cfg, *rep.accepted_trial), rep.accepted_spacers);
  }
  cfg.stop_at_first = false;
  const auto all = genericness_search(cfg);
  EXPECT_EQ(all.trials_used, cfg.trial_cap);
  for (const auto& tr : all.trials) {
    EXPECT_EQ(tr.accepted, acceptors.count(trial_spacers(cfg, tr.trial)) == 1) << tr.trial;
  }
}

TEST(Genericness, VacuousCapAcceptsFirstTrial) {
  auto cfg = tiny_config();
  cfg.N0 = 3;  // N - N0 = 0: cap 2 |K|
  const auto rep = genericness_search(cfg);
  ASSERT_TRUE(rep.accepted);
  EXPECT_EQ(*rep.accepted_trial, 0U);
  EXPECT_EQ(rep.trials_used, 1U);
}

TEST(Genericness, ReproducibleFromSeed) {
  auto cfg = tiny_config();
  cfg.stop_at_first = false;
  cfg.trial_cap = 20;
  const auto a = genericness_search(cfg);
  const auto b = genericness_search(cfg);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].spacer_seed, b.trials[i].spacer_seed);
    EXPECT_EQ(a.trials[i].accepted, b.trials[i].accepted);
    EXPECT_EQ(a.trials[i].worst_frequency, b.trials[i].worst_frequency);
  }
  EXPECT_EQ(a.rng_algorithm, "philox4x32-10/lemire-reject");
}

TEST(Genericness, ExhaustedSearchReportsNearMisses) {
  auto cfg = tiny_config();
  cfg.N0 = 0;  // cap 2 |K| / 8
  cfg.trial_cap = 5;
  const bool any = !exhaustive_acceptors(cfg).empty();
  const auto rep = genericness_search(cfg);
  EXPECT_EQ(rep.accepted, any && rep.accepted_trial.has_value());
  if (!rep.accepted) {
    EXPECT_EQ(rep.trials_used, 5U);
    EXPECT_EQ(rep.failures, 5U);
    EXPECT_EQ(rep.empirical_failure_rate, 1.0);
    for (const auto& tr : rep.trials) EXPECT_GT(tr.worst_frequency, tr.cap);
  }
}

TEST(Genericness, RejectsOrbitsLongerThanTheCandidate) {
  auto cfg = tiny_config();
  cfg.A = {1, 3, 20};
  EXPECT_THROW(genericness_search(cfg), ValidationError);
}
