#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "oracle.hpp"
#include "rankone/entropy.hpp"
#include "rankone/error.hpp"

using namespace rankone;

namespace {

// Entropy of the word distribution over K, from the materialized word.
double brute_entropy(const StackingData& sd, std::size_t r, std::size_t n, const std::vector<std::uint64_t>& A,
                     CodingMode mode, std::size_t* distinct = nullptr) {
  const auto w = oracle::materialize(sd, r, n, mode);
  const auto K = oracle::valid_levels(sd, n, A.back());
  std::map<std::vector<std::uint32_t>, std::uint64_t> hist;
  for (auto k : K) {
    std::vector<std::uint32_t> word;
    for (auto t : A) word.push_back(w[k + t]);
    ++hist[word];
  }
  double h = 0;
  for (const auto& [word, c] : hist) h += entropy_term(static_cast<double>(c) / static_cast<double>(K.size()));
  if (distinct) *distinct = hist.size();
  return h;
}

std::vector<std::uint64_t> random_offsets(std::mt19937_64& gen, std::size_t N, std::uint64_t max_gap) {
  std::vector<std::uint64_t> A;
  std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, 2)(gen);
  for (std::size_t i = 0; i < N; ++i) {
    A.push_back(t);
    t += std::uniform_int_distribution<std::uint64_t>(1, max_gap)(gen);
  }
  return A;
}

}  // namespace

TEST(Entropy, PartitionExamples) {
  EXPECT_NEAR(entropy(WeightedPartition{{0.25, 0.25, 0.25, 0.25}, 1.0}), std::log(4.0), 1e-15);
  EXPECT_EQ(entropy(WeightedPartition{{1.0}, 1.0}), 0.0);
  EXPECT_NEAR(entropy(WeightedPartition{{0.5, 0.5}, 1.0}), std::log(2.0), 1e-15);
  EXPECT_THROW(entropy(WeightedPartition{{-0.1, 1.1}, 1.0}), ValidationError);
  EXPECT_THROW(validate(WeightedPartition{{0.5, 0.4}, 1.0}), ValidationError);
  EXPECT_NO_THROW(validate(WeightedPartition{{0.25, 0.25}, 0.5}));
}

TEST(Entropy, ConditionalExamples) {
  const std::vector<std::uint64_t> xi{0, 0, 1, 1, 2, 2, 3, 3};
  EXPECT_NEAR(conditional_entropy(xi, xi), 0.0, 1e-15);
  const std::vector<std::uint64_t> split{0, 1, 0, 1, 0, 1, 0, 1};
  EXPECT_NEAR(conditional_entropy(split, xi), std::log(2.0), 1e-15);
  const std::vector<std::uint64_t> coarse{0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_NEAR(conditional_entropy(coarse, xi), 0.0, 1e-15);
  const std::vector<std::uint64_t> shorter{0, 1};
  EXPECT_THROW(conditional_entropy(shorter, xi), ValidationError);
}

TEST(Entropy, LabelingWeights) {
  const std::vector<std::uint64_t> labels{7, 7, 9};
  const std::vector<double> w{0.25, 0.25, 0.5};
  EXPECT_NEAR(labeling_entropy(labels, w), std::log(2.0), 1e-15);
  EXPECT_NEAR(labeling_entropy(labels), entropy_term(2.0 / 3) + entropy_term(1.0 / 3), 1e-15);
}

TEST(Entropy, CyclicJoinMatchesDirectCount) {
  const std::vector<std::uint64_t> labels{0, 1, 1, 0, 2};
  const std::vector<std::uint64_t> offsets{0, 2};
  std::map<std::pair<std::uint64_t, std::uint64_t>, int> c;
  for (std::size_t x = 0; x < 5; ++x) ++c[{labels[x], labels[(x + 2) % 5]}];
  double h = 0;
  for (const auto& [k, v] : c) h += entropy_term(v / 5.0);
  EXPECT_NEAR(cyclic_join_entropy(labels, offsets), h, 1e-15);
}

TEST(LowerBoundDisjoint, Examples) {
  const std::vector<double> four(4, 0.125);
  auto c = check_lower_bound_disjoint(four, 0.125, 1.0);
  EXPECT_NEAR(c.bound, 0.5 * std::log(8.0), 1e-12);
  EXPECT_NEAR(c.value, c.bound, 1e-12);
  EXPECT_TRUE(c.holds);
  const std::vector<double> none{0.0};
  EXPECT_EQ(lower_bound_disjoint(none, 0.5, 1.0), 0.0);
  const std::vector<double> two{0.25, 0.125};
  c = check_lower_bound_disjoint(two, 0.25, 1.0);
  EXPECT_NEAR(c.bound, 0.375 * std::log(4.0), 1e-6);
  EXPECT_NEAR(c.value, 0.25 * std::log(4.0) + 0.125 * std::log(8.0), 1e-15);
  EXPECT_TRUE(c.holds);
  const std::vector<double> too_big{0.5};
  EXPECT_THROW(lower_bound_disjoint(too_big, 0.25, 1.0), ValidationError);
}

TEST(UpperBoundJensen, Examples) {
  const std::vector<double> four(4, 0.25);
  auto c = check_upper_bound_jensen(four, 1.0);
  EXPECT_NEAR(c.value, std::log(4.0), 1e-15);
  EXPECT_NEAR(c.bound, std::log(4.0), 1e-15);
  EXPECT_TRUE(c.holds);
  const std::vector<double> one{1.0};
  c = check_upper_bound_jensen(one, 1.0);
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.bound, 0.0);
  EXPECT_TRUE(c.holds);
  const std::vector<double> two{0.5, 0.25};
  c = check_upper_bound_jensen(two, 1.0);
  EXPECT_NEAR(c.value, 0.5 * std::log(2.0) + 0.25 * std::log(4.0), 1e-15);
  EXPECT_TRUE(c.holds);
}

TEST(UpperBoundJensen, PrintedFormFailsForOnePieceSmallerThanX) {
  // One piece of mass 1/e inside X of mass 1: f(1/e) = 1/e > 0 = bound.
  const std::vector<double> piece{std::exp(-1.0)};
  const auto printed = check_upper_bound_jensen(piece, 1.0);
  EXPECT_FALSE(printed.holds);
  EXPECT_NEAR(printed.value, std::exp(-1.0), 1e-15);
  const auto tight = check_upper_bound_jensen(piece, 1.0, true);
  EXPECT_TRUE(tight.holds);
}

TEST(PropertyChecks, RandomMassVectors) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double mx = 0.05 + 0.95 * U(gen);
    const double eps = 0.01 + 0.99 * U(gen);
    const std::size_t m = 1 + gen() % 12;
    std::vector<double> masses(m);
    double left = mx;
    for (auto& x : masses) {
      x = std::min(left, eps * mx * U(gen));
      left -= x;
    }
    EXPECT_TRUE(check_lower_bound_disjoint(masses, eps, mx).holds);
    EXPECT_TRUE(check_upper_bound_jensen(masses, mx, true).holds);
    if (m >= 3) EXPECT_TRUE(check_upper_bound_jensen(masses, mx).holds);
  }
}

TEST(EmpiricalEntropy, TinyExample) {
  const Tower t(oracle::tiny());
  const std::vector<std::uint64_t> A{1, 2};
  const auto res = empirical_sequence_entropy(t, {1, CodingMode::base}, 2, A);
  EXPECT_NEAR(res.h_per_n, std::log(2.0) / 2, 1e-15);
  EXPECT_EQ(res.histogram.distinct(), 2U);
  EXPECT_EQ(res.histogram.total, 2U);
  EXPECT_EQ(res.histogram.counts.at(CodedWord{2, 0}), 1U);
  EXPECT_EQ(res.histogram.counts.at(CodedWord{0, 1}), 1U);
  EXPECT_NEAR(res.histogram.coverage, 0.4, 1e-15);
}

TEST(EmpiricalEntropy, SpacerFreeSingleOffset) {
  const Tower t(oracle::explicit_stages(2, std::nullopt, {{0}}));
  const std::vector<std::uint64_t> A{0};
  const auto res = empirical_sequence_entropy(t, {2, CodingMode::base}, 2, A);
  EXPECT_NEAR(res.h_per_n, std::log(4.0), 1e-15);
  EXPECT_EQ(res.histogram.distinct(), 4U);
}

TEST(EmpiricalEntropy, EmptyKAndCap) {
  const Tower t(oracle::tiny());
  const std::vector<std::uint64_t> far{1, 5};
  EXPECT_THROW(empirical_sequence_entropy(t, {1, CodingMode::base}, 2, far), ValidationError);
  const std::vector<std::uint64_t> A{0};
  EntropyOptions opt;
  opt.cap_words = 2;
  opt.enumeration = Enumeration::direct;
  EXPECT_THROW(empirical_sequence_entropy(t, {2, CodingMode::base}, 2, A, std::nullopt, opt), ResourceGuardError);
}

TEST(EmpiricalEntropy, MatchesBruteForceOnRandomTowers) {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 60; ++trial) {
    const auto sd = oracle::random_stacking(gen, 3000, 6, 3, 4);
    const Tower t(sd);
    const std::size_t n = t.tower_count();
    const auto A = random_offsets(gen, 1 + gen() % 4, 4);
    if (A.back() >= t.height_u64(n)) continue;
    if (oracle::valid_levels(sd, n, A.back()).empty()) continue;
    for (std::size_t r = 1; r <= n; ++r) {
      for (auto mode : {CodingMode::base, CodingMode::refined}) {
        std::size_t distinct = 0;
        const double expected = brute_entropy(sd, r, n, A, mode, &distinct);
        for (auto e : {Enumeration::direct, Enumeration::automatic}) {
          EntropyOptions opt;
          opt.enumeration = e;
          const auto res = empirical_sequence_entropy(t, {r, mode}, n, A, std::nullopt, opt);
          ASSERT_NEAR(res.h_nats, expected, 1e-12) << trial << " r " << r;
          ASSERT_EQ(res.histogram.distinct(), distinct);
        }
      }
    }
  }
}

TEST(EmpiricalEntropy, GroupedEqualsDirectHistogram) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto sd = oracle::random_stacking(gen, 8000, 6, 3, 5);
    const Tower t(sd);
    const std::size_t n = t.tower_count();
    if (n < 2) continue;
    const auto A = random_offsets(gen, 1 + gen() % 5, 6);
    if (A.back() >= t.height_u64(n) || t.valid_levels(n, A.back()).empty()) continue;
    for (std::size_t r = 1; r < n; ++r) {
      for (auto mode : {CodingMode::base, CodingMode::refined}) {
        EntropyOptions direct, grouped;
        direct.enumeration = Enumeration::direct;
        grouped.enumeration = Enumeration::grouped;
        const auto a = word_histogram(t, {r, mode}, n, A, std::nullopt, direct);
        const auto b = word_histogram(t, {r, mode}, n, A, std::nullopt, grouped);
        ASSERT_EQ(a.total, b.total);
        ASSERT_EQ(a.sorted(), b.sorted()) << trial << " r " << r;
        ASSERT_EQ(a.entropy_nats(), b.entropy_nats());
      }
    }
  }
}

TEST(EmpiricalEntropy, WorkerCountInvariance) {
  const Tower t(squaring_heights(2, 4));
  const std::vector<std::uint64_t> A{1, 2, 5, 8, 11, 14, 18};
  for (auto e : {Enumeration::direct, Enumeration::grouped}) {
    EntropyOptions one, four;
    one.enumeration = four.enumeration = e;
    four.workers = 4;
    const auto a = empirical_sequence_entropy(t, {3, CodingMode::base}, 5, A, std::nullopt, one);
    const auto b = empirical_sequence_entropy(t, {3, CodingMode::base}, 5, A, std::nullopt, four);
    EXPECT_EQ(a.h_nats, b.h_nats);
    EXPECT_EQ(a.histogram.sorted(), b.histogram.sorted());
    const auto sa = empirical_sequence_entropy(t, {3, CodingMode::base}, 5, A, SampleSpec{5000, 3}, one);
    const auto sb = empirical_sequence_entropy(t, {3, CodingMode::base}, 5, A, SampleSpec{5000, 3}, four);
    EXPECT_EQ(sa.h_nats, sb.h_nats);
    EXPECT_EQ(sa.histogram.sorted(), sb.histogram.sorted());
  }
}

TEST(EmpiricalEntropy, PermutationInvariance) {
  std::vector<std::uint64_t> counts{5, 1, 9, 3, 3, 7, 1};
  const double h = counts_entropy(counts);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(counts.begin(), counts.end(), gen);
    EXPECT_EQ(counts_entropy(counts), h);
  }
}

TEST(EmpiricalEntropy, SampledAgreesWithExact) {
  const Tower t(oracle::tiny());
  const std::vector<std::uint64_t> A{1, 2};
  const auto exact = empirical_sequence_entropy(t, {1, CodingMode::base}, 2, A);
  const auto sampled = empirical_sequence_entropy(t, {1, CodingMode::base}, 2, A, SampleSpec{100, 42});
  EXPECT_NEAR(sampled.h_per_n, exact.h_per_n, 0.02);
  EXPECT_TRUE(sampled.histogram.sampled);
  EXPECT_EQ(sampled.histogram.total, 100U);
}

TEST(EmpiricalEntropy, SampledErrorShrinksWithCount) {
  std::mt19937_64 gen(8);
  const auto sd = oracle::random_stacking(gen, 9000, 6, 3, 5);
  const Tower t(sd);
  const std::size_t n = t.tower_count();
  const std::vector<std::uint64_t> A{1, 3};
  const CodingSpec spec{1, CodingMode::base};
  ASSERT_LE(t.valid_levels(n, A.back()).size(), 10000U);
  const double exact = empirical_sequence_entropy(t, spec, n, A).h_nats;
  std::vector<double> medians;
  for (std::uint64_t count : {100ULL, 1000ULL, 10000ULL}) {
    std::vector<double> err;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      err.push_back(std::abs(empirical_sequence_entropy(t, spec, n, A, SampleSpec{count, seed}).h_nats - exact));
    }
    std::nth_element(err.begin(), err.begin() + 25, err.end());
    medians.push_back(err[25]);
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(SubsequenceCheck, Examples) {
  const Tower t(oracle::tiny());
  const std::vector<std::uint64_t> A{1, 2};
  const std::vector<std::uint64_t> all{1, 2};
  auto c = subsequence_entropy_check(t, {1, CodingMode::base}, 2, A, all);
  EXPECT_EQ(c.full, c.restricted);
  EXPECT_EQ(c.density, Rational(1));
  const std::vector<std::uint64_t> first{1};
  c = subsequence_entropy_check(t, {1, CodingMode::base}, 2, A, first);
  EXPECT_TRUE(c.holds);
  EXPECT_LE(c.restricted, c.full);
  const std::vector<std::uint64_t> second{2};
  c = subsequence_entropy_check(t, {1, CodingMode::base}, 2, A, second);
  // Words over K = {0, 1} at position 2: symbols 0 and 1, distinct.
  EXPECT_NEAR(c.restricted, std::log(2.0), 1e-15);
  EXPECT_NEAR(c.full, std::log(2.0), 1e-15);
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.density, Rational(1, 2));
}

TEST(SubsequenceCheck, RandomInstances) {
  std::mt19937_64 gen(12);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto sd = oracle::random_stacking(gen, 3000, 6, 3, 4);
    const Tower t(sd);
    const std::size_t n = t.tower_count();
    const auto A = random_offsets(gen, 2 + gen() % 4, 4);
    if (A.back() >= t.height_u64(n) || t.valid_levels(n, A.back()).empty()) continue;
    std::vector<std::uint64_t> J;
    for (std::uint64_t j = 1; j <= A.size(); ++j) {
      if (gen() % 2) J.push_back(j);
    }
    if (J.empty()) J.push_back(1);
    const auto c = subsequence_entropy_check(t, {1 + gen() % n, CodingMode::base}, n, A, J);
    EXPECT_TRUE(c.holds);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(Profile, ConstantScheduleReducesToPlainEntropy) {
  const Tower t(squaring_heights(2, 4));
  const std::vector<std::uint64_t> A{1, 2, 5, 8};
  const std::vector<std::uint64_t> Ns{1, 2, 3, 4};
  const auto rows = seq_entropy_upper_profile(t, A, [](std::uint64_t) { return std::size_t{2}; }, Ns);
  ASSERT_EQ(rows.size(), 4U);
  for (const auto& row : rows) {
    EXPECT_EQ(row.reference, 2U);
    EXPECT_EQ(row.stage, 3U);
    const auto direct = empirical_sequence_entropy(t, {2, CodingMode::base}, 3, std::span(A).first(row.N));
    EXPECT_EQ(row.h_nats, direct.h_nats);
    EXPECT_NEAR(row.h_per_n, direct.h_nats / static_cast<double>(row.N), 1e-15);
  }
  // N = 1 is the conditioned entropy of xi_2 itself.
  EXPECT_NEAR(rows[0].h_per_n, rows[0].h_nats, 1e-15);
}

TEST(Profile, RejectsDecreasingTau) {
  const Tower t(squaring_heights(2, 4));
  const std::vector<std::uint64_t> A{1, 2, 5, 8};
  const std::vector<std::uint64_t> Ns{1, 2};
  EXPECT_THROW(seq_entropy_upper_profile(t, A, [](std::uint64_t N) { return std::size_t{3 - N}; }, Ns),
               ValidationError);
}

TEST(Project, MergesCounts) {
  const Tower t(oracle::tiny());
  const std::vector<std::uint64_t> A{0, 1};
  const auto hist = word_histogram(t, {1, CodingMode::base}, 2, A);
  const std::vector<std::uint64_t> J{1};
  const auto p = project(hist, J);
  EXPECT_EQ(p.total, hist.total);
  std::uint64_t sum = 0;
  for (const auto& [w, c] : p.counts) {
    EXPECT_EQ(w.size(), 1U);
    sum += c;
  }
  EXPECT_EQ(sum, hist.total);
}
