#include <gtest/gtest.h>

#include <random>
#include <variant>

#include "oracle.hpp"
#include "rankone/error.hpp"
#include "rankone/tower.hpp"

using namespace rankone;

namespace {

const Tower& tiny_tower() {
  static const Tower t(oracle::tiny());
  return t;
}

}  // namespace

TEST(Locate, Examples) {
  const auto& t = tiny_tower();
  auto loc = t.locate(2, 3);
  ASSERT_EQ(loc.chain.size(), 1U);
  EXPECT_EQ(std::get<SliceStep>(loc.chain[0]), (SliceStep{2, 0}));
  loc = t.locate(2, 2);
  EXPECT_EQ(std::get<SpacerStep>(loc.chain[0]), (SpacerStep{1, 0}));
  EXPECT_TRUE(loc.hits_spacer());
  EXPECT_EQ(loc.spacer_stage(), 2U);
  loc = t.locate(2, 4);
  EXPECT_EQ(std::get<SliceStep>(loc.chain[0]), (SliceStep{2, 1}));
  EXPECT_FALSE(loc.hits_spacer());
  EXPECT_THROW(t.locate(2, 5), ValidationError);
}

TEST(Decode, Examples) {
  const auto& t = tiny_tower();
  EXPECT_EQ(t.decode({1, CodingMode::base}, 2, 2), 0U);
  EXPECT_EQ(t.decode({1, CodingMode::base}, 2, 4), 2U);
  EXPECT_EQ(t.decode({1, CodingMode::refined}, 2, 2), 3U);
  EXPECT_EQ(t.max_symbol({1, CodingMode::base}), 2U);
  EXPECT_EQ(t.max_symbol({1, CodingMode::refined}), 3U);
}

TEST(Decode, RefinedNeedsFiniteCap) {
  const Tower t(oracle::explicit_stages(2, std::nullopt, {{1}}));
  EXPECT_THROW(t.check_spec({1, CodingMode::refined}, 2), ValidationError);
  EXPECT_THROW(t.decode({1, CodingMode::refined}, 2, 2), ValidationError);
  EXPECT_THROW(t.decode({3, CodingMode::base}, 2, 0), ValidationError);
}

TEST(ValidLevelsTest, Examples) {
  const auto& t = tiny_tower();
  auto K = t.valid_levels(2, 2);
  EXPECT_EQ(std::vector<std::uint64_t>(K.begin(), K.end()), (std::vector<std::uint64_t>{0, 1}));
  K = t.valid_levels(2, 0);
  EXPECT_EQ(std::vector<std::uint64_t>(K.begin(), K.end()), (std::vector<std::uint64_t>{0, 1, 3, 4}));
  EXPECT_EQ(K.size(), 4U);
  EXPECT_TRUE(t.valid_levels(2, 5).empty());
}

TEST(CodeOrbit, Examples) {
  const auto& t = tiny_tower();
  const std::vector<std::uint64_t> A{1, 2};
  const CodingSpec spec{1, CodingMode::base};
  EXPECT_EQ(t.code_orbit(spec, 2, 0, A), (CodedWord{2, 0}));
  EXPECT_EQ(t.code_orbit(spec, 2, 1, A), (CodedWord{0, 1}));
  try {
    t.code_orbit(spec, 2, 3, A);
    FAIL();
  } catch (const EscapeError& e) {
    EXPECT_EQ(e.index(), 2U);
  }
  EXPECT_EQ(to_string(CodedWord{2, 0}), "2,0");
  EXPECT_EQ(to_string(CodedWord{}), "");
}

TEST(Decode, MatchesMaterializationOnRandomTowers) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sd = oracle::random_stacking(gen, 3000, 6, 3, 5);
    const Tower t(sd);
    const std::size_t M = t.tower_count();
    for (std::size_t n = 1; n <= M; ++n) {
      for (std::size_t r = 1; r <= n; ++r) {
        for (auto mode : {CodingMode::base, CodingMode::refined}) {
          const auto w = oracle::materialize(sd, r, n, mode);
          ASSERT_EQ(w.size(), t.height_u64(n));
          for (std::uint64_t k = 0; k < w.size(); ++k) {
            ASSERT_EQ(t.decode({r, mode}, n, k), w[k]) << "trial " << trial << " n " << n << " r " << r << " k " << k;
          }
        }
      }
    }
  }
}

TEST(Locate, RecomposeIsIdentity) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sd = oracle::random_stacking(gen, 5000, 6, 3, 5);
    const Tower t(sd);
    for (std::size_t n = 1; n <= t.tower_count(); ++n) {
      for (std::uint64_t k = 0; k < t.height_u64(n); ++k) {
        const auto loc = t.locate(n, k);
        ASSERT_EQ(t.recompose(loc), k);
        if (loc.hits_spacer()) {
          const std::size_t m = loc.spacer_stage();
          // Outside every slice of S_{m-1} inside S_m.
          ASSERT_EQ(t.decode({m - 1, CodingMode::base}, n, k), 0U);
        }
      }
    }
  }
}

TEST(Decode, ZeroCountIdentity) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sd = oracle::random_stacking(gen, 5000, 6, 3, 5);
    const Tower t(sd);
    const std::size_t M = t.tower_count();
    std::uint64_t zeros = 0;
    for (std::uint64_t k = 0; k < t.height_u64(M); ++k) zeros += t.decode({1, CodingMode::base}, M, k) == 0;
    // copies of S_{m+1} in S_M times the spacer total of step m.
    std::uint64_t expected = 0;
    for (std::size_t m = 1; m < M; ++m) {
      std::uint64_t copies = 1;
      for (std::size_t j = m + 1; j < M; ++j) copies *= t.slice_count(j);
      expected += copies * static_cast<std::uint64_t>(t.spacer_total(m));
    }
    EXPECT_EQ(zeros, expected);
  }
}

TEST(ValidLevelsTest, MatchesBruteForce) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto sd = oracle::random_stacking(gen, 3000, 6, 3, 5);
    const Tower t(sd);
    for (std::size_t n = 2; n <= t.tower_count(); ++n) {
      const std::uint64_t h = t.height_u64(n);
      for (std::uint64_t tl : {std::uint64_t{0}, std::uint64_t{1}, h / 3, h - 1, h, h + 4}) {
        const auto expected = oracle::valid_levels(sd, n, tl);
        const auto K = t.valid_levels(n, tl);
        ASSERT_EQ(K.size(), expected.size());
        ASSERT_EQ(std::vector<std::uint64_t>(K.begin(), K.end()), expected);
        for (std::uint64_t u = 0; u < K.size(); ++u) {
          ASSERT_EQ(K.nth(u), expected[u]);
          ASSERT_EQ(*K.at(u), expected[u]);
        }
        for (std::uint64_t k = 0; k < h; ++k) {
          ASSERT_EQ(K.contains(k), std::binary_search(expected.begin(), expected.end(), k));
        }
      }
    }
  }
}

TEST(CodeOrbit, MatchesMaterializedWindow) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sd = oracle::random_stacking(gen, 3000, 6, 3, 4);
    const Tower t(sd);
    const std::size_t n = t.tower_count();
    const std::vector<std::uint64_t> A{0, 1, 3, 7};
    const auto w = oracle::materialize(sd, 1, n, CodingMode::base);
    for (std::uint64_t k = 0; k < w.size(); ++k) {
      if (k + A.back() >= w.size()) {
        EXPECT_THROW(t.code_orbit({1, CodingMode::base}, n, k, A), EscapeError);
        continue;
      }
      const auto word = t.code_orbit({1, CodingMode::base}, n, k, A);
      for (std::size_t i = 0; i < A.size(); ++i) ASSERT_EQ(word[i], w[k + A[i]]);
    }
  }
}

TEST(Decode, SeededStagesMatchMaterialization) {
  StackingData sd;
  sd.initial_height = 2;
  sd.spacer_cap = 3;
  for (std::uint64_t s : {3, 4, 5}) {
    Stage st;
    st.q = 5;
    st.spacers = SeededSpacers{s, SpacerDistribution::uniform};
    sd.stages.push_back(st);
  }
  const Tower t(sd);
  for (std::size_t r = 1; r <= 4; ++r) {
    const auto w = oracle::materialize(sd, r, 4, CodingMode::refined);
    for (std::uint64_t k = 0; k < w.size(); ++k) ASSERT_EQ(t.decode({r, CodingMode::refined}, 4, k), w[k]);
  }
}
