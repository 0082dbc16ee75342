#pragma once

#include <cstdint>
#include <iterator>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rankone/numeric.hpp"
#include "rankone/stacking.hpp"

namespace rankone {

enum class CodingMode {
  base,     // alphabet {0, 1, ..., h_r}; every spacer codes to 0
  refined,  // spacer at position j of its block codes to h_r + j + 1
};

std::string_view to_string(CodingMode mode) noexcept;
CodingMode coding_mode_from_string(std::string_view text);

struct CodingSpec {
  std::size_t reference = 1;  // r, 1-based tower index
  CodingMode mode = CodingMode::base;
};

// Level lies in the `slice`-th copy (1-based) of the next-lower tower, at `offset`.
struct SliceStep {
  std::uint64_t slice = 0;
  std::uint64_t offset = 0;
  friend bool operator==(const SliceStep&, const SliceStep&) = default;
};

// Level lies in the spacer block following copy `block` (1-based), at `position` (0-based).
struct SpacerStep {
  std::uint64_t block = 0;
  std::uint64_t position = 0;
  friend bool operator==(const SpacerStep&, const SpacerStep&) = default;
};

using DescentStep = std::variant<SliceStep, SpacerStep>;

struct LevelLocator {
  std::size_t stage = 1;
  std::uint64_t level = 0;
  // chain[i] resolves the level of S_{stage-i} inside S_{stage-i-1}; the chain
  // stops at S_1 or at the first spacer block hit.
  std::vector<DescentStep> chain;

  bool hits_spacer() const noexcept;
  // Tower index whose newest spacers contain the level (the tower being
  // built when the spacer block was inserted); 0 if no spacer is hit.
  std::size_t spacer_stage() const noexcept;
};

using Symbol = std::uint32_t;
using CodedWord = std::vector<Symbol>;

// "2,0"; the empty word is "".
std::string to_string(const CodedWord& word);

class ValidLevels;

// A finite-stage rank-one construction. Words Phi_r(S_n) are never
// materialized; every query descends the cut-and-stack recursion.
// Immutable after construction and cheap to copy.
class Tower {
 public:
  explicit Tower(StackingData sd);

  const StackingData& data() const noexcept;
  std::size_t tower_count() const noexcept;

  // n is 1-based, n in [1, tower_count()].
  const BigInt& height(std::size_t n) const;
  const std::vector<BigInt>& heights() const noexcept;
  // Checked 64-bit view of h_n; throws ResourceGuardError if it does not fit.
  std::uint64_t height_u64(std::size_t n) const;

  // Stacking step n builds S_{n+1} from S_n, n in [1, tower_count()-1].
  std::uint64_t slice_count(std::size_t n) const;
  const BigInt& spacer_total(std::size_t n) const;
  // a_{n,i}, i in [1, q_n - 1].
  std::uint32_t spacer(std::size_t n, std::uint64_t i) const;
  // First level of the i-th copy (1-based) of S_n inside S_{n+1}:
  // (i-1) h_n + sum_{j<i} a_{n,j}.
  std::uint64_t slice_start(std::size_t n, std::uint64_t i) const;

  LevelLocator locate(std::size_t n, std::uint64_t k) const;
  std::uint64_t recompose(const LevelLocator& loc) const;

  Symbol decode(const CodingSpec& spec, std::size_t n, std::uint64_t k) const;
  // Largest symbol the coding can emit (h_r in base mode, h_r + L - 1 refined).
  Symbol max_symbol(const CodingSpec& spec) const;

  // Levels k <= h_n - t_last - 1 outside the spacer blocks added at the last
  // stacking step. n >= 2. Empty when t_last >= h_n.
  ValidLevels valid_levels(std::size_t n, std::uint64_t t_last) const;

  // Symbol i is decode(k + offsets[i]); throws EscapeError(i+1) at the first
  // position outside S_n.
  CodedWord code_orbit(const CodingSpec& spec, std::size_t n, std::uint64_t k,
                       std::span<const std::uint64_t> offsets) const;
  void code_orbit_into(const CodingSpec& spec, std::size_t n, std::uint64_t k, std::span<const std::uint64_t> offsets,
                       std::span<Symbol> out) const;

  // Throws ValidationError unless spec can be applied at stage n.
  void check_spec(const CodingSpec& spec, std::size_t n) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;

  friend class ValidLevels;
};

// The valid-level set K of a tower stage, with deterministic in-order
// iteration and O(1) rank-to-level mapping (no enumeration needed).
class ValidLevels {
 public:
  std::uint64_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  std::size_t stage() const noexcept { return stage_; }
  std::uint64_t t_last() const noexcept { return t_last_; }
  // The u-th smallest element of K, u < size().
  std::uint64_t nth(std::uint64_t u) const;
  bool contains(std::uint64_t k) const;

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = std::uint64_t;
    using difference_type = std::ptrdiff_t;
    using pointer = const std::uint64_t*;
    using reference = std::uint64_t;

    iterator() = default;
    std::uint64_t operator*() const noexcept { return start_ + offset_; }
    iterator& operator++();
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) noexcept { return a.rank_ == b.rank_; }

   private:
    friend class ValidLevels;
    const ValidLevels* owner_ = nullptr;
    std::uint64_t rank_ = 0;
    std::uint64_t slice_ = 0;  // 0-based copy index
    std::uint64_t offset_ = 0;
    std::uint64_t start_ = 0;
  };

  iterator begin() const;
  iterator end() const;
  // Iterator positioned at rank u (u <= size()).
  iterator at(std::uint64_t u) const;

 private:
  friend class Tower;
  ValidLevels(Tower tower, std::size_t stage, std::uint64_t t_last);

  Tower tower_;
  std::size_t stage_;
  std::uint64_t t_last_;
  std::uint64_t slice_height_ = 0;  // h_{stage-1}
  std::uint64_t count_ = 0;
};

}  // namespace rankone
