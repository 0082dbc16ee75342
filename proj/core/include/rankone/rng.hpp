#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace rankone {

// Philox4x32-10 block function (Salmon et al., Random123).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter generate(Counter counter, Key key) noexcept;
};

// Counter-based generator keyed by (seed, stream). Every draw is a pure
// function of (seed, stream, index), so work can be split across threads in
// any way without changing results.
class CounterRng {
 public:
  static constexpr std::string_view algorithm_id = "philox4x32-10/lemire-reject";

  constexpr CounterRng(std::uint64_t seed, std::uint32_t stream) noexcept : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t stream() const noexcept { return stream_; }

  // Two independent 64-bit words for (index, attempt).
  std::array<std::uint64_t, 2> block(std::uint64_t index, std::uint32_t attempt = 0) const noexcept;

  std::uint64_t bits(std::uint64_t index) const noexcept { return block(index)[0]; }

  // Exactly uniform on [0, bound); bound >= 1.
  std::uint64_t uniform_below(std::uint64_t bound, std::uint64_t index) const noexcept;

  // Uniform on [0, 1) with 53 bits.
  double uniform01(std::uint64_t index) const noexcept;

  CounterRng substream(std::uint32_t stream) const noexcept { return CounterRng(seed_, stream); }

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
};

// Deterministic i.i.d. uniform spacer counts on {0, ..., alphabet-1}.
class SpacerProcess {
 public:
  SpacerProcess(std::uint32_t alphabet, std::uint64_t seed, std::uint32_t stream);

  std::uint32_t alphabet() const noexcept { return alphabet_; }
  std::uint64_t seed() const noexcept { return rng_.seed(); }
  std::uint32_t stream() const noexcept { return rng_.stream(); }

  std::uint32_t at(std::uint64_t index) const noexcept {
    return static_cast<std::uint32_t>(rng_.uniform_below(alphabet_, index));
  }

  // out[j] = at(first + j)
  void fill(std::uint64_t first, std::span<std::uint32_t> out) const noexcept;

 private:
  std::uint32_t alphabet_;
  CounterRng rng_;
};

}  // namespace rankone
