#include "rankone/rng.hpp"

#include "rankone/error.hpp"

namespace rankone {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53U;
constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32U);
  lo = static_cast<std::uint32_t>(product);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& c, const Philox4x32::Key& k) noexcept {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter counter, Key key) noexcept {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

std::array<std::uint64_t, 2> CounterRng::block(std::uint64_t index, std::uint32_t attempt) const noexcept {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32U),
                                stream_, attempt};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32U)};
  const auto out = Philox4x32::generate(ctr, key);
  return {(static_cast<std::uint64_t>(out[1]) << 32U) | out[0], (static_cast<std::uint64_t>(out[3]) << 32U) | out[2]};
}

__extension__ using u128 = unsigned __int128;

std::uint64_t CounterRng::uniform_below(std::uint64_t bound, std::uint64_t index) const noexcept {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (std::uint32_t attempt = 0;; ++attempt) {
    for (std::uint64_t word : block(index, attempt)) {
      const u128 m = static_cast<u128>(word) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64U);
    }
  }
}

double CounterRng::uniform01(std::uint64_t index) const noexcept {
  return static_cast<double>(bits(index) >> 11U) * 0x1.0p-53;
}

SpacerProcess::SpacerProcess(std::uint32_t alphabet, std::uint64_t seed, std::uint32_t stream)
    : alphabet_(alphabet), rng_(seed, stream) {
  if (alphabet == 0) throw ValidationError("spacer alphabet must be nonempty");
}

void SpacerProcess::fill(std::uint64_t first, std::span<std::uint32_t> out) const noexcept {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = at(first + j);
}

}  // namespace rankone
