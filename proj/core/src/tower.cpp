#include "rankone/tower.hpp"

#include <algorithm>
#include <mutex>
#include <optional>

#include "rankone/error.hpp"
#include "rankone/rng.hpp"

namespace rankone {

std::string_view to_string(CodingMode mode) noexcept { return mode == CodingMode::base ? "base" : "refined"; }

CodingMode coding_mode_from_string(std::string_view text) {
  if (text == "base") return CodingMode::base;
  if (text == "refined") return CodingMode::refined;
  throw ValidationError("coding mode must be 'base' or 'refined', got '" + std::string(text) + "'");
}

bool LevelLocator::hits_spacer() const noexcept {
  return !chain.empty() && std::holds_alternative<SpacerStep>(chain.back());
}

std::size_t LevelLocator::spacer_stage() const noexcept {
  return hits_spacer() ? stage - (chain.size() - 1) : 0;
}

std::string to_string(const CodedWord& word) {
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(word[i]);
  }
  return out;
}

namespace {

// Seeded stages regenerate spacers in chunks; the chunk size keeps the
// prefix table near 2^20 entries.
constexpr std::uint64_t kMaxSeededSlices = std::uint64_t{1} << 36;

std::uint64_t chunk_size_for(std::uint64_t q) {
  std::uint64_t c = 64;
  while (q / c > (std::uint64_t{1} << 20)) c <<= 1U;
  return c;
}

}  // namespace

// Index over one stacking step S_n -> S_{n+1}.
struct StepIndex {
  std::uint64_t q = 0;
  std::optional<std::uint64_t> h;  // h_n if it fits in 64 bits
  BigInt spacer_total;

  const std::vector<std::uint32_t>* list = nullptr;
  std::optional<SpacerProcess> process;

  // seeded: spacer prefix at each chunk boundary (sum of a_j for j < c*chunk)
  std::uint64_t chunk = 0;
  std::vector<std::uint64_t> chunk_prefix;

  // explicit: spacer prefix per slice, built on first use
  mutable std::once_flag prefix_once;
  mutable std::vector<std::uint64_t> prefix;

  std::uint32_t spacer0(std::uint64_t j) const { return list ? (*list)[j] : process->at(j); }

  // sum_{j < i} a_j (0-based slices and spacers)
  std::uint64_t spacer_prefix(std::uint64_t i) const {
    if (list) {
      std::call_once(prefix_once, [this] {
        prefix.resize(q);
        std::uint64_t acc = 0;
        for (std::uint64_t j = 0; j < q; ++j) {
          prefix[j] = acc;
          if (j + 1 < q) acc += (*list)[j];
        }
      });
      return prefix[i];
    }
    const std::uint64_t c = i / chunk;
    std::uint64_t acc = chunk_prefix[c];
    for (std::uint64_t j = c * chunk; j < i; ++j) acc += process->at(j);
    return acc;
  }

  std::uint64_t start0(std::uint64_t i) const { return i * *h + spacer_prefix(i); }

  // Largest 0-based slice i with start0(i) <= k.
  std::uint64_t find_slice(std::uint64_t k) const {
    const std::uint64_t hh = *h;
    if (list) {
      spacer_prefix(0);
      std::uint64_t lo = 0, hi = q;  // invariant: start0(lo) <= k, start0(hi) > k (hi = q sentinel)
      std::uint64_t guess = std::min(k / hh, q - 1);
      if (start0(guess) <= k) lo = guess; else hi = guess;
      while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (mid * hh + prefix[mid] <= k) lo = mid; else hi = mid;
      }
      return lo;
    }
    std::uint64_t clo = 0, chi = chunk_prefix.size();
    while (chi - clo > 1) {
      const std::uint64_t mid = clo + (chi - clo) / 2;
      if (mid * chunk * hh + chunk_prefix[mid] <= k) clo = mid; else chi = mid;
    }
    std::uint64_t i = clo * chunk;
    std::uint64_t start = i * hh + chunk_prefix[clo];
    const std::uint64_t end = std::min(q, (clo + 1) * chunk);
    while (i + 1 < end) {
      const std::uint64_t next = start + hh + process->at(i);
      if (next > k) break;
      start = next;
      ++i;
    }
    return i;
  }
};

struct Tower::Impl {
  StackingData sd;
  std::vector<BigInt> heights;
  std::vector<std::optional<std::uint64_t>> heights64;
  std::vector<std::unique_ptr<StepIndex>> steps;

  const StepIndex& step(std::size_t n) const {
    if (n < 1 || n >= heights.size()) {
      throw ValidationError("stacking step " + std::to_string(n) + " out of range [1, " +
                            std::to_string(heights.size() - 1) + "]");
    }
    return *steps[n - 1];
  }

  std::uint64_t h64(std::size_t n) const {
    if (n < 1 || n > heights.size()) {
      throw ValidationError("stage " + std::to_string(n) + " out of range [1, " + std::to_string(heights.size()) + "]");
    }
    if (!heights64[n - 1]) {
      throw ResourceGuardError("height of stage " + std::to_string(n) + " (" + heights[n - 1].str() +
                               ") exceeds 64-bit level addressing; query a lower stage");
    }
    return *heights64[n - 1];
  }
};

Tower::Tower(StackingData sd) {
  validate(sd);
  auto impl = std::make_shared<Impl>();
  impl->sd = std::move(sd);
  const StackingData& d = impl->sd;
  BigInt h = d.initial_height;
  impl->heights.push_back(h);
  for (std::size_t n = 1; n <= d.stages.size(); ++n) {
    const Stage& st = d.stages[n - 1];
    auto step = std::make_unique<StepIndex>();
    step->q = st.q;
    step->h = to_u64(h);
    if (const auto* list = std::get_if<std::vector<std::uint32_t>>(&st.spacers)) {
      step->list = list;
      std::uint64_t total = 0;
      for (std::uint32_t a : *list) total += a;
      step->spacer_total = total;
    } else {
      const auto& seeded = std::get<SeededSpacers>(st.spacers);
      if (st.q > kMaxSeededSlices) {
        throw ResourceGuardError("stage " + std::to_string(n) + ": q = " + std::to_string(st.q) +
                                 " seeded slices is beyond the regeneration limit 2^36");
      }
      step->process.emplace(spacer_alphabet(d, seeded), seeded.seed, static_cast<std::uint32_t>(n));
      step->chunk = chunk_size_for(st.q);
      const std::uint64_t chunks = (st.q + step->chunk - 1) / step->chunk;
      step->chunk_prefix.resize(chunks);
      std::uint64_t acc = 0;
      for (std::uint64_t c = 0; c < chunks; ++c) {
        step->chunk_prefix[c] = acc;
        const std::uint64_t end = std::min(st.q - 1, (c + 1) * step->chunk);
        for (std::uint64_t j = c * step->chunk; j < end; ++j) acc += step->process->at(j);
      }
      step->spacer_total = acc;
    }
    h = h * st.q + step->spacer_total;
    impl->heights.push_back(h);
    impl->steps.push_back(std::move(step));
  }
  for (const BigInt& x : impl->heights) impl->heights64.push_back(to_u64(x));
  impl_ = std::move(impl);
}

const StackingData& Tower::data() const noexcept { return impl_->sd; }
std::size_t Tower::tower_count() const noexcept { return impl_->heights.size(); }

const BigInt& Tower::height(std::size_t n) const {
  if (n < 1 || n > impl_->heights.size()) throw ValidationError("stage " + std::to_string(n) + " out of range");
  return impl_->heights[n - 1];
}

const std::vector<BigInt>& Tower::heights() const noexcept { return impl_->heights; }
std::uint64_t Tower::height_u64(std::size_t n) const { return impl_->h64(n); }
std::uint64_t Tower::slice_count(std::size_t n) const { return impl_->step(n).q; }
const BigInt& Tower::spacer_total(std::size_t n) const { return impl_->step(n).spacer_total; }

std::uint32_t Tower::spacer(std::size_t n, std::uint64_t i) const {
  const StepIndex& s = impl_->step(n);
  if (i < 1 || i >= s.q) throw ValidationError("spacer index " + std::to_string(i) + " out of range");
  return s.spacer0(i - 1);
}

std::uint64_t Tower::slice_start(std::size_t n, std::uint64_t i) const {
  const StepIndex& s = impl_->step(n);
  impl_->h64(n + 1);
  if (i < 1 || i > s.q) throw ValidationError("slice index " + std::to_string(i) + " out of range");
  return s.start0(i - 1);
}

LevelLocator Tower::locate(std::size_t n, std::uint64_t k) const {
  const std::uint64_t hn = impl_->h64(n);
  if (k >= hn) {
    throw ValidationError("level " + std::to_string(k) + " out of range [0, " + std::to_string(hn) + ") at stage " +
                          std::to_string(n));
  }
  LevelLocator loc;
  loc.stage = n;
  loc.level = k;
  std::uint64_t level = k;
  for (std::size_t m = n; m > 1; --m) {
    const StepIndex& s = *impl_->steps[m - 2];
    const std::uint64_t i = s.find_slice(level);
    const std::uint64_t off = level - s.start0(i);
    if (off >= *s.h) {
      loc.chain.emplace_back(SpacerStep{i + 1, off - *s.h});
      return loc;
    }
    loc.chain.emplace_back(SliceStep{i + 1, off});
    level = off;
  }
  return loc;
}

std::uint64_t Tower::recompose(const LevelLocator& loc) const {
  if (loc.chain.empty()) return loc.level;
  // Rebuild bottom-up: the last step sits in the lowest tower.
  std::uint64_t level = 0;
  for (std::size_t idx = loc.chain.size(); idx-- > 0;) {
    const std::size_t m = loc.stage - idx;  // step builds S_m from S_{m-1}
    const StepIndex& s = impl_->step(m - 1);
    if (const auto* sp = std::get_if<SpacerStep>(&loc.chain[idx])) {
      level = s.start0(sp->block - 1) + *s.h + sp->position;
    } else {
      const auto& sl = std::get<SliceStep>(loc.chain[idx]);
      const std::uint64_t inner = (idx + 1 == loc.chain.size()) ? sl.offset : level;
      level = s.start0(sl.slice - 1) + inner;
    }
  }
  return level;
}

void Tower::check_spec(const CodingSpec& spec, std::size_t n) const {
  if (spec.reference < 1 || spec.reference > n) {
    throw ValidationError("reference stage " + std::to_string(spec.reference) + " must lie in [1, " +
                          std::to_string(n) + "]");
  }
  if (n > tower_count()) throw ValidationError("stage " + std::to_string(n) + " out of range");
  if (spec.mode == CodingMode::refined && !impl_->sd.spacer_cap) {
    throw ValidationError("refined coding needs a finite spacer_cap");
  }
  max_symbol(spec);
}

Symbol Tower::max_symbol(const CodingSpec& spec) const {
  const std::uint64_t hr = impl_->h64(spec.reference);
  std::uint64_t top = hr;
  if (spec.mode == CodingMode::refined) {
    if (!impl_->sd.spacer_cap) throw ValidationError("refined coding needs a finite spacer_cap");
    top = hr + *impl_->sd.spacer_cap - 1;
  }
  if (top > 0xFFFFFFFFULL) {
    throw ResourceGuardError("alphabet of reference stage " + std::to_string(spec.reference) +
                             " does not fit 32-bit symbols");
  }
  return static_cast<Symbol>(top);
}

Symbol Tower::decode(const CodingSpec& spec, std::size_t n, std::uint64_t k) const {
  const std::uint64_t hn = impl_->h64(n);
  if (spec.reference < 1 || spec.reference > n) check_spec(spec, n);
  if (k >= hn) {
    throw ValidationError("level " + std::to_string(k) + " out of range [0, " + std::to_string(hn) + ")");
  }
  std::uint64_t level = k;
  for (std::size_t m = n; m > spec.reference; --m) {
    const StepIndex& s = *impl_->steps[m - 2];
    const std::uint64_t i = s.find_slice(level);
    const std::uint64_t off = level - s.start0(i);
    if (off >= *s.h) {
      if (spec.mode == CodingMode::base) return 0;
      if (!impl_->sd.spacer_cap) throw ValidationError("refined coding needs a finite spacer_cap");
      return static_cast<Symbol>(*impl_->heights64[spec.reference - 1] + (off - *s.h) + 1);
    }
    level = off;
  }
  return static_cast<Symbol>(level + 1);
}

void Tower::code_orbit_into(const CodingSpec& spec, std::size_t n, std::uint64_t k,
                            std::span<const std::uint64_t> offsets, std::span<Symbol> out) const {
  const std::uint64_t hn = impl_->h64(n);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const auto pos = checked_add(k, offsets[i]);
    if (!pos || *pos >= hn) throw EscapeError(i + 1);
    out[i] = decode(spec, n, *pos);
  }
}

CodedWord Tower::code_orbit(const CodingSpec& spec, std::size_t n, std::uint64_t k,
                            std::span<const std::uint64_t> offsets) const {
  check_spec(spec, n);
  const std::uint64_t hn = impl_->h64(n);
  if (k >= hn) throw ValidationError("level " + std::to_string(k) + " out of range");
  CodedWord word(offsets.size());
  code_orbit_into(spec, n, k, offsets, word);
  return word;
}

ValidLevels Tower::valid_levels(std::size_t n, std::uint64_t t_last) const {
  if (n < 2) throw ValidationError("valid levels need stage n >= 2, got " + std::to_string(n));
  return ValidLevels(*this, n, t_last);
}

ValidLevels::ValidLevels(Tower tower, std::size_t stage, std::uint64_t t_last)
    : tower_(std::move(tower)), stage_(stage), t_last_(t_last) {
  const std::uint64_t hn = tower_.impl_->h64(stage);
  slice_height_ = tower_.impl_->h64(stage - 1);
  if (t_last >= hn) return;
  const std::uint64_t bound = hn - t_last - 1;
  const StepIndex& s = *tower_.impl_->steps[stage - 2];
  const std::uint64_t i = s.find_slice(bound);
  const std::uint64_t off = bound - s.start0(i);
  count_ = i * slice_height_ + std::min(off, slice_height_ - 1) + 1;
}

std::uint64_t ValidLevels::nth(std::uint64_t u) const {
  if (u >= count_) throw ValidationError("rank " + std::to_string(u) + " out of range for K");
  const StepIndex& s = *tower_.impl_->steps[stage_ - 2];
  return s.start0(u / slice_height_) + u % slice_height_;
}

bool ValidLevels::contains(std::uint64_t k) const {
  if (count_ == 0) return false;
  const StepIndex& s = *tower_.impl_->steps[stage_ - 2];
  const std::uint64_t hn = *tower_.impl_->heights64[stage_ - 1];
  if (k > hn - t_last_ - 1) return false;
  const std::uint64_t i = s.find_slice(k);
  return k - s.start0(i) < slice_height_;
}

ValidLevels::iterator ValidLevels::begin() const {
  iterator it;
  it.owner_ = this;
  it.rank_ = 0;
  return it;
}

ValidLevels::iterator ValidLevels::end() const {
  iterator it;
  it.owner_ = this;
  it.rank_ = count_;
  return it;
}

ValidLevels::iterator ValidLevels::at(std::uint64_t u) const {
  if (u > count_) throw ValidationError("rank " + std::to_string(u) + " out of range for K");
  iterator it;
  it.owner_ = this;
  it.rank_ = u;
  if (u < count_) {
    const StepIndex& s = *tower_.impl_->steps[stage_ - 2];
    it.slice_ = u / slice_height_;
    it.offset_ = u % slice_height_;
    it.start_ = s.start0(it.slice_);
  }
  return it;
}

ValidLevels::iterator& ValidLevels::iterator::operator++() {
  ++rank_;
  if (++offset_ == owner_->slice_height_) {
    const StepIndex& s = *owner_->tower_.impl_->steps[owner_->stage_ - 2];
    start_ += owner_->slice_height_ + (slice_ + 1 < s.q ? s.spacer0(slice_) : 0);
    ++slice_;
    offset_ = 0;
  }
  return *this;
}

}  // namespace rankone
