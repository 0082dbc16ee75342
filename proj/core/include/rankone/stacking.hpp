#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rankone {

enum class SpacerDistribution {
  uniform,    // uniform on {0, ..., L-1}, L = spacer cap
  bernoulli,  // uniform on {0, 1}
};

std::string_view to_string(SpacerDistribution d) noexcept;

// Spacers regenerated on demand from a counter-based stream; the stream id is
// the 1-based stage index.
struct SeededSpacers {
  std::uint64_t seed = 0;
  SpacerDistribution distribution = SpacerDistribution::uniform;
};

// One cut-and-stack step: q copies of the current tower separated by q-1
// spacer blocks.
struct Stage {
  std::uint64_t q = 2;
  std::variant<std::vector<std::uint32_t>, SeededSpacers> spacers;

  bool seeded() const noexcept { return std::holds_alternative<SeededSpacers>(spacers); }
};

struct StackingData {
  std::uint64_t initial_height = 1;
  // L: spacer counts lie in [0, L-1]. Absent means unbounded.
  std::optional<std::uint32_t> spacer_cap;
  std::vector<Stage> stages;

  // Number of towers S_1..S_M.
  std::size_t tower_count() const noexcept { return stages.size() + 1; }
};

// Alphabet size of a seeded stage's spacer process.
std::uint32_t spacer_alphabet(const StackingData& sd, const SeededSpacers& seeded);

// Throws ValidationError naming the offending stage (1-based) or field.
void validate(const StackingData& sd);

// Structured text (JSON) with fields initial_height, spacer_cap,
// stages[].q and stages[].spacers or stages[].seed + stages[].distribution.
std::string to_json_text(const StackingData& sd);
StackingData stacking_from_json_text(std::string_view text);

// Spacer-free construction with q_n = h_n, i.e. h_{n+1} = h_n^2.
StackingData squaring_heights(std::uint64_t initial_height, std::size_t stage_count);

}  // namespace rankone
