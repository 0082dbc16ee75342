#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rankone/recipes.hpp"
#include "rankone/sampling.hpp"
#include "rankone/stacking.hpp"

namespace rankone {

inline constexpr std::string_view tool_version = "0.1.0";

// One entry of the config's operation list. params holds the operation's
// JSON object (minus "op") in canonical form.
struct Operation {
  std::string kind;  // entropy, profile, seq, bounds, markov, conditional, hoeffding, generic, recipe
  std::string params;
  std::string file;  // CSV file name inside the output directory
};

struct ExperimentConfig {
  std::optional<StackingData> stacking;
  // Per-stage bundles when the stacking data was generated from a recipe.
  std::vector<RecipeBundle> stacking_bundles;
  std::optional<SequenceSpec> sequence;
  std::vector<Operation> operations;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::uint64_t cap_words = std::uint64_t{1} << 24;
  std::string out_dir;
  // Canonical JSON of everything that determines the data outputs (worker
  // count and output directory excluded).
  std::string canonical;

  std::string hash() const;  // SHA-256 of canonical, hex
};

// Command-line values that take precedence over the document.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> cap_words;
  std::optional<std::string> out_dir;
};

// Throws ValidationError naming the offending field.
ExperimentConfig parse_config(std::string_view text, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string csv() const;
};

struct OperationResult {
  Operation op;
  Table table;
  std::vector<std::string> summary;  // "key: value" lines
  int status = 0;                    // nonzero exit code when the operation reports a failed search
};

// Heights, |K| for the configured entropy runs, and recipe bundles.
std::string describe(const ExperimentConfig& cfg);

// Runs the operations whose kind is in `kinds` (all when empty).
std::vector<OperationResult> execute(const ExperimentConfig& cfg, const std::set<std::string>& kinds = {});

struct RunReport {
  std::vector<OperationResult> results;
  std::vector<std::filesystem::path> files;  // data files and summary.txt
  int exit_code = 0;
};

// Executes and writes one CSV per operation, summary.txt and meta.json.
RunReport run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
              const std::set<std::string>& kinds = {});

// Checks meta.json and summary.txt in dir against the config hash and the
// recorded output digests; throws ValidationError on any mismatch.
void verify(const ExperimentConfig& cfg, const std::filesystem::path& dir);

std::string sha256_hex(std::string_view data);

}  // namespace rankone
