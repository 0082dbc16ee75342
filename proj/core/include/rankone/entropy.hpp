#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankone/numeric.hpp"
#include "rankone/tower.hpp"

namespace rankone {

// Atom weights with a declared total mass (at most 1).
struct WeightedPartition {
  std::vector<double> weights;
  double total_mass = 1.0;
};

// Throws ValidationError on negative weights or a sum that misses total_mass.
void validate(const WeightedPartition& p);

// Sum of f(w_i), f(x) = -x log x, natural log.
double entropy(const WeightedPartition& p);
double entropy(std::span<const double> weights);

// Entropy of a labeling of a weighted index set; empty weights mean uniform
// 1/size. Labels are arbitrary integers.
double labeling_entropy(std::span<const std::uint64_t> labels, std::span<const double> weights = {});

// H(eta v xi) - H(xi) over a common index set.
double conditional_entropy(std::span<const std::uint64_t> eta, std::span<const std::uint64_t> xi,
                           std::span<const double> weights = {});

// H(v_k T^{-t_k} xi) for the rotation x -> x+1 on Z_h with uniform measure,
// where labels[x] is the xi-atom of x and h = labels.size().
double cyclic_join_entropy(std::span<const std::uint64_t> labels, std::span<const std::uint64_t> offsets);

struct BoundCheck {
  double bound = 0.0;
  double value = 0.0;  // the side being compared to the bound
  bool holds = false;
};

// -mu(E) log(eps mu(X)) for disjoint pieces with mu(E_i) <= eps mu(X).
double lower_bound_disjoint(std::span<const double> masses, double eps, double total_mass);
// value = sum f(mu(E_i)); holds iff value >= bound - slack.
BoundCheck check_lower_bound_disjoint(std::span<const double> masses, double eps, double total_mass,
                                      double slack = 1e-12);

// -mu(X) log mu(X) + mu(X) log m with m = masses.size(). With use_piece_mass
// the union mass mu(E) replaces mu(X).
double upper_bound_jensen(std::span<const double> masses, double total_mass, bool use_piece_mass = false);
// value = sum f(mu(E_i)); holds iff value <= bound + slack.
BoundCheck check_upper_bound_jensen(std::span<const double> masses, double total_mass, bool use_piece_mass = false,
                                    double slack = 1e-12);

struct WordHash {
  std::size_t operator()(const CodedWord& w) const noexcept;
};

using WordCounts = std::unordered_map<CodedWord, std::uint64_t, WordHash>;

struct WordHistogram {
  WordCounts counts;
  std::uint64_t total = 0;

  std::size_t stage = 0;
  std::size_t reference = 0;
  CodingMode mode = CodingMode::base;
  std::vector<std::uint64_t> offsets;  // t_1..t_N
  bool sampled = false;
  std::uint64_t seed = 0;
  std::uint64_t valid_count = 0;  // |K|
  BigInt stage_height;            // h_n
  double coverage = 0.0;          // |K| / h_n

  std::size_t word_length() const noexcept { return offsets.size(); }
  std::size_t distinct() const noexcept { return counts.size(); }
  std::uint64_t max_count() const noexcept;
  // Entries ordered by word, for reporting.
  std::vector<std::pair<CodedWord, std::uint64_t>> sorted() const;
  // Sum of f(c/total), accumulated in sorted-count order so the result does
  // not depend on hash-map iteration order.
  double entropy_nats() const;
};

// Plug-in entropy of a bag of counts.
double counts_entropy(std::vector<std::uint64_t> counts);

enum class Enumeration {
  automatic,  // grouped when reference < stage, else direct
  direct,     // one orbit per level of K
  grouped,    // one orbit per (spacer pattern, offset) class
};

struct EntropyOptions {
  std::size_t workers = 1;
  std::uint64_t cap_words = std::uint64_t{1} << 24;
  Enumeration enumeration = Enumeration::automatic;
};

// Exact when nullopt, else `count` uniform draws from K with `seed`.
struct SampleSpec {
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
};

struct EntropyResult {
  double h_nats = 0.0;
  double h_per_n = 0.0;
  WordHistogram histogram;
};

// Histogram of phi_{xi_r, A, N}-words over the valid levels K of S_n,
// with uniform weight on K.
WordHistogram word_histogram(const Tower& tower, const CodingSpec& spec, std::size_t n,
                             std::span<const std::uint64_t> offsets, const std::optional<SampleSpec>& sample = {},
                             const EntropyOptions& options = {});

EntropyResult empirical_sequence_entropy(const Tower& tower, const CodingSpec& spec, std::size_t n,
                                         std::span<const std::uint64_t> offsets,
                                         const std::optional<SampleSpec>& sample = {},
                                         const EntropyOptions& options = {});

struct ProfileRow {
  std::uint64_t N = 0;
  std::size_t tau = 0;
  std::size_t stage = 0;
  std::size_t reference = 0;
  double h_nats = 0.0;
  double h_per_n = 0.0;
  std::uint64_t distinct = 0;
  double coverage = 0.0;
};

// (1/N) H(v_{k<=N} T^{-t_k} xi_{tau(N)}) measured at stage tau(N) + stage_lift
// with reference tau(N), for each N in Ns. offsets must hold at least max(Ns)
// terms; tau maps N to a reference stage.
std::vector<ProfileRow> seq_entropy_upper_profile(const Tower& tower, std::span<const std::uint64_t> offsets,
                                                  const std::function<std::size_t(std::uint64_t)>& tau,
                                                  std::span<const std::uint64_t> Ns, CodingMode mode = CodingMode::base,
                                                  std::size_t stage_lift = 1,
                                                  const std::optional<SampleSpec>& sample = {},
                                                  const EntropyOptions& options = {});

struct SubsequenceCheck {
  double full = 0.0;        // H of the full join
  double restricted = 0.0;  // H of the join over J
  Rational density = 0;     // |J| / N
  bool holds = false;       // full >= restricted - slack
};

// J holds 1-based positions into the word of length N = offsets.size().
SubsequenceCheck subsequence_entropy_check(const Tower& tower, const CodingSpec& spec, std::size_t n,
                                           std::span<const std::uint64_t> offsets,
                                           std::span<const std::uint64_t> J, const EntropyOptions& options = {},
                                           double slack = 1e-12);

// Project each word onto the 1-based positions in J and merge counts.
WordHistogram project(const WordHistogram& hist, std::span<const std::uint64_t> J);

}  // namespace rankone
