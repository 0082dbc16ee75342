#include "rankone/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "parallel.hpp"
#include "rankone/error.hpp"
#include "rankone/rng.hpp"

namespace rankone {

namespace {

constexpr std::uint32_t kSamplingStream = 0x53414d50;  // "SAMP"
constexpr std::uint32_t kEndOfTower = 0xFFFFFFFFU;
constexpr std::uint64_t kMaxGroupKeyCells = std::uint64_t{1} << 28;

std::vector<double> uniform_weights(std::size_t size) { return std::vector<double>(size, 1.0 / static_cast<double>(size)); }

double sum_sorted(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

void check_cap(std::size_t distinct, std::uint64_t cap) {
  if (distinct > cap) {
    throw ResourceGuardError("word histogram exceeds the cap of " + std::to_string(cap) +
                             " distinct words; raise --cap-words or shorten N");
  }
}

}  // namespace

void validate(const WeightedPartition& p) {
  if (p.total_mass < 0.0 || p.total_mass > 1.0 + 1e-12) throw ValidationError("total mass must lie in [0, 1]");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    if (!(p.weights[i] >= 0.0)) throw ValidationError("weight " + std::to_string(i) + " is negative");
    sum += p.weights[i];
  }
  if (std::abs(sum - p.total_mass) > 1e-9) {
    throw ValidationError("weights sum to " + format_fixed(sum) + " but the declared mass is " + format_fixed(p.total_mass));
  }
}

double entropy(const WeightedPartition& p) {
  validate(p);
  return entropy(std::span<const double>(p.weights));
}

double entropy(std::span<const double> weights) {
  std::vector<double> terms;
  terms.reserve(weights.size());
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("negative weight in partition");
    terms.push_back(entropy_term(w));
  }
  return sum_sorted(std::move(terms));
}

double labeling_entropy(std::span<const std::uint64_t> labels, std::span<const double> weights) {
  std::vector<double> uniform;
  if (weights.empty()) {
    uniform = uniform_weights(labels.size());
    weights = uniform;
  }
  if (weights.size() != labels.size()) throw ValidationError("labeling and weights have different index sets");
  std::map<std::uint64_t, double> mass;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw ValidationError("negative weight in partition");
    mass[labels[i]] += weights[i];
  }
  std::vector<double> atoms;
  atoms.reserve(mass.size());
  for (const auto& [label, w] : mass) atoms.push_back(w);
  return entropy(atoms);
}

double conditional_entropy(std::span<const std::uint64_t> eta, std::span<const std::uint64_t> xi,
                           std::span<const double> weights) {
  if (eta.size() != xi.size()) throw ValidationError("labelings have different index sets");
  std::vector<double> uniform;
  if (weights.empty()) {
    uniform = uniform_weights(xi.size());
    weights = uniform;
  }
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> joint;
  for (std::size_t i = 0; i < xi.size(); ++i) joint[{eta[i], xi[i]}] += weights[i];
  std::vector<double> atoms;
  atoms.reserve(joint.size());
  for (const auto& [label, w] : joint) atoms.push_back(w);
  return std::max(0.0, entropy(atoms) - labeling_entropy(xi, weights));
}

double cyclic_join_entropy(std::span<const std::uint64_t> labels, std::span<const std::uint64_t> offsets) {
  const std::size_t h = labels.size();
  if (h == 0) throw ValidationError("cyclic system needs at least one point");
  std::map<std::vector<std::uint64_t>, std::uint64_t> words;
  std::vector<std::uint64_t> w(offsets.size());
  for (std::size_t x = 0; x < h; ++x) {
    for (std::size_t k = 0; k < offsets.size(); ++k) w[k] = labels[(x + offsets[k]) % h];
    ++words[w];
  }
  std::vector<std::uint64_t> counts;
  counts.reserve(words.size());
  for (const auto& [word, c] : words) counts.push_back(c);
  return counts_entropy(std::move(counts));
}

double lower_bound_disjoint(std::span<const double> masses, double eps, double total_mass) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (!(total_mass > 0.0)) throw ValidationError("mu(X) must be positive");
  const double cap = eps * total_mass;
  double e = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] >= 0.0)) throw ValidationError("mass " + std::to_string(i) + " is negative");
    if (masses[i] > cap * (1.0 + 1e-12)) {
      throw ValidationError("mu(E_" + std::to_string(i + 1) + ") = " + format_fixed(masses[i]) +
                            " exceeds eps mu(X) = " + format_fixed(cap));
    }
    e += masses[i];
  }
  if (e == 0.0) return 0.0;
  return -e * std::log(cap);
}

BoundCheck check_lower_bound_disjoint(std::span<const double> masses, double eps, double total_mass, double slack) {
  BoundCheck c;
  c.bound = lower_bound_disjoint(masses, eps, total_mass);
  c.value = entropy(masses);
  c.holds = c.value >= c.bound - slack;
  return c;
}

double upper_bound_jensen(std::span<const double> masses, double total_mass, bool use_piece_mass) {
  if (masses.empty()) throw ValidationError("need at least one piece");
  double e = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0)) throw ValidationError("negative mass");
    e += m;
  }
  const double x = use_piece_mass ? e : total_mass;
  return entropy_term(x) + x * std::log(static_cast<double>(masses.size()));
}

BoundCheck check_upper_bound_jensen(std::span<const double> masses, double total_mass, bool use_piece_mass,
                                    double slack) {
  BoundCheck c;
  c.bound = upper_bound_jensen(masses, total_mass, use_piece_mass);
  c.value = entropy(masses);
  c.holds = c.value <= c.bound + slack;
  return c;
}

std::size_t WordHash::operator()(const CodedWord& w) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL ^ w.size();
  for (Symbol s : w) {
    h ^= s;
    h *= 0xFF51AFD7ED558CCDULL;
    h ^= h >> 32;
  }
  return static_cast<std::size_t>(h);
}

std::uint64_t WordHistogram::max_count() const noexcept {
  std::uint64_t best = 0;
  for (const auto& [w, c] : counts) best = std::max(best, c);
  return best;
}

std::vector<std::pair<CodedWord, std::uint64_t>> WordHistogram::sorted() const {
  std::vector<std::pair<CodedWord, std::uint64_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end());
  return out;
}

double counts_entropy(std::vector<std::uint64_t> counts) {
  std::sort(counts.begin(), counts.end());
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  const double t = static_cast<double>(total);
  double acc = 0.0;
  for (auto c : counts) acc += entropy_term(static_cast<double>(c) / t);
  return acc;
}

double WordHistogram::entropy_nats() const {
  std::vector<std::uint64_t> c;
  c.reserve(counts.size());
  for (const auto& [w, n] : counts) c.push_back(n);
  return counts_entropy(std::move(c));
}

namespace {

void merge_into(WordCounts& into, WordCounts&& from) {
  if (into.empty()) {
    into = std::move(from);
    return;
  }
  for (auto& [w, c] : from) into[w] += c;
}

struct Group {
  std::uint64_t count = 0;
  std::uint64_t rep = 0;  // 0-based slice
};

// Two slices of S_{n-1} inside S_n produce identical words at every offset j
// when the spacer counts following them agree up to the farthest slice an
// orbit can reach, so one representative per pattern is coded and weighted.
WordCounts grouped_counts(const Tower& tower, const CodingSpec& spec, std::size_t n,
                          std::span<const std::uint64_t> offsets, const ValidLevels& K,
                          const EntropyOptions& options) {
  const std::uint64_t g = tower.height_u64(n - 1);
  const std::uint64_t q = tower.slice_count(n - 1);
  const std::uint64_t t_last = offsets.empty() ? 0 : offsets.back();
  const std::uint64_t last_slice = (K.size() - 1) / g;
  const std::uint64_t reach = (g - 1 + t_last) / g;  // gaps an orbit can cross

  if ((last_slice + 1) > kMaxGroupKeyCells / std::max<std::uint64_t>(reach, 1)) {
    throw ResourceGuardError("grouped enumeration needs " + std::to_string(last_slice + 1) + " x " +
                             std::to_string(reach) + " spacer lookups; use sampled mode");
  }

  std::map<std::vector<std::uint32_t>, Group> groups;
  std::vector<std::uint32_t> key(reach);
  for (std::uint64_t i0 = 0; i0 <= last_slice; ++i0) {
    for (std::uint64_t j = 0; j < reach; ++j) {
      const std::uint64_t idx = i0 + j;  // 0-based gap after slice idx
      key[j] = idx + 1 < q ? tower.spacer(n - 1, idx + 1) : kEndOfTower;
    }
    auto [it, inserted] = groups.try_emplace(key, Group{0, i0});
    ++it->second.count;
  }

  std::vector<Group> flat;
  flat.reserve(groups.size());
  for (const auto& [k, grp] : groups) flat.push_back(grp);
  std::sort(flat.begin(), flat.end(), [](const Group& a, const Group& b) { return a.rep < b.rep; });
  std::vector<std::uint64_t> starts(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) starts[i] = tower.slice_start(n - 1, flat[i].rep + 1);

  const std::uint64_t items = flat.size() * g;
  std::vector<WordCounts> partial(std::max<std::size_t>(options.workers, 1));
  detail::parallel_ranges(options.workers, items, [&](std::size_t w, std::uint64_t begin, std::uint64_t end) {
    WordCounts& local = partial[w];
    CodedWord word(offsets.size());
    for (std::uint64_t item = begin; item < end; ++item) {
      const Group& grp = flat[item / g];
      const std::uint64_t j = item % g;
      if (grp.rep * g + j >= K.size()) continue;
      tower.code_orbit_into(spec, n, starts[item / g] + j, offsets, word);
      local[word] += grp.count;
      if (local.size() > options.cap_words) check_cap(local.size(), options.cap_words);
    }
  });
  WordCounts merged;
  for (auto& p : partial) {
    merge_into(merged, std::move(p));
    check_cap(merged.size(), options.cap_words);
  }
  return merged;
}

WordCounts direct_counts(const Tower& tower, const CodingSpec& spec, std::size_t n,
                         std::span<const std::uint64_t> offsets, const ValidLevels& K, const EntropyOptions& options) {
  std::vector<WordCounts> partial(std::max<std::size_t>(options.workers, 1));
  detail::parallel_ranges(options.workers, K.size(), [&](std::size_t w, std::uint64_t begin, std::uint64_t end) {
    WordCounts& local = partial[w];
    CodedWord word(offsets.size());
    auto it = K.at(begin);
    for (std::uint64_t u = begin; u < end; ++u, ++it) {
      tower.code_orbit_into(spec, n, *it, offsets, word);
      ++local[word];
      if (local.size() > options.cap_words) check_cap(local.size(), options.cap_words);
    }
  });
  WordCounts merged;
  for (auto& p : partial) {
    merge_into(merged, std::move(p));
    check_cap(merged.size(), options.cap_words);
  }
  return merged;
}

WordCounts sampled_counts(const Tower& tower, const CodingSpec& spec, std::size_t n,
                          std::span<const std::uint64_t> offsets, const ValidLevels& K, const SampleSpec& sample,
                          const EntropyOptions& options) {
  const CounterRng rng(sample.seed, kSamplingStream);
  std::vector<WordCounts> partial(std::max<std::size_t>(options.workers, 1));
  detail::parallel_ranges(options.workers, sample.count, [&](std::size_t w, std::uint64_t begin, std::uint64_t end) {
    WordCounts& local = partial[w];
    CodedWord word(offsets.size());
    for (std::uint64_t s = begin; s < end; ++s) {
      const std::uint64_t level = K.nth(rng.uniform_below(K.size(), s));
      tower.code_orbit_into(spec, n, level, offsets, word);
      ++local[word];
      if (local.size() > options.cap_words) check_cap(local.size(), options.cap_words);
    }
  });
  WordCounts merged;
  for (auto& p : partial) {
    merge_into(merged, std::move(p));
    check_cap(merged.size(), options.cap_words);
  }
  return merged;
}

}  // namespace

WordHistogram word_histogram(const Tower& tower, const CodingSpec& spec, std::size_t n,
                             std::span<const std::uint64_t> offsets, const std::optional<SampleSpec>& sample,
                             const EntropyOptions& options) {
  tower.check_spec(spec, n);
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] <= offsets[i - 1]) throw ValidationError("sampling offsets must be strictly increasing");
  }
  const std::uint64_t t_last = offsets.empty() ? 0 : offsets.back();
  const ValidLevels K = tower.valid_levels(n, t_last);
  if (K.empty()) {
    throw ValidationError("no valid levels at stage " + std::to_string(n) + ": t_N = " + std::to_string(t_last) +
                          " reaches past h_n = " + tower.height(n).str());
  }

  WordHistogram hist;
  hist.stage = n;
  hist.reference = spec.reference;
  hist.mode = spec.mode;
  hist.offsets.assign(offsets.begin(), offsets.end());
  hist.valid_count = K.size();
  hist.stage_height = tower.height(n);
  hist.coverage = static_cast<double>(K.size()) / to_double(hist.stage_height);

  if (sample) {
    if (sample->count == 0) throw ValidationError("sample count must be positive");
    hist.sampled = true;
    hist.seed = sample->seed;
    hist.counts = sampled_counts(tower, spec, n, offsets, K, *sample, options);
    hist.total = sample->count;
    return hist;
  }

  bool grouped = spec.reference < n;
  if (options.enumeration == Enumeration::direct) grouped = false;
  if (options.enumeration == Enumeration::grouped) {
    if (spec.reference >= n) throw ValidationError("grouped enumeration needs reference < stage");
    grouped = true;
  }
  hist.counts = grouped ? grouped_counts(tower, spec, n, offsets, K, options)
                        : direct_counts(tower, spec, n, offsets, K, options);
  hist.total = K.size();
  return hist;
}

EntropyResult empirical_sequence_entropy(const Tower& tower, const CodingSpec& spec, std::size_t n,
                                         std::span<const std::uint64_t> offsets,
                                         const std::optional<SampleSpec>& sample, const EntropyOptions& options) {
  EntropyResult r;
  r.histogram = word_histogram(tower, spec, n, offsets, sample, options);
  r.h_nats = r.histogram.entropy_nats();
  r.h_per_n = offsets.empty() ? 0.0 : r.h_nats / static_cast<double>(offsets.size());
  return r;
}

std::vector<ProfileRow> seq_entropy_upper_profile(const Tower& tower, std::span<const std::uint64_t> offsets,
                                                  const std::function<std::size_t(std::uint64_t)>& tau,
                                                  std::span<const std::uint64_t> Ns, CodingMode mode,
                                                  std::size_t stage_lift, const std::optional<SampleSpec>& sample,
                                                  const EntropyOptions& options) {
  std::vector<ProfileRow> rows;
  std::size_t previous_tau = 0;
  std::uint64_t previous_N = 0;
  for (std::uint64_t N : Ns) {
    if (N < 1 || N > offsets.size()) {
      throw ValidationError("profile length " + std::to_string(N) + " outside [1, " + std::to_string(offsets.size()) +
                            "]");
    }
    const std::size_t r = tau(N);
    if (N > previous_N && r < previous_tau) throw ValidationError("tau must be non-decreasing in N");
    previous_tau = r;
    previous_N = N;
    const std::size_t stage = r + stage_lift;
    if (stage > tower.tower_count()) {
      throw ValidationError("N = " + std::to_string(N) + " needs stage " + std::to_string(stage) +
                            " but the tower has " + std::to_string(tower.tower_count()) + " stages");
    }
    const EntropyResult res =
        empirical_sequence_entropy(tower, CodingSpec{r, mode}, stage, offsets.first(N), sample, options);
    ProfileRow row;
    row.N = N;
    row.tau = r;
    row.stage = stage;
    row.reference = r;
    row.h_nats = res.h_nats;
    row.h_per_n = res.h_per_n;
    row.distinct = res.histogram.distinct();
    row.coverage = res.histogram.coverage;
    rows.push_back(row);
  }
  return rows;
}

WordHistogram project(const WordHistogram& hist, std::span<const std::uint64_t> J) {
  const std::size_t N = hist.word_length();
  for (std::uint64_t j : J) {
    if (j < 1 || j > N) throw ValidationError("position " + std::to_string(j) + " outside [1, " + std::to_string(N) + "]");
  }
  WordHistogram out;
  out.total = hist.total;
  out.stage = hist.stage;
  out.reference = hist.reference;
  out.mode = hist.mode;
  out.sampled = hist.sampled;
  out.seed = hist.seed;
  out.valid_count = hist.valid_count;
  out.stage_height = hist.stage_height;
  out.coverage = hist.coverage;
  for (std::uint64_t j : J) out.offsets.push_back(hist.offsets[j - 1]);
  CodedWord sub(J.size());
  for (const auto& [w, c] : hist.counts) {
    for (std::size_t i = 0; i < J.size(); ++i) sub[i] = w[J[i] - 1];
    out.counts[sub] += c;
  }
  return out;
}

SubsequenceCheck subsequence_entropy_check(const Tower& tower, const CodingSpec& spec, std::size_t n,
                                           std::span<const std::uint64_t> offsets,
                                           std::span<const std::uint64_t> J, const EntropyOptions& options,
                                           double slack) {
  const WordHistogram full = word_histogram(tower, spec, n, offsets, std::nullopt, options);
  std::vector<std::uint64_t> positions(J.begin(), J.end());
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  const WordHistogram sub = project(full, positions);
  SubsequenceCheck c;
  c.full = full.entropy_nats();
  c.restricted = sub.entropy_nats();
  c.density = offsets.empty() ? Rational(0) : Rational(BigInt(positions.size())) / Rational(BigInt(offsets.size()));
  c.holds = c.full >= c.restricted - slack;
  return c;
}

}  // namespace rankone
