#include "rankone/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "json_io.hpp"
#include "rankone/bounds.hpp"
#include "rankone/entropy.hpp"
#include "rankone/error.hpp"
#include "rankone/genericness.hpp"
#include "rankone/hoeffding.hpp"
#include "rankone/markov.hpp"
#include "rankone/rng.hpp"
#include "rankone/tower.hpp"

namespace rankone {

namespace {

using detail::json;

constexpr std::uint64_t kMaxRecipeSlices = std::uint64_t{1} << 24;

const std::map<std::string, std::set<std::string>>& operation_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"entropy", {"stage", "reference", "coding", "N", "sample", "enumeration", "file"}},
      {"profile", {"N", "c", "lift", "coding", "sample", "enumeration", "file"}},
      {"seq", {"count", "file"}},
      {"bounds", {"phi", "c", "horizon", "file"}},
      {"markov", {"H", "file"}},
      {"conditional", {"h", "b", "g", "l0", "l1", "s", "n", "samples", "seed", "file"}},
      {"hoeffding", {"m", "threshold", "p", "n", "t", "replications", "seed", "file"}},
      {"generic", {"N", "N0", "q", "alphabet", "trial_cap", "stop_at_first", "seed", "file"}},
      {"recipe", {"recipe", "alpha", "beta", "L", "kappa", "gamma", "eps", "h", "h1", "terms", "file"}},
  };
  return keys;
}

// Field access on one JSON object with errors prefixed by its path.
class Params {
 public:
  Params(json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {}

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ValidationError(path_ + "." + key + ": " + message);
  }

  template <class F>
  auto guarded(F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const ValidationError& e) {
      throw ValidationError(path_ + ": " + e.what());
    }
  }

  std::uint64_t u64(const std::string& key) const {
    return guarded([&] { return detail::get_u64(j_, key); });
  }
  std::uint64_t u64_or(const std::string& key, std::uint64_t fallback) const { return has(key) ? u64(key) : fallback; }
  Rational rational(const std::string& key) const {
    return guarded([&] { return detail::get_rational(j_, key); });
  }
  Rational rational_or(const std::string& key, const Rational& fallback) const {
    return has(key) ? rational(key) : fallback;
  }
  double real_or(const std::string& key, double fallback) const {
    return has(key) ? to_double(rational(key)) : fallback;
  }
  std::string string_or(const std::string& key, const std::string& fallback) const {
    return guarded([&] { return detail::get_string_or(j_, key, fallback); });
  }
  bool bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_boolean()) fail(key, "must be true or false");
    return raw(key).get<bool>();
  }

  // An integer, an array of integers, or {"from": a, "to": b, "step": s}.
  std::vector<std::uint64_t> u64_list(const std::string& key) const {
    if (!has(key)) fail(key, "is required");
    const json& v = raw(key);
    std::vector<std::uint64_t> out;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(guarded([&] { return detail::get_u64(json{{key, v[i]}}, key); }));
      }
    } else if (v.is_object()) {
      const Params range(v, path_ + "." + key);
      const std::uint64_t from = range.u64("from");
      const std::uint64_t to = range.u64("to");
      const std::uint64_t step = range.u64_or("step", 1);
      if (step == 0) range.fail("step", "must be positive");
      if (to < from) range.fail("to", "must not be below 'from'");
      for (std::uint64_t x = from; x <= to; x += step) out.push_back(x);
    } else {
      out.push_back(u64(key));
    }
    if (out.empty()) fail(key, "must not be empty");
    return out;
  }

  std::vector<double> real_list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    std::vector<double> out;
    if (v.is_array()) {
      for (const auto& x : v) out.push_back(to_double(guarded([&] { return detail::rational_from_json(x, key); })));
    } else {
      out.push_back(to_double(rational(key)));
    }
    if (out.empty()) fail(key, "must not be empty");
    return out;
  }

  void allow_only(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.contains(key)) throw ValidationError(path_ + "." + key + ": unknown field");
    }
  }

 private:
  json j_;
  std::string path_;
};

std::string fmt(double x) { return format_fixed(x, 12); }

StackingData stacking_from_recipe(const Params& p, std::uint64_t fallback_seed, std::vector<RecipeBundle>& bundles) {
  p.allow_only({"recipe", "alpha", "beta", "L", "kappa", "gamma", "eps", "initial_height", "stages", "seed"});
  RecipeInput in;
  in.recipe = p.guarded([&] { return recipe_from_string(p.string_or("recipe", "")); });
  if (p.has("alpha")) in.alpha = p.rational("alpha");
  in.beta = p.rational_or("beta", in.beta);
  in.L = static_cast<std::uint32_t>(p.u64_or("L", in.L));
  in.kappa = p.rational_or("kappa", in.kappa);
  in.gamma = p.rational_or("gamma", in.gamma);
  in.eps = p.rational_or("eps", in.eps);
  const std::uint64_t h1 = p.u64("initial_height");
  const std::uint64_t stages = p.u64_or("stages", 1);
  const std::uint64_t seed = p.u64_or("seed", fallback_seed);
  in.h1 = BigInt(h1);

  StackingData sd;
  sd.initial_height = h1;
  const bool flexible = in.recipe == Recipe::flexible;
  sd.spacer_cap = flexible ? in.L : 2;
  for (std::uint64_t i = 0; i < stages; ++i) {
    in.h = Tower(sd).heights().back();
    RecipeBundle b = p.guarded([&] { return recipe_params(in); });
    const BigInt q = *b.q;
    if (q > kMaxRecipeSlices) {
      throw ResourceGuardError(p.path() + ": recipe gives q_" + std::to_string(i + 1) + " = " + q.str() +
                               ", beyond the 2^24 slices a built tower allows; lower 'stages'");
    }
    Stage st;
    st.q = static_cast<std::uint64_t>(q);
    st.spacers = SeededSpacers{seed, flexible ? SpacerDistribution::uniform : SpacerDistribution::bernoulli};
    sd.stages.push_back(st);
    bundles.push_back(std::move(b));
  }
  return sd;
}

SequenceSpec sequence_from_json(const json& v) {
  if (v.is_string()) return SequenceSpec::parse(v.get<std::string>());
  if (v.is_array()) {
    std::vector<std::uint64_t> values;
    for (const auto& x : v) values.push_back(detail::get_u64(json{{"sequence", x}}, "sequence"));
    return SequenceSpec::list(std::move(values));
  }
  throw ValidationError("sequence: must be a spec string such as \"poly:3/2@1000\" or an array of terms");
}

// Everything an operation needs, built on first use.
class Context {
 public:
  explicit Context(const ExperimentConfig& cfg) : cfg_(cfg) {}

  const ExperimentConfig& cfg() const { return cfg_; }

  const Tower& tower(const std::string& who) {
    if (!tower_) {
      if (!cfg_.stacking) throw ValidationError(who + ": needs a 'stacking' section");
      tower_.emplace(*cfg_.stacking);
    }
    return *tower_;
  }

  const SamplingSequence& sequence(const std::string& who) {
    if (!seq_) {
      if (!cfg_.sequence) throw ValidationError(who + ": needs a 'sequence' section");
      seq_.emplace(*cfg_.sequence);
    }
    return *seq_;
  }

  std::span<const std::uint64_t> terms(const std::string& who, std::uint64_t count) {
    const SamplingSequence& s = sequence(who);
    if (count > s.term_count()) {
      throw ValidationError(who + ": needs " + std::to_string(count) + " sequence terms, the sequence has " +
                            std::to_string(s.term_count()));
    }
    return s.terms(count);
  }

  EntropyOptions entropy_options(const Params& p) const {
    EntropyOptions o;
    o.workers = cfg_.workers;
    o.cap_words = cfg_.cap_words;
    const std::string e = p.string_or("enumeration", "auto");
    if (e == "auto") {
      o.enumeration = Enumeration::automatic;
    } else if (e == "direct") {
      o.enumeration = Enumeration::direct;
    } else if (e == "grouped") {
      o.enumeration = Enumeration::grouped;
    } else {
      p.fail("enumeration", "must be auto, direct or grouped");
    }
    return o;
  }

  std::optional<SampleSpec> sample(const Params& p) const {
    if (!p.has("sample")) return std::nullopt;
    const Params s(p.raw("sample"), p.path() + ".sample");
    s.allow_only({"count", "seed"});
    SampleSpec spec;
    spec.count = s.u64("count");
    if (spec.count == 0) s.fail("count", "must be positive");
    spec.seed = s.u64_or("seed", cfg_.seed);
    return spec;
  }

 private:
  const ExperimentConfig& cfg_;
  std::optional<Tower> tower_;
  std::optional<SamplingSequence> seq_;
};

CodingMode coding_of(const Params& p) {
  return p.guarded([&] { return coding_mode_from_string(p.string_or("coding", "base")); });
}

OperationResult op_entropy(Context& ctx, const Params& p) {
  OperationResult r;
  const Tower& tower = ctx.tower(p.path());
  const std::size_t stage = p.u64_or("stage", tower.tower_count());
  const CodingSpec spec{static_cast<std::size_t>(p.u64_or("reference", 1)), coding_of(p)};
  const auto Ns = p.u64_list("N");
  const auto sample = ctx.sample(p);
  const EntropyOptions opts = ctx.entropy_options(p);
  r.table.header = {"N",        "stage",          "reference", "mode", "H_nats", "H_per_N",
                    "distinct_words", "coverage", "seed",      "H_bits", "coding"};
  for (const std::uint64_t N : Ns) {
    const auto offsets = ctx.terms(p.path(), N);
    const EntropyResult e = empirical_sequence_entropy(tower, spec, stage, offsets, sample, opts);
    r.table.rows.push_back({std::to_string(N), std::to_string(stage), std::to_string(spec.reference),
                            sample ? "sampled" : "exact", fmt(e.h_nats), fmt(e.h_per_n),
                            std::to_string(e.histogram.distinct()), fmt(e.histogram.coverage),
                            sample ? std::to_string(sample->seed) : "", fmt(e.h_nats / std::log(2.0)),
                            std::string(to_string(spec.mode))});
  }
  return r;
}

// "(2, 5)"
std::string heights_text(const Tower& tower) {
  std::string out = "(";
  for (const auto& h : tower.heights()) out += (out.size() > 1 ? ", " : "") + h.str();
  return out + ")";
}

OperationResult op_profile(Context& ctx, const Params& p) {
  OperationResult r;
  const Tower& tower = ctx.tower(p.path());
  const auto Ns = p.u64_list("N");
  const CSchedule c = p.guarded([&] { return c_schedule_from_string(p.string_or("c", "constant:1")); });
  const std::size_t lift = p.u64_or("lift", 1);
  const auto offsets = ctx.terms(p.path(), *std::max_element(Ns.begin(), Ns.end()));
  const auto& heights = tower.heights();
  auto tau = [&](std::uint64_t N) { return select_tau_strict(heights, offsets[N - 1], c.at(N)); };
  const auto rows = seq_entropy_upper_profile(tower, offsets, tau, Ns, coding_of(p), lift, ctx.sample(p),
                                              ctx.entropy_options(p));
  r.table.header = {"N", "c_N", "tau", "stage", "reference", "H_nats", "H_per_N", "distinct_words", "coverage"};
  for (const ProfileRow& row : rows) {
    r.table.rows.push_back({std::to_string(row.N), std::to_string(c.at(row.N)), std::to_string(row.tau),
                            std::to_string(row.stage), std::to_string(row.reference), fmt(row.h_nats),
                            fmt(row.h_per_n), std::to_string(row.distinct), fmt(row.coverage)});
  }
  r.summary.push_back("c schedule: " + c.describe());
  return r;
}

OperationResult op_seq(Context& ctx, const Params& p) {
  OperationResult r;
  const SamplingSequence& s = ctx.sequence(p.path());
  const std::uint64_t count = p.u64_or("count", s.term_count());
  const auto t = ctx.terms(p.path(), count);
  r.table.header = {"index", "value", "gap"};
  for (std::size_t i = 0; i < t.size(); ++i) {
    r.table.rows.push_back(
        {std::to_string(i + 1), std::to_string(t[i]), i == 0 ? std::string() : std::to_string(t[i] - t[i - 1])});
  }
  r.summary.push_back("sequence: " + s.spec().describe());
  r.summary.push_back("start index: " + std::to_string(s.start_index()));
  if (count >= 2) {
    const DilationDiagnostic d = dilation_diagnostic(s, count);
    r.summary.push_back("max gap: " + std::to_string(max_gap(s, count)));
    r.summary.push_back(std::string("dilating on horizon: ") + (d.dilating_on_horizon ? "true" : "false") + " (" +
                        std::string(DilationDiagnostic::note) + ")");
  }
  return r;
}

OperationResult op_bounds(Context& ctx, const Params& p) {
  OperationResult r;
  const SamplingSequence& s = ctx.sequence(p.path());
  const Phi phi = p.guarded([&] { return phi_from_string(p.string_or("phi", "log")); });
  const CSchedule c = p.guarded([&] { return c_schedule_from_string(p.string_or("c", "constant:1")); });
  const std::uint64_t horizon = p.u64_or("horizon", s.term_count());
  std::vector<BigInt> heights;
  if (ctx.cfg().stacking) heights = ctx.tower(p.path()).heights();
  const BalancingProfile prof = p.guarded([&] { return balancing_profile(s, phi, c, horizon, heights); });
  r.table.header = {"n", "c_n", "diag_balance", "diag_phi", "diag_binom", "tau"};
  std::vector<double> balance;
  std::vector<double> phis;
  for (const BalancingRow& row : prof.rows) {
    r.table.rows.push_back({std::to_string(row.n), std::to_string(row.c), fmt(row.diag_balance), fmt(row.diag_phi),
                            fmt(row.diag_binom), row.tau ? std::to_string(*row.tau) : std::string()});
    balance.push_back(row.diag_balance);
    phis.push_back(row.diag_phi);
  }
  r.summary.push_back("phi: " + phi.describe());
  r.summary.push_back("c schedule: " + c.describe());
  if (horizon >= 200) {
    r.summary.push_back(std::string("balance trends to zero: ") + (trends_to_zero(balance) ? "true" : "false"));
    r.summary.push_back(std::string("phi trends to zero: ") + (trends_to_zero(phis) ? "true" : "false"));
  }
  return r;
}

OperationResult op_markov(Context&, const Params& p) {
  OperationResult r;
  r.table.header = {"H", "j", "pi_exact", "pi", "residual", "iterations"};
  for (const std::uint64_t H : p.u64_list("H")) {
    const MarkovModel m = p.guarded([&] { return stationary_distribution(build_markov_matrix(H)); });
    for (std::size_t j = 0; j < m.stationary.size(); ++j) {
      r.table.rows.push_back({std::to_string(H), std::to_string(j), to_string(m.stationary_exact[j]),
                              fmt(m.stationary[j]), fmt(m.residual), std::to_string(m.iterations)});
    }
  }
  return r;
}

OperationResult op_conditional(Context& ctx, const Params& p) {
  OperationResult r;
  BlockPattern pat;
  pat.h = static_cast<std::uint32_t>(p.u64("h"));
  if (p.has("b")) {
    for (const auto v : p.u64_list("b")) pat.b.push_back(static_cast<std::uint32_t>(v));
  } else {
    pat = BlockPattern::uniform(pat.h, static_cast<std::uint32_t>(p.u64_or("g", 1)));
  }
  p.guarded([&] {
    pat.validate();
    return 0;
  });
  const auto l0 = static_cast<std::uint32_t>(p.u64_or("l0", 1));
  std::vector<std::uint64_t> l1s;
  if (p.has("l1")) {
    l1s = p.u64_list("l1");
  } else {
    for (std::uint64_t l = 0; l <= pat.h; ++l) l1s.push_back(l);
  }
  const std::uint64_t s = p.u64_or("s", 50 * pat.H());
  const std::uint64_t samples = p.u64_or("samples", 100000);
  const std::uint64_t seed = p.u64_or("seed", ctx.cfg().seed);
  std::optional<std::uint64_t> n;
  if (p.has("n")) n = p.u64("n");
  r.table.header = {"l0",   "l1",       "n",        "s",         "samples",     "conditioned",
                    "hits", "estimate", "std_error", "chain_limit", "renewal_limit"};
  for (const std::uint64_t l1 : l1s) {
    const auto e = p.guarded([&] {
      return conditional_limit_mc(pat, l0, static_cast<std::uint32_t>(l1), s, samples, seed, n, ctx.cfg().workers);
    });
    r.table.rows.push_back({std::to_string(l0), std::to_string(l1), std::to_string(e.n), std::to_string(e.s),
                            std::to_string(e.samples), std::to_string(e.conditioned), std::to_string(e.hits),
                            fmt(e.estimate), fmt(e.std_error), fmt(e.chain_limit),
                            to_string(renewal_limit(pat, static_cast<std::uint32_t>(l1)))});
  }
  r.summary.push_back("H: " + std::to_string(pat.H()));
  return r;
}

OperationResult op_hoeffding(Context& ctx, const Params& p) {
  OperationResult r;
  WindowProcess proc;
  proc.m = p.u64("m");
  proc.threshold = p.u64_or("threshold", (proc.m + 1) / 2);
  proc.p = p.real_or("p", 0.5);
  p.guarded([&] {
    proc.validate();
    return 0;
  });
  const std::uint64_t n = p.u64("n");
  const auto ts = p.real_list("t", {0.05, 0.1, 0.2});
  const std::uint64_t reps = p.u64_or("replications", 1000);
  const std::uint64_t seed = p.u64_or("seed", ctx.cfg().seed);
  const auto est = hoeffding_tail_check(proc, n, ts, reps, seed, ctx.cfg().workers);
  r.table.header = {"t", "mu", "exceed", "empirical", "bound", "sigma", "within"};
  bool all = true;
  for (const TailEstimate& e : est) {
    r.table.rows.push_back({fmt(e.t), fmt(e.mu), std::to_string(e.exceed), fmt(e.empirical), fmt(e.bound),
                            fmt(e.sigma), e.within ? "true" : "false"});
    all = all && e.within;
  }
  r.summary.push_back(std::string("all within bound + 3 sigma: ") + (all ? "true" : "false"));
  return r;
}

OperationResult op_generic(Context& ctx, const Params& p) {
  OperationResult r;
  if (!ctx.cfg().stacking) throw ValidationError(p.path() + ": needs a 'stacking' section (the base tower)");
  GenericnessConfig g;
  g.base = *ctx.cfg().stacking;
  const std::uint64_t N = p.u64_or("N", ctx.sequence(p.path()).term_count());
  const auto t = ctx.terms(p.path(), N);
  g.A.assign(t.begin(), t.end());
  g.N0 = p.u64("N0");
  g.q = p.u64("q");
  g.alphabet = static_cast<std::uint32_t>(p.u64_or("alphabet", 2));
  g.trial_cap = p.u64_or("trial_cap", 100);
  g.stop_at_first = p.bool_or("stop_at_first", true);
  g.seed = p.u64_or("seed", ctx.cfg().seed);
  g.entropy.workers = ctx.cfg().workers;
  g.entropy.cap_words = ctx.cfg().cap_words;
  const GenericnessReport rep = p.guarded([&] { return genericness_search(g); });
  r.table.header = {"trial", "accepted", "worst_word_frequency", "cap", "P_N"};
  for (const TrialRecord& t : rep.trials) {
    r.table.rows.push_back({std::to_string(t.trial), t.accepted ? "true" : "false", fmt(t.worst_frequency),
                            fmt(t.cap), fmt(rep.failure_bound)});
  }
  r.summary.push_back(std::string("accepted: ") + (rep.accepted ? "true" : "false"));
  if (rep.accepted_trial) r.summary.push_back("accepted trial: " + std::to_string(*rep.accepted_trial));
  if (rep.accepted_seed) r.summary.push_back("accepted spacer seed: " + std::to_string(*rep.accepted_seed));
  if (!rep.accepted_spacers.empty()) {
    std::string s;
    for (const auto a : rep.accepted_spacers) s += (s.empty() ? "" : ",") + std::to_string(a);
    r.summary.push_back("accepted spacers: " + s);
  }
  r.summary.push_back("trials used: " + std::to_string(rep.trials_used));
  r.summary.push_back("empirical failure rate: " + fmt(rep.empirical_failure_rate));
  r.summary.push_back("P(N): " + fmt(rep.failure_bound));
  r.summary.push_back("rng: " + rep.rng_algorithm);
  if (!rep.accepted) {
    r.summary.push_back("search exhausted after " + std::to_string(rep.trials_used) +
                        " trials; raise trial_cap or N0");
    r.status = exit_code(ErrorKind::search_exhausted);
  }
  return r;
}

std::string opt_str(const std::optional<BigInt>& v) { return v ? v->str() : std::string(); }
std::string opt_str(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }
std::string opt_str(const std::optional<Rational>& v) { return v ? to_string(*v) : std::string(); }

std::string join_notes(const std::vector<std::string>& notes) {
  std::string out;
  for (const auto& n : notes) out += (out.empty() ? "" : "; ") + n;
  return out;
}

const std::vector<std::string> kBundleHeader = {"recipe", "h",     "alpha",         "N0",           "N",
                                                "q",      "m",     "log_delta",     "delta",        "log_failure_t",
                                                "log_failure_m", "rate", "notes"};

std::vector<std::string> bundle_row(const RecipeBundle& b, const BigInt& h) {
  return {std::string(to_string(b.recipe)), h.str(), to_string(b.alpha), opt_str(b.N0), opt_str(b.N), opt_str(b.q),
          opt_str(b.m), opt_str(b.log_delta), opt_str(b.delta), opt_str(b.log_failure_t), opt_str(b.log_failure_m),
          opt_str(b.rate), join_notes(b.notes)};
}

std::vector<std::pair<BigInt, RecipeBundle>> recipe_bundles(Context& ctx, const Params& p) {
  RecipeInput in;
  in.recipe = p.guarded([&] { return recipe_from_string(p.string_or("recipe", "")); });
  if (p.has("alpha")) in.alpha = p.rational("alpha");
  in.beta = p.rational_or("beta", in.beta);
  in.L = static_cast<std::uint32_t>(p.u64_or("L", in.L));
  in.kappa = p.rational_or("kappa", in.kappa);
  in.gamma = p.rational_or("gamma", in.gamma);
  in.eps = p.rational_or("eps", in.eps);
  std::vector<BigInt> hs;
  if (p.has("h")) {
    for (const auto h : p.u64_list("h")) hs.emplace_back(h);
  } else {
    hs = ctx.tower(p.path()).heights();
  }
  if (p.has("h1")) {
    in.h1 = BigInt(p.u64("h1"));
  } else if (ctx.cfg().stacking) {
    in.h1 = BigInt(ctx.cfg().stacking->initial_height);
  }
  if (ctx.cfg().sequence) {
    const std::uint64_t count = p.u64_or("terms", ctx.sequence(p.path()).term_count());
    const auto t = ctx.terms(p.path(), count);
    in.A.assign(t.begin(), t.end());
  }
  std::vector<std::pair<BigInt, RecipeBundle>> out;
  for (const BigInt& h : hs) {
    in.h = h;
    out.emplace_back(h, p.guarded([&] { return recipe_params(in); }));
  }
  return out;
}

OperationResult op_recipe(Context& ctx, const Params& p) {
  OperationResult r;
  r.table.header = kBundleHeader;
  for (const auto& [h, b] : recipe_bundles(ctx, p)) {
    r.table.rows.push_back(bundle_row(b, h));
    if (b.q) r.summary.push_back("h = " + h.str() + ": q = " + b.q->str());
  }
  return r;
}

using OpFn = std::function<OperationResult(Context&, const Params&)>;

const std::map<std::string, OpFn>& operation_table() {
  static const std::map<std::string, OpFn> table = {
      {"entropy", op_entropy},     {"profile", op_profile},     {"seq", op_seq},
      {"bounds", op_bounds},       {"markov", op_markov},       {"conditional", op_conditional},
      {"hoeffding", op_hoeffding}, {"generic", op_generic},     {"recipe", op_recipe},
  };
  return table;
}

std::string operation_path(std::size_t i) { return "operations[" + std::to_string(i) + "]"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string summary_text(const ExperimentConfig& cfg, const std::vector<OperationResult>& results) {
  std::ostringstream ss;
  ss << "rankone " << tool_version << "\n";
  ss << "config_hash: " << cfg.hash() << "\n";
  ss << "seed: " << cfg.seed << "\n";
  ss << "rng_algorithm: " << CounterRng::algorithm_id << "\n";
  if (cfg.stacking) {
    const Tower tower(*cfg.stacking);
    ss << "heights: " << heights_text(tower) << "\n";
  }
  if (cfg.sequence) ss << "sequence: " << cfg.sequence->describe() << "\n";
  for (const auto& r : results) {
    ss << "\n[" << r.op.kind << "] " << r.op.file << "\n";
    ss << "  rows: " << r.table.rows.size() << "\n";
    for (const auto& line : r.summary) ss << "  " << line << "\n";
  }
  return ss.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return ss.str();
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical); }

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

ExperimentConfig parse_config(std::string_view text, const Overrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  const Params top(doc, "config");
  top.allow_only({"stacking", "sequence", "operations", "seed", "workers", "cap_words", "out"});

  ExperimentConfig cfg;
  cfg.seed = overrides.seed.value_or(top.u64_or("seed", 0));
  cfg.workers = overrides.workers.value_or(top.u64_or("workers", 1));
  if (cfg.workers == 0) throw ValidationError("workers: must be at least 1");
  cfg.cap_words = overrides.cap_words.value_or(top.u64_or("cap_words", cfg.cap_words));
  if (cfg.cap_words == 0) throw ValidationError("cap_words: must be positive");
  cfg.out_dir = overrides.out_dir.value_or(top.string_or("out", "out"));

  if (top.has("stacking")) {
    const json& s = doc.at("stacking");
    if (s.is_object() && s.contains("squaring")) {
      const Params sq(s.at("squaring"), "stacking.squaring");
      sq.allow_only({"initial_height", "stages"});
      const std::uint64_t h1 = sq.u64("initial_height");
      if (h1 < 2) sq.fail("initial_height", "must be at least 2");
      cfg.stacking = sq.guarded([&] { return squaring_heights(h1, sq.u64("stages")); });
    } else if (s.is_object() && s.contains("recipe")) {
      cfg.stacking = stacking_from_recipe(Params(s, "stacking"), cfg.seed, cfg.stacking_bundles);
    } else {
      try {
        cfg.stacking = detail::stacking_from_json(s);
        validate(*cfg.stacking);
      } catch (const ValidationError& e) {
        throw ValidationError(std::string("stacking: ") + e.what());
      }
    }
  }
  if (top.has("sequence")) {
    try {
      cfg.sequence = sequence_from_json(doc.at("sequence"));
      SamplingSequence check(*cfg.sequence);
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      throw ValidationError(what.rfind("sequence", 0) == 0 ? what : "sequence: " + what);
    }
  }

  if (!top.has("operations") || !doc.at("operations").is_array()) {
    throw ValidationError("operations: a non-empty list of operations is required");
  }
  const json& ops = doc.at("operations");
  if (ops.empty()) throw ValidationError("operations: a non-empty list of operations is required");
  std::map<std::string, int> used;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const std::string path = operation_path(i);
    if (!ops[i].is_object()) throw ValidationError(path + ": must be an object");
    const Params p(ops[i], path);
    const std::string kind = p.string_or("op", "");
    const auto keys = operation_keys().find(kind);
    if (keys == operation_keys().end()) {
      throw ValidationError(path + ".op: must be one of entropy, profile, seq, bounds, markov, conditional, "
                                   "hoeffding, generic, recipe");
    }
    std::set<std::string> allowed = keys->second;
    allowed.insert("op");
    p.allow_only(allowed);
    Operation op;
    op.kind = kind;
    json params = ops[i];
    params.erase("op");
    const int k = ++used[kind];
    op.file = p.string_or("file", k == 1 ? kind + ".csv" : kind + "_" + std::to_string(k) + ".csv");
    if (op.file.empty() || op.file.find('/') != std::string::npos || op.file == "summary.txt" ||
        op.file == "meta.json") {
      throw ValidationError(path + ".file: must be a plain file name other than summary.txt and meta.json");
    }
    op.params = params.dump();
    cfg.operations.push_back(std::move(op));
  }
  for (std::size_t i = 0; i < cfg.operations.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.operations[i].file == cfg.operations[j].file) {
        throw ValidationError(operation_path(i) + ".file: '" + cfg.operations[i].file + "' is already used");
      }
    }
  }

  json canonical = doc;
  canonical.erase("workers");
  canonical.erase("out");
  canonical["seed"] = cfg.seed;
  canonical["cap_words"] = cfg.cap_words;
  cfg.canonical = canonical.dump();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  return parse_config(read_file(path), overrides);
}

std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream ss;
  ss << "config_hash: " << cfg.hash() << "\n";
  ss << "seed: " << cfg.seed << "\n";
  ss << "rng_algorithm: " << CounterRng::algorithm_id << "\n";
  std::optional<Tower> tower;
  if (cfg.stacking) {
    tower.emplace(*cfg.stacking);
    ss << "stacking: " << (cfg.stacking_bundles.empty() ? "explicit" : "recipe") << "\n";
    ss << "heights: " << heights_text(*tower) << "\n";
    for (std::size_t n = 1; n < tower->tower_count(); ++n) {
      ss << "stage " << n << ": q = " << tower->slice_count(n) << ", spacers = " << tower->spacer_total(n).str()
         << "\n";
    }
    for (std::size_t i = 0; i < cfg.stacking_bundles.size(); ++i) {
      const RecipeBundle& b = cfg.stacking_bundles[i];
      ss << "recipe " << to_string(b.recipe) << " at h_" << i + 1 << " = " << tower->height(i + 1).str() << ": q_"
         << i + 1 << " = " << b.q->str();
      if (b.N) ss << ", N = " << b.N->str();
      if (b.N0) ss << ", N0 = " << b.N0->str();
      if (b.delta) ss << ", delta = " << fmt(*b.delta);
      ss << "\n";
      for (const auto& note : b.notes) ss << "  note: " << note << "\n";
    }
  } else {
    ss << "stacking: none\n";
  }
  std::optional<SamplingSequence> seq;
  if (cfg.sequence) {
    seq.emplace(*cfg.sequence);
    ss << "sequence: " << cfg.sequence->describe() << ", " << seq->term_count() << " terms\n";
  }

  Context ctx(cfg);
  for (std::size_t i = 0; i < cfg.operations.size(); ++i) {
    const Operation& op = cfg.operations[i];
    const Params p(json::parse(op.params), operation_path(i));
    ss << "operation " << i << ": " << op.kind << " -> " << op.file << "\n";
    if (op.kind == "entropy" && tower && seq) {
      const std::size_t stage = p.u64_or("stage", tower->tower_count());
      for (const std::uint64_t N : p.u64_list("N")) {
        const auto t = ctx.terms(p.path(), N);
        const std::uint64_t t_last = t.empty() ? 0 : t.back();
        const std::uint64_t K = stage >= 2 ? tower->valid_levels(stage, t_last).size() : 0;
        ss << "  N = " << N << ": t_N = " << t_last << ", |K| = " << K << " at stage " << stage << "\n";
      }
    } else if (op.kind == "recipe") {
      for (const auto& [h, b] : recipe_bundles(ctx, p)) {
        ss << "  h = " << h.str() << ": q = " << (b.q ? b.q->str() : "-");
        if (b.N) ss << ", N = " << b.N->str();
        if (b.N0) ss << ", N0 = " << b.N0->str();
        if (b.m) ss << ", m = " << b.m->str();
        ss << "\n";
      }
    }
  }
  return ss.str();
}

std::vector<OperationResult> execute(const ExperimentConfig& cfg, const std::set<std::string>& kinds) {
  Context ctx(cfg);
  std::vector<OperationResult> out;
  for (std::size_t i = 0; i < cfg.operations.size(); ++i) {
    const Operation& op = cfg.operations[i];
    if (!kinds.empty() && !kinds.contains(op.kind)) continue;
    const Params p(json::parse(op.params), operation_path(i));
    OperationResult r = operation_table().at(op.kind)(ctx, p);
    r.op = op;
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ValidationError("operations: none of the configured operations match this command");
  return out;
}

RunReport run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, const std::set<std::string>& kinds) {
  RunReport rep;
  rep.results = execute(cfg, kinds);
  std::filesystem::create_directories(out_dir);
  json outputs = json::object();
  for (const auto& r : rep.results) {
    const std::string text = r.table.csv();
    const auto path = out_dir / r.op.file;
    write_file(path, text);
    outputs[r.op.file] = sha256_hex(text);
    rep.files.push_back(path);
    rep.exit_code = std::max(rep.exit_code, r.status);
  }
  const std::string summary = summary_text(cfg, rep.results);
  write_file(out_dir / "summary.txt", summary);
  outputs["summary.txt"] = sha256_hex(summary);
  rep.files.push_back(out_dir / "summary.txt");

  json meta;
  meta["tool"] = "rankone";
  meta["version"] = std::string(tool_version);
  meta["rng_algorithm"] = std::string(CounterRng::algorithm_id);
  meta["seed"] = cfg.seed;
  meta["config_hash"] = cfg.hash();
  meta["workers"] = cfg.workers;
  meta["timestamp"] = utc_timestamp();
  meta["outputs"] = outputs;
  write_file(out_dir / "meta.json", meta.dump(2) + "\n");
  return rep;
}

void verify(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  json meta;
  try {
    meta = json::parse(read_file(dir / "meta.json"));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("meta.json is not valid JSON: ") + e.what());
  }
  const std::string expected = cfg.hash();
  if (!meta.contains("config_hash") || meta.at("config_hash") != expected) {
    throw ValidationError("meta.json config_hash " +
                          (meta.contains("config_hash") ? meta.at("config_hash").dump() : std::string("(missing)")) +
                          " does not match the config hash " + expected);
  }
  const std::string summary = read_file(dir / "summary.txt");
  if (summary.find("config_hash: " + expected + "\n") == std::string::npos) {
    throw ValidationError("summary.txt does not carry the config hash " + expected);
  }
  if (!meta.contains("outputs") || !meta.at("outputs").is_object()) {
    throw ValidationError("meta.json has no outputs table");
  }
  for (const auto& [name, digest] : meta.at("outputs").items()) {
    if (sha256_hex(read_file(dir / name)) != digest.get<std::string>()) {
      throw ValidationError(name + " does not match its recorded SHA-256");
    }
  }
}

}  // namespace rankone
