// rankone: command-line front end for the experiment runner.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rankone/error.hpp"
#include "rankone/experiment.hpp"
#include "rankone/numeric.hpp"
#include "rankone/sampling.hpp"

namespace {

using nlohmann::json;
using namespace rankone;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::optional<std::uint64_t> cap_words;

  void attach(CLI::App* app, bool config_required) {
    auto* c = app->add_option("--config", config, "experiment config (JSON)");
    if (config_required) c->required();
    app->add_option("--seed", seed, "seed, overriding the config");
    app->add_option("--workers", workers, "worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);
    app->add_option("--out", out, "output directory");
    app->add_option("--cap-words", cap_words, "distinct-word cap for histograms")->check(CLI::PositiveNumber);
  }

  Overrides overrides() const { return Overrides{seed, workers, cap_words, out}; }
};

void print_tables(const std::vector<OperationResult>& results) {
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results.size() > 1) std::cout << (i ? "\n" : "") << "# " << results[i].op.file << "\n";
    std::cout << results[i].table.csv();
  }
}

int report(const RunReport& rep, const std::filesystem::path& dir) {
  for (const auto& r : rep.results) {
    std::cout << r.op.kind << ": " << (dir / r.op.file).string() << " (" << r.table.rows.size() << " rows)\n";
    for (const auto& line : r.summary) std::cout << "  " << line << "\n";
  }
  std::cout << "summary: " << (dir / "summary.txt").string() << "\nmeta: " << (dir / "meta.json").string() << "\n";
  return rep.exit_code;
}

// Runs a config restricted to `kinds`: into --out when given or when the
// config came from a file, else to stdout.
int run_kinds(const ExperimentConfig& cfg, const Common& common, bool from_file, const std::set<std::string>& kinds) {
  if (common.out || from_file) {
    const std::filesystem::path dir = common.out.value_or(cfg.out_dir);
    return report(run(cfg, dir, kinds), dir);
  }
  const auto results = execute(cfg, kinds);
  print_tables(results);
  int code = 0;
  for (const auto& r : results) {
    for (const auto& line : r.summary) std::cerr << r.op.kind << ": " << line << "\n";
    code = std::max(code, r.status);
  }
  return code;
}

ExperimentConfig config_from(const Common& common, const json& inline_doc) {
  if (!common.config.empty()) return load_config(common.config, common.overrides());
  return parse_config(inline_doc.dump(), common.overrides());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankone: rank-one cut-and-stack towers, sequence entropy and bound checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version));

  Common common;
  int code = 0;

  auto* describe_cmd = app.add_subcommand("describe", "print derived quantities without running operations");
  common.attach(describe_cmd, true);
  describe_cmd->callback([&] { std::cout << describe(load_config(common.config, common.overrides())); });

  auto* run_cmd = app.add_subcommand("run", "run every configured operation and write CSV, summary and meta");
  common.attach(run_cmd, true);
  run_cmd->callback([&] {
    const ExperimentConfig cfg = load_config(common.config, common.overrides());
    const std::filesystem::path dir = cfg.out_dir;
    code = report(run(cfg, dir), dir);
  });

  auto* verify_cmd = app.add_subcommand("verify", "check a report directory against a config");
  common.attach(verify_cmd, true);
  verify_cmd->callback([&] {
    const ExperimentConfig cfg = load_config(common.config, common.overrides());
    const std::filesystem::path dir = cfg.out_dir;
    verify(cfg, dir);
    std::cout << "verified " << dir.string() << " against config hash " << cfg.hash() << "\n";
  });

  // seq
  auto* seq_cmd = app.add_subcommand("seq", "sampling-sequence diagnostics");
  seq_cmd->require_subcommand(1);
  std::string seq_spec;
  std::uint64_t seq_count = 0;
  std::uint64_t k_r = 1;
  std::uint64_t k_n = 0;
  auto add_seq = [&](CLI::App* sub) {
    sub->add_option("--seq", seq_spec, "sequence spec, e.g. poly:3/2@1000, nlog:1:2@500, linear:2:0@100, list:1,4,9")
        ->required();
  };
  auto* seq_describe = seq_cmd->add_subcommand("describe", "kind, start index, horizon, gaps and dilation verdict");
  add_seq(seq_describe);
  seq_describe->callback([&] {
    const SamplingSequence s(SequenceSpec::parse(seq_spec));
    std::cout << "sequence: " << s.spec().describe() << "\n";
    std::cout << "start index: " << s.start_index() << "\nhorizon: " << s.horizon() << "\nterms: " << s.term_count()
              << "\n";
    if (s.term_count() >= 2) {
      const auto d = dilation_diagnostic(s, s.term_count());
      std::cout << "max gap: " << max_gap(s, s.term_count()) << "\ngap decreases: " << d.gap_decreases
                << "\ndilating on horizon: " << (d.dilating_on_horizon ? "true" : "false") << " ("
                << DilationDiagnostic::note << ")\n";
    }
  });
  auto* seq_gaps = seq_cmd->add_subcommand("gaps", "CSV of index, value, gap");
  add_seq(seq_gaps);
  seq_gaps->add_option("--count", seq_count, "number of terms (default: all)");
  seq_gaps->callback([&] {
    json doc = {{"sequence", seq_spec}, {"operations", json::array({json{{"op", "seq"}}})}};
    if (seq_count) doc["operations"][0]["count"] = seq_count;
    print_tables(execute(parse_config(doc.dump())));
  });
  auto* seq_k = seq_cmd->add_subcommand("kvalue", "(1/n) #{t_i + j : i <= n, |j| <= r}, exactly");
  add_seq(seq_k);
  seq_k->add_option("--r", k_r, "thickening radius")->required();
  seq_k->add_option("--n", k_n, "number of terms (default: all)");
  seq_k->callback([&] {
    const SamplingSequence s(SequenceSpec::parse(seq_spec));
    const std::uint64_t n = k_n ? k_n : s.term_count();
    const Rational k = krug_K_estimate(s, k_r, n);
    std::cout << "r,n,K,K_decimal\n" << k_r << ',' << n << ',' << to_string(k) << ',' << format_fixed(to_double(k))
              << "\n";
  });

  // entropy run
  auto* entropy_cmd = app.add_subcommand("entropy", "empirical sequence entropy");
  entropy_cmd->require_subcommand(1);
  auto* entropy_run = entropy_cmd->add_subcommand("run", "run the config's entropy and profile operations");
  common.attach(entropy_run, true);
  entropy_run->callback([&] {
    code = run_kinds(load_config(common.config, common.overrides()), common, true, {"entropy", "profile"});
  });

  // markov
  auto* markov_cmd = app.add_subcommand("markov", "stationary vectors and conditional limits of the block chain");
  common.attach(markov_cmd, false);
  std::vector<std::uint64_t> markov_H;
  markov_cmd->add_option("--H", markov_H, "block periods (without --config)");
  markov_cmd->callback([&] {
    if (common.config.empty() && markov_H.empty()) throw ValidationError("markov: give --config or --H");
    json doc = {{"operations", json::array({json{{"op", "markov"}, {"H", markov_H}}})}};
    code = run_kinds(config_from(common, doc), common, !common.config.empty(), {"markov", "conditional", "hoeffding"});
  });

  // generic
  auto* generic_cmd = app.add_subcommand("generic", "seeded genericness search");
  common.attach(generic_cmd, true);
  generic_cmd->callback([&] {
    code = run_kinds(load_config(common.config, common.overrides()), common, true, {"generic"});
  });

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "balancing diagnostics");
  common.attach(bounds_cmd, false);
  std::string b_seq;
  std::string b_phi = "log";
  std::string b_c = "constant:1";
  std::uint64_t b_horizon = 0;
  bounds_cmd->add_option("--seq", b_seq, "sequence spec (without --config)");
  bounds_cmd->add_option("--phi", b_phi, "log | power:beta | exp_power:beta");
  bounds_cmd->add_option("--c", b_c, "constant:k | power:alpha:beta | loglog | custom:c1,c2,...");
  bounds_cmd->add_option("--horizon", b_horizon, "last n (default: all terms)");
  bounds_cmd->callback([&] {
    if (common.config.empty() && b_seq.empty()) throw ValidationError("bounds: give --config or --seq");
    json op = {{"op", "bounds"}, {"phi", b_phi}, {"c", b_c}};
    if (b_horizon) op["horizon"] = b_horizon;
    json doc = {{"sequence", b_seq}, {"operations", json::array({op})}};
    code = run_kinds(config_from(common, doc), common, !common.config.empty(), {"bounds"});
  });

  // recipe
  auto* recipe_cmd = app.add_subcommand("recipe", "parameter bundles of the randomized constructions");
  common.attach(recipe_cmd, false);
  std::string r_recipe;
  std::vector<std::uint64_t> r_h;
  std::string r_alpha, r_beta = "1", r_kappa = "2", r_gamma = "3/2", r_eps = "0";
  std::uint32_t r_L = 2;
  recipe_cmd->add_option("--recipe", r_recipe, "1.5i | 1.5ii | 1.6 (without --config)");
  recipe_cmd->add_option("--height", r_h, "tower heights h_n");
  recipe_cmd->add_option("--alpha", r_alpha, "alpha (p/q or decimal)");
  recipe_cmd->add_option("--beta", r_beta, "beta");
  recipe_cmd->add_option("--kappa", r_kappa, "kappa (1.6)");
  recipe_cmd->add_option("--L", r_L, "spacer bound L (1.6)");
  recipe_cmd->add_option("--gamma", r_gamma, "gamma (1.5)");
  recipe_cmd->add_option("--eps", r_eps, "epsilon");
  recipe_cmd->callback([&] {
    if (common.config.empty() && (r_recipe.empty() || r_h.empty())) {
      throw ValidationError("recipe: give --config, or --recipe with --height");
    }
    json op = {{"op", "recipe"}, {"recipe", r_recipe}, {"h", r_h},         {"beta", r_beta},
               {"kappa", r_kappa}, {"L", r_L},         {"gamma", r_gamma}, {"eps", r_eps}};
    if (!r_alpha.empty()) op["alpha"] = r_alpha;
    json doc = {{"operations", json::array({op})}};
    code = run_kinds(config_from(common, doc), common, !common.config.empty(), {"recipe"});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::validation);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
