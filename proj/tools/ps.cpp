// ps: batch front-end for the persuaded-search equilibrium toolkit.
// Subcommands: solve | verify | simulate | sweep | public.
// Exit codes: 0 success, 1 usage or configuration error, 2 model violates a
// precondition (never-search environment, inconsistent public signal),
// 3 verification failure.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psearch/config.hpp"
#include "psearch/csv.hpp"
#include "psearch/equilibrium.hpp"
#include "psearch/public_signals.hpp"
#include "psearch/sim.hpp"

namespace fs = std::filesystem;
using namespace psearch;

namespace {

std::uint64_t effective_seed(const RunConfig& cfg) {
  if (const char* s = std::getenv("PS_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (!end || *end != '\0' || s == end)
      throw ConfigError("PS_SEED must be a nonnegative integer");
    return v;
  }
  return cfg.sim_seed;
}

fs::path prepare_out(const RunConfig& cfg, const std::string& cli_out) {
  fs::path dir = cli_out.empty() ? fs::path(cfg.output_dir) : fs::path(cli_out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw ConfigError("cannot create output directory: " + dir.string());
  return dir;
}

int cmd_solve(const RunConfig& cfg, const std::string& out) {
  const Environment env = cfg.environment();
  const EquilibriumSolution eq = equilibrium_passfail(env);
  const fs::path dir = prepare_out(cfg, out);

  {
    CsvFile csv(dir / "equilibrium.csv");
    csv.row({"U", "V", "p", "r_low", "r_high", "u_low", "u_high", "cutoff", "m1", "m2"});
    csv.row({fmt17(eq.agent_value), fmt17(eq.principal_value), fmt17(eq.contract.price),
             fmt17(eq.bench.autarky.reservation), fmt17(eq.bench.efficient.reservation),
             fmt17(eq.bench.autarky.value), fmt17(eq.bench.efficient.value),
             fmt17(eq.cutoff), fmt17(eq.fail_mean), fmt17(eq.pass_mean)});
  }
  {
    const Prior& f = env.prior();
    const PmDist g_star = binary_split(f, eq.cutoff);
    const PmDist g_empty = uninformative(f);
    CsvFile csv(dir / "curves.csv");
    csv.row({"x", "c_prior", "c_passfail", "c_uninformative", "line"});
    for (int i = 0; i < 512; ++i) {
      const double x = std::min(f.lo() + (f.hi() - f.lo()) * i / 511.0, f.hi());
      csv.row({fmt17(x), fmt17(f.incremental_benefit(x)),
               fmt17(g_star.incremental_benefit(x)),
               fmt17(g_empty.incremental_benefit(x)),
               fmt17(x * (1.0 - env.delta()) / env.delta())});
    }
  }

  std::cout << "equilibrium (pass/fail signal)\n"
            << "  U  = " << fmt17(eq.agent_value) << "\n"
            << "  V  = " << fmt17(eq.principal_value) << "\n"
            << "  p  = " << fmt17(eq.contract.price) << "\n"
            << "  cutoff = " << fmt17(eq.cutoff) << "\n";
  if (env.prior().projection_error() > 0.0)
    std::cout << "  prior projection error = " << fmt17(env.prior().projection_error())
              << "\n";
  std::cout << "wrote " << (dir / "equilibrium.csv").string() << ", "
            << (dir / "curves.csv").string() << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& out,
               const std::string& contract_path) {
  const Environment env = cfg.environment();
  const Contract contract = load_contract(contract_path, env, cfg.mpc_tol);
  const VerificationReport rep = verify_stationary(env, contract, cfg.oracle_grid);
  (void)out;
  for (const Check& c : rep.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
              << "  residual=" << fmt17(c.residual) << "  tol=" << fmt17(c.tol) << "\n";
  std::cout << (rep.pass() ? "verification passed" : "verification FAILED") << "\n";
  return rep.pass() ? 0 : 3;
}

void write_simulation_files(const SimulationReport& rep, const fs::path& dir) {
  {
    CsvFile csv(dir / "simulation.csv");
    csv.row({"statistic", "value"});
    csv.row({"n_episodes", fmt17(static_cast<long long>(rep.n_episodes))});
    csv.row({"seed", fmt17(static_cast<unsigned long long>(rep.seed))});
    csv.row({"agent_mean", fmt17(rep.agent_mean)});
    csv.row({"agent_se", fmt17(rep.agent_se)});
    csv.row({"principal_mean", fmt17(rep.principal_mean)});
    csv.row({"principal_se", fmt17(rep.principal_se)});
    csv.row({"truncated_episodes", fmt17(rep.truncated_episodes)});
    csv.row({"truncation_bias_bound", fmt17(rep.truncation_bias_bound)});
  }
  {
    CsvFile csv(dir / "stopping_histogram.csv");
    csv.row({"period", "count"});
    for (std::size_t t = 0; t < rep.stopping_counts.size(); ++t)
      csv.row({fmt17(static_cast<long long>(t + 1)), fmt17(rep.stopping_counts[t])});
  }
}

int cmd_simulate(const RunConfig& cfg, const std::string& out) {
  if (!cfg.has_simulation)
    throw ConfigError("simulate requires a \"simulation\" block in the config");
  const Environment env = cfg.environment();
  const std::uint64_t seed = effective_seed(cfg);
  const fs::path dir = prepare_out(cfg, out);
  SimulationReport rep;
  if (cfg.public_signal) {
    const PublicEquilibrium peq = solve_public_equilibrium(env, *cfg.public_signal);
    rep = simulate_public(env, *cfg.public_signal, peq, cfg.sim_episodes, seed);
  } else {
    const EquilibriumSolution eq = equilibrium_passfail(env);
    rep = simulate_stationary(env, eq, cfg.sim_episodes, seed);
  }
  write_simulation_files(rep, dir);
  std::cout << "agent_mean=" << fmt17(rep.agent_mean)
            << " principal_mean=" << fmt17(rep.principal_mean) << " (n="
            << rep.n_episodes << ", seed=" << rep.seed << ")\n"
            << "wrote " << (dir / "simulation.csv").string() << ", "
            << (dir / "stopping_histogram.csv").string() << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& out,
              const std::string& deltas_csv) {
  std::vector<double> deltas;
  std::stringstream ss(deltas_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      deltas.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse delta value \"" + tok + "\"");
    }
  }
  if (deltas.empty()) throw ConfigError("--deltas needs at least one value");
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0))
      throw ConfigError("every delta must lie strictly inside (0,1)");

  const fs::path dir = prepare_out(cfg, out);
  CsvFile csv(dir / "sweep.csv");
  csv.row({"delta", "status", "p", "V", "r_high", "F_r_high", "identity_residual"});
  for (double d : deltas) {
    const Environment env(cfg.prior, d);
    if (env.never_searches()) {
      csv.row({fmt17(d), "never_search", "nan", "nan", "nan", "nan", "nan"});
      continue;
    }
    const EquilibriumSolution eq = equilibrium_passfail(env);
    const double f_r = env.prior().cdf(eq.bench.efficient.reservation);
    const double residual =
        eq.contract.price / (1.0 - d * f_r) - eq.principal_value;
    csv.row({fmt17(d), "ok", fmt17(eq.contract.price), fmt17(eq.principal_value),
             fmt17(eq.bench.efficient.reservation), fmt17(f_r), fmt17(residual)});
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_public(const RunConfig& cfg, const std::string& out) {
  if (!cfg.public_signal)
    throw ConfigError("public requires a \"public_signal\" block in the config");
  const Environment env = cfg.environment();
  const PublicEquilibrium peq = solve_public_equilibrium(env, *cfg.public_signal);
  const Benchmarks b = benchmarks(env);
  const fs::path dir = prepare_out(cfg, out);

  {
    CsvFile csv(dir / "public_summary.csv");
    csv.row({"r_xi", "k_star", "U", "V"});
    csv.row({fmt17(peq.reservation), fmt17(peq.cutoff_concession),
             fmt17(peq.agent_value), fmt17(peq.principal_value)});
  }
  {
    CsvFile csv(dir / "public_outcomes.csv");
    csv.row({"label", "weight", "case", "xbar", "cutoff", "price", "psi"});
    for (const OutcomeSolution& sol : peq.outcomes)
      csv.row({sol.label, fmt17(sol.weight), to_string(sol.kind),
               fmt17(sol.persuasion_cap), fmt17(sol.cutoff), fmt17(sol.price),
               fmt17(sol.value)});
  }
  {
    const double width = std::max(b.efficient.reservation - peq.reservation, 0.0);
    CsvFile csv(dir / "phi.csv");
    csv.row({"k", "phi"});
    const int steps = width > 0.0 ? 128 : 0;
    for (int i = 0; i <= steps; ++i) {
      const double k = steps == 0 ? 0.0 : width * i / steps;
      csv.row({fmt17(k), fmt17(surplus_loss(*cfg.public_signal, k, peq.reservation,
                                            b.efficient.reservation))});
    }
  }

  std::cout << "public equilibrium: U=" << fmt17(peq.agent_value)
            << " V=" << fmt17(peq.principal_value)
            << " r_xi=" << fmt17(peq.reservation)
            << " k*=" << fmt17(peq.cutoff_concession) << "\n"
            << "wrote " << (dir / "public_summary.csv").string() << ", "
            << (dir / "public_outcomes.csv").string() << ", "
            << (dir / "phi.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary equilibria for priced quality signals in sequential search"};
  app.require_subcommand(1);

  std::string config_path, out_dir, contract_path, deltas_csv;

  CLI::App* solve = app.add_subcommand("solve", "solve the stationary equilibrium");
  CLI::App* verify = app.add_subcommand("verify", "verify a contract file");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo playout");
  CLI::App* sweep = app.add_subcommand("sweep", "equilibrium across discount factors");
  CLI::App* pub = app.add_subcommand("public", "equilibrium with a public signal");

  for (CLI::App* sub : {solve, verify, simulate, sweep, pub}) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
  }
  verify->add_option("--contract", contract_path, "contract file (JSON)")->required();
  sweep->add_option("--deltas", deltas_csv, "comma-separated discount factors")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = load_config(config_path);
    if (solve->parsed()) return cmd_solve(cfg, out_dir);
    if (verify->parsed()) return cmd_verify(cfg, out_dir, contract_path);
    if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
    if (sweep->parsed()) return cmd_sweep(cfg, out_dir, deltas_csv);
    if (pub->parsed()) return cmd_public(cfg, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NeverSearchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
