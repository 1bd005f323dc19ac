#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "psearch/sim.hpp"
#include "support.hpp"

using namespace psearch;

namespace {
Environment uniform_env() { return Environment(Prior::uniform(0.0, 1.0), 2.0 / 3.0); }
constexpr std::uint64_t kSeed = 20240801;
constexpr long kN = 100000;
}  // namespace

TEST_CASE("fixed seed reruns are bit-identical") {
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_passfail(env);
  const SimulationReport a = simulate_stationary(env, eq, 20000, 7);
  const SimulationReport b = simulate_stationary(env, eq, 20000, 7);
  CHECK(a.agent_mean == b.agent_mean);
  CHECK(a.agent_se == b.agent_se);
  CHECK(a.principal_mean == b.principal_mean);
  CHECK(a.stopping_counts == b.stopping_counts);

  const SimulationReport c = simulate_stationary(env, eq, 20000, 8);
  CHECK(c.agent_mean != a.agent_mean);
}

TEST_CASE("stationary simulation reproduces the equilibrium payoffs") {
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_passfail(env);
  const SimulationReport rep = simulate_stationary(env, eq, kN, kSeed);

  CHECK(std::abs(rep.agent_mean - eq.agent_value) <= 3.0 * rep.agent_se);
  CHECK(std::abs(rep.principal_mean - eq.principal_value) <= 3.0 * rep.principal_se);
  CHECK(rep.truncated_episodes == 0);

  // Period-1 stopping frequency matches the geometric hazard 1 - F(cutoff).
  const double hazard = 1.0 - env.prior().cdf(eq.cutoff);
  const double freq = static_cast<double>(rep.stopping_counts.at(0)) / rep.n_episodes;
  const double se = std::sqrt(hazard * (1.0 - hazard) / rep.n_episodes);
  CHECK(std::abs(freq - hazard) <= 3.0 * se);

  // Discounted price stream: principal mean equals p over 1 - delta*F(cutoff).
  const double duration_value =
      eq.contract.price / (1.0 - env.delta() * env.prior().cdf(eq.cutoff));
  CHECK(std::abs(rep.principal_mean - duration_value) <= 3.0 * rep.principal_se);

  long long total = 0;
  for (long long c : rep.stopping_counts) total += c;
  CHECK(total == rep.n_episodes);
}

TEST_CASE("lower censorship simulates to the same payoffs") {
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_lower_censorship(env);
  const SimulationReport rep = simulate_stationary(env, eq, kN, kSeed);
  CHECK(std::abs(rep.agent_mean - eq.agent_value) <= 3.0 * rep.agent_se);
  CHECK(std::abs(rep.principal_mean - eq.principal_value) <= 3.0 * rep.principal_se);
}

TEST_CASE("transfers cancel inside every episode") {
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_passfail(env);
  for (long i = 0; i < 2000; ++i) {
    SplitMix64 rng = SplitMix64::substream(99, static_cast<std::uint64_t>(i));
    const EpisodeResult ep = run_episode(env, eq, rng);
    const double headline =
        std::pow(env.delta(), ep.stop_period - 1) * ep.consumed_mean;
    CHECK(std::abs(ep.agent_payoff + ep.principal_payoff - headline) <= 1e-12);
    CHECK(ep.stop_period >= 1);
  }
}

TEST_CASE("a policy that never passes runs into the horizon cap") {
  // Degenerate stress test: everything pools into a posterior below the
  // stopping threshold at price zero, so no episode ever stops.
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_passfail(env);
  const EquilibriumSolution never{0.0,
                                  0.0,
                                  Contract{0.0, uninformative(env.prior())},
                                  eq.bench,
                                  env.prior().hi(),
                                  SignalRule::pass_fail,
                                  env.prior().lo(),
                                  env.prior().hi()};
  const SimulationReport rep = simulate_stationary(env, never, 200, 5);
  CHECK(rep.truncated_episodes == 200);
  CHECK(rep.agent_mean == 0.0);
  CHECK(rep.principal_mean == 0.0);
  CHECK(rep.truncation_bias_bound >= 0.0);
  CHECK(rep.truncation_bias_bound < 1e-300);  // (2/3)^10000 underflows to zero
}

TEST_CASE("public simulation: singleton signal matches the stationary run") {
  const Environment env = uniform_env();
  std::vector<PublicOutcome> outs;
  outs.push_back({"only", 1.0, Prior::uniform(0.0, 1.0)});
  const PublicSignalModel model(env.prior(), std::move(outs));
  const PublicEquilibrium peq = solve_public_equilibrium(env, model);
  const SimulationReport rep = simulate_public(env, model, peq, kN, kSeed);
  CHECK(std::abs(rep.agent_mean - peq.agent_value) <= 3.0 * rep.agent_se);
  CHECK(std::abs(rep.principal_mean - peq.principal_value) <= 3.0 * rep.principal_se);
}

TEST_CASE("public simulation: half-split model") {
  const Environment env = uniform_env();
  std::vector<PublicOutcome> outs;
  outs.push_back({"h", 0.5, Prior::uniform(0.5, 1.0)});
  outs.push_back({"l", 0.5, Prior::uniform(0.0, 0.5)});
  const PublicSignalModel model(env.prior(), std::move(outs));
  const PublicEquilibrium peq = solve_public_equilibrium(env, model);
  const SimulationReport rep = simulate_public(env, model, peq, kN, kSeed);
  CHECK(std::abs(rep.agent_mean - 0.5625) <= 3.0 * rep.agent_se);
  CHECK(std::abs(rep.principal_mean - 0.0104490169) <= 3.0 * rep.principal_se);
}

TEST_CASE("public simulation: reveal-interval model") {
  const Environment env = uniform_env();
  std::vector<PublicOutcome> outs;
  outs.push_back({"a", 0.1, Prior::uniform(0.35, 0.45)});
  outs.push_back({"b", 0.9,
                  Prior({{0.0, 0.0}, {0.35, 7.0 / 18.0}, {0.45, 7.0 / 18.0}, {1.0, 1.0}},
                        Prior::Support::any)});
  const PublicSignalModel model(env.prior(), std::move(outs));
  const PublicEquilibrium peq = solve_public_equilibrium(env, model);
  const SimulationReport rep = simulate_public(env, model, peq, kN, kSeed);
  CHECK(std::abs(rep.agent_mean - peq.agent_value) <= 3.0 * rep.agent_se);
  CHECK(std::abs(rep.principal_mean - 0.0722826087) <= 3.0 * rep.principal_se);
}

TEST_CASE("public simulation: pessimistic outcomes continue for free") {
  const Environment env = uniform_env();
  std::vector<PublicOutcome> outs;
  outs.push_back({"h", 0.7, Prior::uniform(0.3, 1.0)});
  outs.push_back({"l", 0.3, Prior::uniform(0.0, 0.3)});
  const PublicSignalModel model(env.prior(), std::move(outs));
  const PublicEquilibrium peq = solve_public_equilibrium(env, model);
  REQUIRE(peq.outcomes[1].kind == OutcomeCase::pessimistic);
  const SimulationReport rep = simulate_public(env, model, peq, kN, kSeed);
  CHECK(std::abs(rep.agent_mean - peq.agent_value) <= 3.0 * rep.agent_se);
  CHECK(std::abs(rep.principal_mean - peq.principal_value) <= 3.0 * rep.principal_se);
}

TEST_CASE("episode count must be positive") {
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_passfail(env);
  CHECK_THROWS_AS(simulate_stationary(env, eq, 0, 1), DomainError);
}
