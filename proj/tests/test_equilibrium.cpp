#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "psearch/equilibrium.hpp"
#include "support.hpp"

using namespace psearch;

namespace {
const double kSqrt5 = std::sqrt(5.0);
const double kRbar = (3.0 - kSqrt5) / 2.0;
const double kV = 3.0 * (3.0 - kSqrt5) / 4.0 - 0.5;

Environment uniform_env() { return Environment(Prior::uniform(0.0, 1.0), 2.0 / 3.0); }
}  // namespace

TEST_CASE("pass/fail equilibrium on the uniform environment") {
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_passfail(env);

  CHECK(eq.agent_value == Catch::Approx(0.5).margin(1e-12));
  CHECK(eq.principal_value == Catch::Approx(kV).margin(1e-9));
  CHECK(eq.cutoff == Catch::Approx(kRbar).margin(1e-9));
  CHECK(eq.contract.price == Catch::Approx(0.0543730).margin(1e-6));
  CHECK(eq.fail_mean == Catch::Approx(0.190983).margin(1e-6));
  CHECK(eq.pass_mean == Catch::Approx(0.690983).margin(1e-6));

  // Price restated: V times one minus the discounted continue probability.
  const double f_r = env.prior().cdf(eq.cutoff);
  CHECK(std::abs(eq.contract.price -
                 eq.principal_value * (1.0 - env.delta() * f_r)) <= 1e-12);

  // Geometric stopping hazard under the pass/fail rule.
  CHECK(1.0 - f_r == Catch::Approx(0.618034).margin(1e-6));
}

TEST_CASE("lower censorship is payoff equivalent") {
  const Environment env = uniform_env();
  const EquilibriumSolution pf = equilibrium_passfail(env);
  const EquilibriumSolution lc = equilibrium_lower_censorship(env);

  CHECK(lc.agent_value == pf.agent_value);
  CHECK(lc.principal_value == pf.principal_value);
  CHECK(lc.contract.price == pf.contract.price);

  // Constant at F(r_high) across the whole persuasion band.
  const double target = env.prior().cdf(lc.cutoff);
  const double r_lo = lc.bench.autarky.reservation;
  for (int i = 0; i <= 32; ++i) {
    const double m = r_lo + (lc.cutoff - r_lo) * i / 32.0;
    CHECK(lc.contract.dist.cdf(m) == Catch::Approx(target).margin(1e-12));
  }

  CHECK(static_cast<bool>(is_mpc(pf.contract.dist, lc.contract.dist)));
}

TEST_CASE("principal objective values") {
  const Environment env = uniform_env();
  const Prior& f = env.prior();
  const EquilibriumSolution eq = equilibrium_passfail(env);

  CHECK(principal_objective(env, eq.contract.dist) ==
        Catch::Approx(kV).margin(1e-9));
  CHECK(principal_objective(env, uninformative(f)) ==
        Catch::Approx(0.0).margin(1e-15));

  // Full information is profitable but strictly below the optimum.
  const double v_full = principal_objective(env, full_info(f));
  CHECK(v_full > 0.0);
  CHECK(v_full < kV - 1e-6);

  // Alternative route to the optimum value: the reservation-value gap
  // scaled by the discount factor.
  const double r_star = reservation_value(env, eq.contract.dist).reservation;
  CHECK((r_star - eq.bench.autarky.reservation) / env.delta() ==
        Catch::Approx(eq.principal_value).margin(1e-9));
}

TEST_CASE("price decomposition and self-generation") {
  std::mt19937_64 rng(211);
  for (int trial = 0; trial < 6; ++trial) {
    const Environment env = testsupport::random_environment(rng);
    const EquilibriumSolution eq = equilibrium_passfail(env);
    const double r_lo = eq.bench.autarky.reservation;
    const PmDist& g = eq.contract.dist;

    const double binding = g.incremental_benefit(r_lo) -
                           std::max(env.prior().mean() - r_lo, 0.0);
    CHECK(std::abs(eq.contract.price - binding) <= 1e-10);

    CHECK(std::abs(eq.agent_value -
                   (r_lo + g.incremental_benefit(r_lo) - eq.contract.price)) <= 1e-10);
    CHECK(std::abs(eq.principal_value -
                   (eq.contract.price +
                    g.cdf(r_lo) * env.delta() * eq.principal_value)) <= 1e-10);
  }
}

TEST_CASE("pass/fail benefit curve is tangent to the prior curve") {
  std::mt19937_64 rng(223);
  for (int trial = 0; trial < 8; ++trial) {
    const Environment env = testsupport::random_environment(rng);
    const Prior& f = env.prior();
    const Benchmarks b = benchmarks(env);
    const double r_hi = b.efficient.reservation;
    const PmDist g = binary_split(f, r_hi);

    CHECK(std::abs(g.incremental_benefit(r_hi) - f.incremental_benefit(r_hi)) <= 1e-10);
    CHECK(std::abs(g.cdf(r_hi) - f.cdf(r_hi)) <= 1e-12);  // matching right slopes
    for (int i = 0; i <= 64; ++i) {
      const double x = f.lo() + (f.hi() - f.lo()) * i / 64.0;
      CHECK(g.curve().survival_integral(x) <=
            f.curve().survival_integral(x) + 1e-10);
    }
    // The pooled means straddle both reservation values strictly.
    CHECK(g.atoms()[0].location < b.autarky.reservation);
    CHECK(b.efficient.reservation < g.atoms()[1].location);

    // Pooling at the efficient cutoff leaves the reservation value unchanged.
    CHECK(std::abs(reservation_value(env, g).reservation - r_hi) <= 1e-8);
  }
}

TEST_CASE("binary cutoff oracle finds the efficient threshold") {
  const Environment env = uniform_env();
  const CutoffSearch best = best_binary_cutoff(env, 4096);
  CHECK(std::abs(best.cutoff - kRbar) <= best.step);
  CHECK(std::abs(best.value - kV) <= 1e-6);

  // Pooling at the autarky threshold is strictly worse.
  const Benchmarks b = benchmarks(env);
  const double v_low =
      principal_objective(env, binary_split(env.prior(), b.autarky.reservation));
  CHECK(v_low < best.value - 1e-4);

  // Single-peaked scan over a coarser grid (observed, not proven).
  int peaks = 0;
  const int n = 256;
  double prev = -1e300, cur = 0.0;
  bool rising = true;
  for (int i = 1; i <= n; ++i) {
    const double x = env.prior().lo() + (env.prior().hi() - env.prior().lo()) *
                                            i / (n + 1.0);
    cur = principal_objective(env, binary_split(env.prior(), x));
    if (rising && cur < prev - 1e-14) {
      rising = false;
      ++peaks;
    } else if (!rising && cur > prev + 1e-14) {
      rising = true;
    }
    prev = cur;
  }
  CHECK(peaks == 1);
}

TEST_CASE("verification accepts the constructed equilibria") {
  const Environment env = uniform_env();
  for (const EquilibriumSolution& eq :
       {equilibrium_passfail(env), equilibrium_lower_censorship(env)}) {
    const VerificationReport rep = verify_stationary(env, eq.contract);
    CAPTURE(eq.rule == SignalRule::pass_fail);
    for (const Check& c : rep.checks) {
      CAPTURE(c.name, c.residual, c.tol);
      CHECK(c.pass);
    }
    CHECK(rep.pass());
  }
}

TEST_CASE("every convex mixture of the two constructions is an equilibrium") {
  // The conditions a stationary distribution must satisfy are linear in the
  // CDF and both constructions meet them with the same boundary values, so
  // mixtures sample the (uncountable) equilibrium set.
  const Environment env = uniform_env();
  const EquilibriumSolution pf = equilibrium_passfail(env);
  const EquilibriumSolution lc = equilibrium_lower_censorship(env);
  for (double lambda : {0.25, 0.5, 0.75}) {
    const PmDist mixed = testsupport::mix(
        env.prior(), {{lambda, &pf.contract.dist}, {1.0 - lambda, &lc.contract.dist}});
    const Contract contract = make_contract(env, pf.contract.price, mixed);
    CHECK(verify_stationary(env, contract).pass());
  }
}

TEST_CASE("verification flags broken contracts") {
  const Environment env = uniform_env();
  const EquilibriumSolution eq = equilibrium_passfail(env);

  SECTION("overpricing breaks participation") {
    const Contract bad{eq.contract.price + 0.01, eq.contract.dist};
    const VerificationReport rep = verify_stationary(env, bad);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.find("pc-binding")->pass);
    CHECK_FALSE(rep.find("agent-value-consistency")->pass);
  }

  SECTION("full information at the equilibrium price breaks flatness") {
    const Contract bad{eq.contract.price, full_info(env.prior())};
    const VerificationReport rep = verify_stationary(env, bad);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.find("flatness-on-persuasion-band")->pass);
    CHECK_FALSE(rep.find("profit-maximization")->pass);
  }

  SECTION("pooling at the autarky threshold is not profit maximizing") {
    const double r_lo = eq.bench.autarky.reservation;
    const PmDist g = binary_split(env.prior(), r_lo);
    const double binding = g.incremental_benefit(r_lo) -
                           std::max(env.prior().mean() - r_lo, 0.0);
    const Contract bad{binding, g};
    const VerificationReport rep = verify_stationary(env, bad);
    CHECK_FALSE(rep.pass());
    CHECK(rep.find("pc-binding")->pass);
    CHECK_FALSE(rep.find("profit-maximization")->pass);
    CHECK_FALSE(rep.find("stop-probability")->pass);
  }
}

TEST_CASE("contract validation") {
  const Environment env = uniform_env();
  CHECK_THROWS_AS(make_contract(env, -0.01, uninformative(env.prior())), ModelError);
  const PmDist spread(env.prior(), {{0.1, 0.5}, {0.9, 0.5}});
  CHECK_THROWS_AS(make_contract(env, 0.0, spread), ModelError);
}

TEST_CASE("price falls toward zero as patience rises") {
  const Prior f = Prior::uniform(0.0, 1.0);
  double prev = 1e300;
  for (double delta : {0.9, 0.99, 0.999}) {
    const Environment env(f, delta);
    const EquilibriumSolution eq = equilibrium_passfail(env);
    const double f_r = f.cdf(eq.bench.efficient.reservation);
    CHECK(std::abs(eq.contract.price / (1.0 - delta * f_r) - eq.principal_value) <=
          1e-10);
    CHECK(eq.contract.price < prev);
    prev = eq.contract.price;
  }
}

TEST_CASE("equilibrium construction refuses never-search environments") {
  const Environment env(Prior::uniform(0.9, 1.0), 0.5);
  CHECK_THROWS_AS(equilibrium_passfail(env), NeverSearchError);
  CHECK_THROWS_AS(best_binary_cutoff(env, 128), NeverSearchError);
}
