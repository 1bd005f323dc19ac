#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "psearch/dist.hpp"
#include "psearch/errors.hpp"
#include "psearch/search.hpp"

namespace psearch {

enum class SignalRule { pass_fail, lower_censorship };

struct Contract {
  double price = 0.0;
  PmDist dist;
};

// Validates price >= 0 and that the signal distribution is a mean-preserving
// contraction of the environment prior.
inline Contract make_contract(const Environment& env, double price, PmDist dist,
                              double mpc_tol = 1e-9) {
  if (!(price >= 0.0)) throw ModelError("contract price must be nonnegative");
  const MpcReport rep = is_mpc(dist, env.prior(), mpc_tol);
  if (!rep)
    throw ModelError(
        "contract distribution is not a mean-preserving contraction of the prior");
  return Contract{price, std::move(dist)};
}

struct EquilibriumSolution {
  double agent_value;      // U: the agent keeps his autarky payoff
  double principal_value;  // V: the full surplus over autarky
  Contract contract;
  Benchmarks bench;
  double cutoff;           // pass/fail threshold (efficient reservation value)
  SignalRule rule;
  double fail_mean;        // pooled mean below the cutoff
  double pass_mean;        // conditional mean above the cutoff
};

// Principal's stationary objective for a candidate signal distribution at a
// binding participation price:
//   (c_g(r_autarky) - c_uninformative(r_autarky)) / (1 - delta * g(r_autarky)).
namespace detail {

inline double principal_objective_at(const Environment& env, const Distribution& g,
                                     double r_autarky) {
  const double info_value = g.curve().survival_integral(r_autarky) -
                            std::max(env.prior().mean() - r_autarky, 0.0);
  return info_value / (1.0 - env.delta() * g.cdf(r_autarky));
}

inline void check_residual(double residual, double tol, const char* what) {
  if (!(std::abs(residual) <= tol))
    throw SolverError(std::string("equilibrium construction failed a self-check: ") + what);
}

inline EquilibriumSolution build_equilibrium(const Environment& env, SignalRule rule) {
  env.require_search_value();
  const Benchmarks b = benchmarks(env);
  const double r_lo = b.autarky.reservation;
  const double r_hi = b.efficient.reservation;
  const Prior& f = env.prior();

  PmDist dist = rule == SignalRule::pass_fail ? binary_split(f, r_hi)
                                              : lower_censorship(f, r_hi);
  const double surplus = b.efficient.value - b.autarky.value;
  const double price = surplus * (1.0 - env.delta() * f.cdf(r_hi));
  const double fail_mean = dist.atoms().front().location;
  const double pass_mean = f.conditional_mean_above(r_hi);

  EquilibriumSolution eq{b.autarky.value, surplus,
                         Contract{price, std::move(dist)}, b,
                         r_hi, rule, fail_mean, pass_mean};

  const PmDist& g = eq.contract.dist;
  check_residual(price - (g.incremental_benefit(r_lo) -
                          std::max(f.mean() - r_lo, 0.0)),
                 1e-9, "binding participation price");
  check_residual(g.cdf(r_lo) - f.cdf(r_hi), 1e-9, "stop probability");
  check_residual(eq.agent_value -
                     (r_lo + g.incremental_benefit(r_lo) - price),
                 1e-9, "agent self-generation");
  check_residual(eq.principal_value -
                     (price + g.cdf(r_lo) * env.delta() * eq.principal_value),
                 1e-9, "principal self-generation");
  return eq;
}

}  // namespace detail

// Stationary equilibrium with the minimally informative pass/fail signal.
inline EquilibriumSolution equilibrium_passfail(const Environment& env) {
  return detail::build_equilibrium(env, SignalRule::pass_fail);
}

// Payoff-equivalent equilibrium that reveals quality above the cutoff.
inline EquilibriumSolution equilibrium_lower_censorship(const Environment& env) {
  return detail::build_equilibrium(env, SignalRule::lower_censorship);
}

inline double principal_objective(const Environment& env, const Distribution& g) {
  env.require_search_value();
  return detail::principal_objective_at(env, g,
                                        benchmarks(env).autarky.reservation);
}

struct CutoffSearch {
  double cutoff = 0.0;
  double value = 0.0;
  double step = 0.0;
};

// Brute-force scan of the principal objective over binary pooling cutoffs.
// With a dense grid the argmax lands within one step of the efficient
// reservation value and the max value within ~1e-6 of the full surplus.
inline CutoffSearch best_binary_cutoff(const Environment& env, int grid_size = 4096) {
  env.require_search_value();
  if (grid_size < 2) throw DomainError("cutoff grid needs at least two points");
  const double r_lo = benchmarks(env).autarky.reservation;
  const Prior& f = env.prior();
  const double a = f.support_lo(), b = f.support_hi();
  const double step = (b - a) / (grid_size + 1);
  CutoffSearch best{a + step, -std::numeric_limits<double>::infinity(), step};
  for (int i = 1; i <= grid_size; ++i) {
    const double x = a + step * i;
    const double v = detail::principal_objective_at(env, binary_split(f, x), r_lo);
    if (v > best.value) {
      best.value = v;
      best.cutoff = x;
    }
  }
  return best;
}

struct Check {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tol = 0.0;
};

struct VerificationReport {
  std::vector<Check> checks;
  bool pass() const {
    for (const Check& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const Check* find(const std::string& name) const {
    for (const Check& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Checks a candidate stationary contract against every equilibrium condition:
// binding participation, self-generation for both sides, the stop-probability
// and dominance conditions, flatness of the CDF over the persuasion band, and
// profit maximality against the binary-cutoff oracle. Failing conditions are
// report entries, not errors.
inline VerificationReport verify_stationary(const Environment& env,
                                            const Contract& contract,
                                            int oracle_grid = 4096) {
  env.require_search_value();
  if (!(contract.price >= 0.0) || !is_mpc(contract.dist, env.prior()))
    throw ModelError("malformed contract: price must be nonnegative and the "
                     "distribution a contraction of the prior");
  const Benchmarks b = benchmarks(env);
  const Prior& f = env.prior();
  const double r_lo = b.autarky.reservation;
  const double r_hi = b.efficient.reservation;
  const double u_lo = b.autarky.value;
  const double surplus = b.efficient.value - u_lo;
  const PmDist& g = contract.dist;
  const double p = contract.price;
  const PmDist passfail = binary_split(f, r_hi);

  VerificationReport rep;
  auto add = [&rep](std::string name, double residual, double tol) {
    rep.checks.push_back({std::move(name), std::abs(residual) <= tol, residual, tol});
  };

  const double uninf_at_rlo = std::max(f.mean() - r_lo, 0.0);

  // Participation must bind: price equals the one-period value of information
  // at the autarky reservation value.
  add("pc-binding", (g.incremental_benefit(r_lo) - uninf_at_rlo) - p, 1e-9);

  // Agent's stationary value under the contract, solved independently from
  // U = delta*U + c_g(delta*U) - p, must equal the autarky payoff.
  {
    auto phi = [&](double u) {
      return env.delta() * u + g.curve().survival_integral(env.delta() * u) - p - u;
    };
    const double lo_u = f.mean() - p - 1.0;
    const double hi_u = b.efficient.value + 1.0;
    const double solved = detail::bisect_decreasing(phi, lo_u, hi_u, 1e-13);
    add("agent-value-consistency", solved - u_lo, 1e-9);
  }

  add("stop-probability", g.cdf(r_lo) - f.cdf(r_hi), 1e-9);

  // c_g >= c_passfail everywhere, with equality at the autarky reservation.
  {
    std::vector<double> grid(g.curve().breakpoints());
    const auto& pf = passfail.curve().breakpoints();
    grid.insert(grid.end(), pf.begin(), pf.end());
    for (int i = 0; i <= 256; ++i)
      grid.push_back(f.lo() + (f.hi() - f.lo()) * i / 256.0);
    double worst = 0.0;
    for (double x : grid) {
      const double gap = passfail.curve().survival_integral(x) -
                         g.curve().survival_integral(x);
      worst = std::max(worst, gap);
    }
    rep.checks.push_back({"dominates-passfail", worst <= 1e-10, worst, 1e-10});
    add("tangent-at-autarky-reservation",
        g.incremental_benefit(r_lo) - passfail.incremental_benefit(r_lo), 1e-9);
  }

  // The CDF must be flat at F(r_hi) across the whole band [r_lo, r_hi].
  {
    double worst = 0.0;
    const double target = f.cdf(r_hi);
    for (int i = 0; i <= 256; ++i) {
      const double m = r_lo + (r_hi - r_lo) * i / 256.0;
      worst = std::max(worst, std::abs(g.cdf(m) - target));
    }
    for (double x : g.curve().breakpoints())
      if (x >= r_lo && x <= r_hi)
        worst = std::max(worst, std::abs(g.cdf(x) - target));
    rep.checks.push_back({"flatness-on-persuasion-band", worst <= 1e-9, worst, 1e-9});
  }

  add("self-generation-agent",
      u_lo - (r_lo + g.incremental_benefit(r_lo) - p), 1e-10);
  add("self-generation-principal",
      surplus - (p + g.cdf(r_lo) * env.delta() * surplus), 1e-10);

  // Profit maximality against the binary-cutoff oracle (one-sided).
  {
    const CutoffSearch oracle = best_binary_cutoff(env, oracle_grid);
    const double shortfall =
        oracle.value - detail::principal_objective_at(env, g, r_lo);
    rep.checks.push_back({"profit-maximization", shortfall <= 1e-6, shortfall, 1e-6});
  }

  // Sanity of the pass/fail construction itself: tangent to c_F at the
  // efficient reservation value and below it everywhere.
  {
    const double at = passfail.incremental_benefit(r_hi) - f.incremental_benefit(r_hi);
    double worst = 0.0;
    for (int i = 0; i <= 256; ++i) {
      const double x = f.lo() + (f.hi() - f.lo()) * i / 256.0;
      worst = std::max(worst, passfail.curve().survival_integral(x) -
                                  f.curve().survival_integral(x));
    }
    const double slope_gap = passfail.cdf(r_hi) - f.cdf(r_hi);
    const bool ok = std::abs(at) <= 1e-10 && worst <= 1e-10 && std::abs(slope_gap) <= 1e-12;
    rep.checks.push_back({"passfail-tangency", ok, std::max(std::abs(at), worst), 1e-10});
  }

  return rep;
}

}  // namespace psearch
