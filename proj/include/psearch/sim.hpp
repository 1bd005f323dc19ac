#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "psearch/equilibrium.hpp"
#include "psearch/errors.hpp"
#include "psearch/public_signals.hpp"
#include "psearch/rng.hpp"
#include "psearch/search.hpp"

namespace psearch {

// Episodes are capped; geometric stopping makes the cap astronomically
// unlikely in equilibrium, and the induced truncation bias is bounded by
// delta^horizon * theta_hi, reported with every run.
constexpr long kEpisodeHorizon = 10000;

struct EpisodeResult {
  long stop_period = 0;
  double consumed_mean = 0.0;     // posterior mean of the consumed good (0 if truncated)
  double agent_payoff = 0.0;      // discounted to the first period
  double principal_payoff = 0.0;  // discounted sum of prices received
  bool truncated = false;
};

struct SimulationReport {
  long n_episodes = 0;
  std::uint64_t seed = 0;
  double agent_mean = 0.0, agent_se = 0.0;
  double principal_mean = 0.0, principal_se = 0.0;
  std::vector<long long> stopping_counts;  // index t-1 holds stops in period t
  long long truncated_episodes = 0;
  double truncation_bias_bound = 0.0;
};

namespace detail {

struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

struct Welford {
  // Mean and standard error via Kahan-compensated sums; order-independent to
  // rounding for the episode counts we run.
  Kahan sum, sumsq;
  long n = 0;
  void add(double x) {
    sum.add(x);
    sumsq.add(x * x);
    ++n;
  }
  double mean() const { return sum.sum / n; }
  double se() const {
    if (n < 2) return 0.0;
    const double var = (sumsq.sum - sum.sum * sum.sum / n) / (n - 1);
    return std::sqrt(std::max(var, 0.0) / n);
  }
};

}  // namespace detail

// One playout under a stationary contract: each period a quality is drawn
// from the prior, the signal realizes the posterior mean, the price is paid,
// and the agent stops iff the posterior mean strictly exceeds his reservation
// value (ties continue).
inline EpisodeResult run_episode(const Environment& env,
                                 const EquilibriumSolution& eq, SplitMix64& rng) {
  const double delta = env.delta();
  const double stop_above = eq.bench.autarky.reservation;
  double disc = 1.0;
  double paid = 0.0;
  for (long t = 1; t <= kEpisodeHorizon; ++t) {
    const double theta = env.prior().curve().quantile(rng.uniform01());
    const double posterior =
        theta > eq.cutoff
            ? (eq.rule == SignalRule::pass_fail ? eq.pass_mean : theta)
            : eq.fail_mean;
    paid += disc * eq.contract.price;
    if (posterior > stop_above)
      return {t, posterior, disc * posterior - paid, paid, false};
    disc *= delta;
  }
  return {kEpisodeHorizon, 0.0, -paid, paid, true};
}

namespace detail {

template <class EpisodeFn>
SimulationReport simulate(const Environment& env, long n, std::uint64_t seed,
                          EpisodeFn&& episode) {
  if (n < 1) throw DomainError("episode count must be at least 1");
  SimulationReport rep;
  rep.n_episodes = n;
  rep.seed = seed;
  rep.truncation_bias_bound =
      std::pow(env.delta(), static_cast<double>(kEpisodeHorizon)) * env.prior().hi();
  Welford agent, principal;
  for (long i = 0; i < n; ++i) {
    SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(i));
    const EpisodeResult ep = episode(rng);
    agent.add(ep.agent_payoff);
    principal.add(ep.principal_payoff);
    if (rep.stopping_counts.size() < static_cast<std::size_t>(ep.stop_period))
      rep.stopping_counts.resize(static_cast<std::size_t>(ep.stop_period), 0);
    ++rep.stopping_counts[static_cast<std::size_t>(ep.stop_period - 1)];
    if (ep.truncated) ++rep.truncated_episodes;
  }
  rep.agent_mean = agent.mean();
  rep.agent_se = agent.se();
  rep.principal_mean = principal.mean();
  rep.principal_se = principal.se();
  return rep;
}

}  // namespace detail

inline SimulationReport simulate_stationary(const Environment& env,
                                            const EquilibriumSolution& eq,
                                            long n, std::uint64_t seed) {
  return detail::simulate(env, n, seed,
                          [&](SplitMix64& rng) { return run_episode(env, eq, rng); });
}

// One playout with a public signal: first the outcome realizes, then the
// per-outcome contract applies. Too-optimistic outcomes stop at once for
// free; too-pessimistic ones continue for free; the rest run the pass/fail
// test at that outcome's cutoff and price.
inline EpisodeResult run_public_episode(const Environment& env,
                                        const PublicSignalModel& model,
                                        const PublicEquilibrium& peq,
                                        SplitMix64& rng) {
  const double delta = env.delta();
  const std::size_t nz = model.outcomes().size();
  double disc = 1.0;
  double paid = 0.0;
  for (long t = 1; t <= kEpisodeHorizon; ++t) {
    double u = rng.uniform01();
    std::size_t zi = 0;
    for (; zi + 1 < nz; ++zi) {
      const double w = model.outcomes()[zi].weight;
      if (u < w) break;
      u -= w;
    }
    const PublicOutcome& z = model.outcomes()[zi];
    const OutcomeSolution& sol = peq.outcomes[zi];
    switch (sol.kind) {
      case OutcomeCase::optimistic: {
        const double m = z.interim.mean();
        return {t, m, disc * m - paid, paid, false};
      }
      case OutcomeCase::pessimistic:
        break;  // free continuation
      case OutcomeCase::interior:
      case OutcomeCase::capped: {
        paid += disc * sol.price;
        const double theta = z.interim.curve().quantile(rng.uniform01());
        if (theta > sol.cutoff && z.interim.cdf(sol.cutoff) < 1.0) {
          const double m = z.interim.conditional_mean_above(sol.cutoff);
          return {t, m, disc * m - paid, paid, false};
        }
        break;
      }
    }
    disc *= delta;
  }
  return {kEpisodeHorizon, 0.0, -paid, paid, true};
}

inline SimulationReport simulate_public(const Environment& env,
                                        const PublicSignalModel& model,
                                        const PublicEquilibrium& peq, long n,
                                        std::uint64_t seed) {
  if (model.outcomes().size() != peq.outcomes.size())
    throw ModelError("public equilibrium does not match the model's outcomes");
  return detail::simulate(env, n, seed, [&](SplitMix64& rng) {
    return run_public_episode(env, model, peq, rng);
  });
}

}  // namespace psearch
