#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "psearch/dist.hpp"
#include "psearch/equilibrium.hpp"
#include "psearch/errors.hpp"
#include "psearch/search.hpp"

namespace psearch {

struct PublicOutcome {
  std::string label;
  double weight = 0.0;
  Prior interim;  // the agent's belief after observing this realization
};

// A finite-outcome free signal both parties observe before contracting.
// Interim beliefs must be atomless, live inside the prior's domain and mix
// back to the prior (Bayes plausibility), checked in sup-norm on the union of
// all knots plus a 256-point refinement grid.
class PublicSignalModel {
 public:
  PublicSignalModel(Prior base, std::vector<PublicOutcome> outcomes,
                    double mix_tol = 1e-9)
      : base_(std::move(base)), outcomes_(std::move(outcomes)) {
    if (outcomes_.empty()) throw ModelError("public signal needs at least one outcome");
    double total = 0.0;
    for (const PublicOutcome& z : outcomes_) {
      if (!(z.weight > 0.0)) throw ModelError("outcome weights must be positive");
      total += z.weight;
      if (z.interim.lo() < base_.lo() - 1e-12 || z.interim.hi() > base_.hi() + 1e-12)
        throw ModelError("interim belief support must lie within the prior domain");
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ModelError("outcome weights must sum to 1");

    std::vector<double> grid(base_.curve().breakpoints());
    for (const PublicOutcome& z : outcomes_) {
      const auto& bp = z.interim.curve().breakpoints();
      grid.insert(grid.end(), bp.begin(), bp.end());
    }
    for (int i = 0; i <= 256; ++i)
      grid.push_back(base_.lo() + (base_.hi() - base_.lo()) * i / 256.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double x : grid) {
      double mixed = 0.0;
      for (const PublicOutcome& z : outcomes_) mixed += z.weight * z.interim.cdf(x);
      if (std::abs(mixed - base_.cdf(x)) > mix_tol)
        throw ModelError("interim beliefs do not mix back to the prior");
    }
  }

  const Prior& base() const { return base_; }
  const std::vector<PublicOutcome>& outcomes() const { return outcomes_; }

  // Posterior-mean distribution of the public signal alone: one atom per
  // outcome at the interim mean.
  PmDist posterior_mean_dist() const {
    std::vector<Atom> atoms;
    atoms.reserve(outcomes_.size());
    for (const PublicOutcome& z : outcomes_)
      atoms.push_back({z.interim.mean(), z.weight});
    return PmDist(base_, std::move(atoms));
  }

 private:
  Prior base_;
  std::vector<PublicOutcome> outcomes_;
};

// Largest pass/fail cutoff whose failing pool still persuades the agent to
// continue: sup{ x : E[m | m <= x] <= reservation }. The conditional mean is
// continuous and nondecreasing in x, so bisection finds the sup. Requires the
// reservation value to lie within the interim support.
inline double max_persuasive_cutoff(const Prior& interim, double reservation,
                                    double xtol = 1e-12) {
  const double lo = interim.support_lo(), hi = interim.support_hi();
  if (!(reservation >= lo && reservation <= hi))
    throw DomainError("reservation value outside the interim support");
  if (interim.mean() <= reservation) return hi;
  auto h = [&](double x) {
    if (x <= lo) return reservation - lo;
    return reservation - interim.conditional_mean_below(x);
  };
  return detail::bisect_decreasing(h, lo, hi, xtol);
}

// Per-period surplus loss when the principal concedes a stopping cutoff k
// below the efficient one: the forgone surplus on [r_hi - k, r_hi] net of the
// mass she cannot move after too-optimistic outcomes and after outcomes whose
// persuasive cutoffs are capped below r_hi - k. Strictly decreasing in k;
// nonnegative at 0 and nonpositive at r_hi - reservation.
inline double surplus_loss(const PublicSignalModel& model, double k,
                           double reservation, double r_hi) {
  if (!(k >= -1e-12 && k <= r_hi - reservation + 1e-12))
    throw DomainError("cutoff concession outside [0, r_hi - reservation]");
  k = std::clamp(k, 0.0, std::max(r_hi - reservation, 0.0));
  const double cut = r_hi - k;
  const auto& base = model.base().curve();
  double loss = -(base.survival_integral(cut) - base.survival_integral(r_hi));
  for (const PublicOutcome& z : model.outcomes()) {
    const double z_lo = z.interim.support_lo(), z_hi = z.interim.support_hi();
    if (reservation < z_lo) {
      if (cut > reservation)
        loss += z.weight * z.interim.curve().cdf_integral(reservation, cut);
    } else if (reservation <= z_hi) {
      const double cap = max_persuasive_cutoff(z.interim, reservation);
      if (cap < cut) {
        const double at_cap = z.interim.cdf(cap);
        loss += z.weight *
                (z.interim.curve().cdf_integral(cap, cut) - at_cap * (cut - cap));
      }
    }
    // reservation above the interim support: the agent continues regardless
    // of any signal, nothing is lost relative to the efficient cutoff.
  }
  return loss;
}

enum class OutcomeCase { optimistic, pessimistic, interior, capped };

inline const char* to_string(OutcomeCase c) {
  switch (c) {
    case OutcomeCase::optimistic: return "optimistic";
    case OutcomeCase::pessimistic: return "pessimistic";
    case OutcomeCase::interior: return "interior";
    case OutcomeCase::capped: return "capped";
  }
  return "?";
}

struct OutcomeSolution {
  std::string label;
  double weight = 0.0;
  OutcomeCase kind = OutcomeCase::interior;
  double persuasion_cap = std::numeric_limits<double>::quiet_NaN();  // x-bar
  double cutoff = std::numeric_limits<double>::quiet_NaN();          // chosen pass/fail cutoff
  double price = 0.0;
  double value = 0.0;  // principal's per-outcome continuation value psi
};

struct PublicEquilibrium {
  double agent_value = 0.0;        // U = search payoff under the public signal alone
  double principal_value = 0.0;    // V
  double reservation = 0.0;        // delta * U
  double cutoff_concession = 0.0;  // k*: how far below the efficient cutoff she must stop
  std::vector<OutcomeSolution> outcomes;
};

// Equilibrium of the game with a public signal. The agent keeps the autarky
// payoff of the public signal alone; the principal's value is the full
// remaining surplus minus the concession k*/delta, where k* is the unique
// fixed point of k = (delta/(1-delta)) * surplus_loss(k).
inline PublicEquilibrium solve_public_equilibrium(const Environment& env,
                                                  const PublicSignalModel& model) {
  env.require_search_value();
  const Benchmarks b = benchmarks(env);
  const double r_hi = b.efficient.reservation;
  const double delta = env.delta();

  const PmDist g_public = model.posterior_mean_dist();
  const SearchValues sv = reservation_value(env, g_public);
  const double r_xi = sv.reservation;

  const double width = std::max(r_hi - r_xi, 0.0);
  double k = 0.0;
  if (width > 0.0 && surplus_loss(model, 0.0, r_xi, r_hi) > 0.0) {
    if (surplus_loss(model, width, r_xi, r_hi) > 0.0)
      throw SolverError("surplus loss fails to bracket its fixed point");
    auto q = [&](double kk) {
      return env.discount_ratio() * surplus_loss(model, kk, r_xi, r_hi) - kk;
    };
    k = detail::bisect_decreasing(q, 0.0, width, 1e-14);
  }

  PublicEquilibrium peq;
  peq.agent_value = sv.value;
  peq.reservation = r_xi;
  peq.cutoff_concession = k;
  peq.principal_value = b.efficient.value - sv.value - k / delta;
  const double v = peq.principal_value;
  const double induced_cutoff = delta * v + r_xi;  // equals r_hi - k*

  for (const PublicOutcome& z : model.outcomes()) {
    OutcomeSolution sol;
    sol.label = z.label;
    sol.weight = z.weight;
    const double z_lo = z.interim.support_lo(), z_hi = z.interim.support_hi();
    if (r_xi < z_lo) {
      sol.kind = OutcomeCase::optimistic;  // stops regardless; no information sold
      sol.price = 0.0;
      sol.value = 0.0;
    } else if (r_xi > z_hi) {
      sol.kind = OutcomeCase::pessimistic;  // continues regardless
      sol.price = 0.0;
      sol.value = delta * v;
    } else {
      const double cap = max_persuasive_cutoff(z.interim, r_xi);
      sol.persuasion_cap = cap;
      sol.kind = cap >= induced_cutoff ? OutcomeCase::interior : OutcomeCase::capped;
      const double x = std::min(cap, induced_cutoff);
      sol.cutoff = x;
      const double fzx = z.interim.cdf(x);
      const double uninf = std::max(z.interim.mean() - r_xi, 0.0);
      double price = z.interim.curve().survival_integral(x) +
                     (1.0 - fzx) * (x - r_xi) - uninf;
      if (price < 0.0) {
        if (price < -1e-9) throw SolverError("negative pass/fail price");
        price = 0.0;
      }
      sol.price = price;
      sol.value = sol.kind == OutcomeCase::interior
                      ? z.interim.curve().survival_integral(x) - uninf + delta * v
                      : fzx * delta * v;
    }
    peq.outcomes.push_back(std::move(sol));
  }

  double mixed = 0.0;
  for (const OutcomeSolution& sol : peq.outcomes) mixed += sol.weight * sol.value;
  if (std::abs(mixed - v) > 1e-9)
    throw SolverError("per-outcome values do not self-generate the principal value");
  return peq;
}

struct FullExtractionResult {
  bool applicable = false;      // requires full-support interim beliefs on the whole domain
  bool full_extraction = false; // V equals the entire surplus over the public-signal autarky
};

// Full extraction holds iff no realization leaves the failing pool's mean
// above the agent's reservation value at the efficient cutoff.
inline FullExtractionResult full_extraction_check(const Environment& env,
                                                  const PublicSignalModel& model) {
  for (const PublicOutcome& z : model.outcomes()) {
    const bool spans = std::abs(z.interim.lo() - env.prior().lo()) <= 1e-12 &&
                       std::abs(z.interim.hi() - env.prior().hi()) <= 1e-12;
    if (!spans || !z.interim.full_support()) return {false, false};
  }
  env.require_search_value();
  const double r_hi = benchmarks(env).efficient.reservation;
  const double r_xi =
      reservation_value(env, model.posterior_mean_dist()).reservation;
  for (const PublicOutcome& z : model.outcomes())
    if (z.interim.conditional_mean_below(r_hi) > r_xi + 1e-12)
      return {true, false};
  return {true, true};
}

}  // namespace psearch
