#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "psearch/dist.hpp"
#include "psearch/errors.hpp"

namespace psearch {

// A search market: quality prior plus common discount factor.
class Environment {
 public:
  Environment(Prior prior, double delta)
      : prior_(std::move(prior)), delta_(delta) {
    if (!(delta > 0.0 && delta < 1.0))
      throw DomainError("discount factor must lie strictly inside (0,1)");
    never_searches_ = prior_.lo() >= delta_ * prior_.mean();
  }

  const Prior& prior() const { return prior_; }
  double delta() const { return delta_; }
  double discount_ratio() const { return delta_ / (1.0 - delta_); }

  // True when the lowest quality already beats any discounted continuation:
  // information is worthless and the contracting game is trivial.
  bool never_searches() const { return never_searches_; }

  void require_search_value() const {
    if (never_searches_)
      throw NeverSearchError(
          "agent never searches (theta_lo >= delta * mean); no equilibrium to construct");
  }

 private:
  Prior prior_;
  double delta_;
  bool never_searches_;
};

struct SearchValues {
  double value = 0.0;        // stationary search payoff u
  double reservation = 0.0;  // stopping threshold r = delta * value
};

namespace detail {

// Bisection for a continuous strictly decreasing h with h(lo) >= 0 >= h(hi).
// Shrinks the bracket to xtol (or machine precision) and returns its midpoint.
template <class Fn>
double bisect_decreasing(Fn&& h, double lo, double hi, double xtol,
                         int max_iter = 200) {
  if (h(lo) < 0.0 || h(hi) > 0.0)
    throw SolverError("bisection endpoints do not bracket a root");
  for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Unique solution of r = (delta/(1-delta)) * c_g(r), found by bisection; the
// payoff u = r/delta then satisfies u = delta*u + c_g(delta*u).
inline SearchValues reservation_value(const Environment& env,
                                      const Distribution& g,
                                      double xtol = 1e-13) {
  env.require_search_value();
  const double ratio = env.discount_ratio();
  auto h = [&](double r) { return ratio * g.curve().survival_integral(r) - r; };
  const double root =
      detail::bisect_decreasing(h, env.prior().lo(), env.prior().hi(), xtol);
  SearchValues sv;
  sv.value = root / env.delta();
  sv.reservation = env.delta() * sv.value;
  return sv;
}

// Autarky (uninformed) and efficient (fully informed) search values.
struct Benchmarks {
  SearchValues autarky;    // u and r under the degenerate posterior-mean dist
  SearchValues efficient;  // u and r under the prior itself
};

inline Benchmarks benchmarks(const Environment& env, double xtol = 1e-13) {
  env.require_search_value();
  Benchmarks b;
  // The autarky payoff has the closed form max{mean, 0}; the solver result is
  // kept as a consistency check only.
  b.autarky.value = std::max(env.prior().mean(), 0.0);
  b.autarky.reservation = env.delta() * b.autarky.value;
  const SearchValues solved = reservation_value(env, uninformative(env.prior()), xtol);
  if (std::abs(solved.value - b.autarky.value) > 1e-9)
    throw SolverError("autarky value disagrees with its closed form");
  b.efficient = reservation_value(env, env.prior(), xtol);
  if (!(b.autarky.reservation < b.efficient.reservation))
    throw SolverError("efficient reservation value must exceed the autarky one");
  return b;
}

// Independent route to the search payoff: iterate the one-period map
// u <- integral of max{m, delta*u} dG(m), evaluated in closed form per
// segment. The map is a delta-contraction, so the stopping rule below pins
// the limit to about `tol` for every discount factor.
inline double value_iteration(const Environment& env, const Distribution& g,
                              long max_iterations = 1000000,
                              double tol = 1e-10) {
  const double delta = env.delta();
  const double stop = tol * std::min(1.0, (1.0 - delta) / delta);
  double u = g.mean();
  for (long i = 0; i < max_iterations; ++i) {
    const double r = delta * u;
    const double next =
        r * g.curve().cdf(r) + (g.mean() - g.curve().moment_below(r));
    if (std::abs(next - u) < stop) return next;
    u = next;
  }
  throw SolverError("value iteration exceeded the iteration cap");
}

}  // namespace psearch
