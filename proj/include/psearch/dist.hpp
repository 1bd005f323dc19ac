#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "psearch/errors.hpp"
#include "psearch/pwl.hpp"

namespace psearch {

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

// Read surface shared by priors and posterior-mean distributions.
class Distribution {
 public:
  double lo() const { return curve_.lo(); }
  double hi() const { return curve_.hi(); }
  double cdf(double x) const { return curve_.cdf(x); }
  double mean() const { return curve_.mean(); }

  // Expected surplus of one draw over an outside option worth x:
  // the integral of (1 - cdf) from x to hi. Nonincreasing and convex in x,
  // equal to mean - lo at lo and 0 at hi.
  double incremental_benefit(double x) const {
    require_in_domain(x);
    return curve_.survival_integral(x);
  }

  // Right derivative of incremental_benefit: cdf(x) - 1. Undefined at hi.
  double incremental_benefit_slope(double x) const {
    require_in_domain(x);
    if (x == hi()) throw DomainError("right derivative undefined at the upper bound");
    return curve_.cdf(x) - 1.0;
  }

  // E[m | m <= x]; an atom at x counts as below. E[m | m > x] is strict.
  double conditional_mean_below(double x) const {
    const double mass = curve_.cdf(x);
    if (mass <= 0.0)
      throw UndefinedConditionalError("conditional mean below a zero-mass event");
    return curve_.moment_below(x) / mass;
  }
  double conditional_mean_above(double x) const {
    const double mass = 1.0 - curve_.cdf(x);
    if (mass <= 0.0)
      throw UndefinedConditionalError("conditional mean above a zero-mass event");
    return (curve_.mean() - curve_.moment_below(x)) / mass;
  }

  const detail::CdfCurve& curve() const { return curve_; }

 protected:
  Distribution() = default;
  explicit Distribution(detail::CdfCurve c) : curve_(std::move(c)) {}

  void require_in_domain(double x) const {
    if (!(x >= lo() && x <= hi()))
      throw DomainError("argument outside the distribution domain");
  }

  detail::CdfCurve curve_;
};

// An atomless piecewise-linear CDF over qualities. The environment prior must
// be strictly increasing over its whole domain (full support); interim beliefs
// induced by a public signal may have flat stretches, hence Support::any.
class Prior : public Distribution {
 public:
  enum class Support { full, any };

  explicit Prior(std::vector<std::pair<double, double>> knots,
                 Support req = Support::full) {
    if (knots.size() < 2) throw ModelError("prior needs at least two knots");
    std::sort(knots.begin(), knots.end());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      if (knots[i + 1].first <= knots[i].first)
        throw ModelError("prior knots must be strictly increasing");
    if (std::abs(knots.front().second) > 1e-12)
      throw ModelError("prior cdf must start at 0");
    if (std::abs(knots.back().second - 1.0) > 1e-9)
      throw ModelError("prior cdf must end at 1");
    knots.front().second = 0.0;
    knots.back().second = 1.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      if (knots[i + 1].second < knots[i].second)
        throw ModelError("prior cdf must be nondecreasing");
      if (req == Support::full && knots[i + 1].second <= knots[i].second)
        throw ModelError("prior must be strictly increasing (full support)");
    }
    if (!(knots.back().first > 0.0))
      throw ModelError("prior upper bound must be positive");

    curve_ = detail::CdfCurve::build(knots.front().first, knots.back().first,
                                     knots, {});
    full_support_ = true;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      if (knots[i + 1].second <= knots[i].second) full_support_ = false;
    support_lo_ = knots.front().first;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      if (knots[i].second == 0.0) support_lo_ = knots[i].first;
    support_hi_ = knots.back().first;
    for (std::size_t i = knots.size(); i-- > 0;)
      if (knots[i].second == 1.0) support_hi_ = knots[i].first;
  }

  static Prior uniform(double lo, double hi) {
    return Prior({{lo, 0.0}, {hi, 1.0}});
  }

  // Density linear from density_lo at lo to density_hi at hi (both >= 0,
  // normalized internally); the quadratic cdf is projected onto `knots`
  // equispaced knots and the sup-norm projection error is recorded.
  static Prior linear_density(double lo, double hi, double density_lo,
                              double density_hi, int knots = 1024) {
    if (density_lo < 0.0 || density_hi < 0.0 || density_lo + density_hi <= 0.0)
      throw ModelError("linear density must be nonnegative and not identically 0");
    if (knots < 2) throw ModelError("projection grid needs at least two knots");
    const double total = 0.5 * (density_lo + density_hi) * (hi - lo);
    auto exact_cdf = [&](double x) {
      const double u = (x - lo) / (hi - lo);
      return (density_lo * u + 0.5 * (density_hi - density_lo) * u * u) * (hi - lo) / total;
    };
    std::vector<std::pair<double, double>> ks(static_cast<std::size_t>(knots));
    for (int i = 0; i < knots; ++i) {
      const double x = lo + (hi - lo) * i / (knots - 1);
      ks[static_cast<std::size_t>(i)] = {x, exact_cdf(x)};
    }
    ks.front().second = 0.0;
    ks.back().second = 1.0;
    const bool degenerate_end = density_lo == 0.0 || density_hi == 0.0;
    Prior p(std::move(ks), degenerate_end ? Support::any : Support::full);
    double err = 0.0;
    for (int i = 0; i + 1 < knots; ++i) {
      const double mid = lo + (hi - lo) * (i + 0.5) / (knots - 1);
      err = std::max(err, std::abs(p.cdf(mid) - exact_cdf(mid)));
    }
    p.projection_error_ = err;
    return p;
  }

  bool full_support() const { return full_support_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }
  double projection_error() const { return projection_error_; }

  std::vector<std::pair<double, double>> knots() const {
    std::vector<std::pair<double, double>> out;
    out.reserve(curve_.breakpoints().size());
    for (std::size_t i = 0; i < curve_.breakpoints().size(); ++i)
      out.push_back({curve_.breakpoints()[i], curve_.values()[i]});
    return out;
  }

 private:
  bool full_support_ = false;
  double support_lo_ = 0.0, support_hi_ = 0.0;
  double projection_error_ = 0.0;
};

// A distribution of posterior means: point masses plus a piecewise-linear
// continuous part, living on the domain of a reference prior and preserving
// its mean. Only the reference facts the invariants use are retained.
class PmDist : public Distribution {
 public:
  PmDist(const Prior& reference, std::vector<Atom> atoms,
         std::vector<std::pair<double, double>> continuous = {})
      : atoms_(std::move(atoms)), cont_(std::move(continuous)) {
    ref_lo_ = reference.lo();
    ref_hi_ = reference.hi();
    ref_mean_ = reference.mean();

    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    std::vector<std::pair<double, double>> pts;
    pts.reserve(atoms_.size());
    for (const Atom& a : atoms_) {
      if (!(a.mass >= 0.0)) throw ModelError("atom mass must be nonnegative");
      if (a.location < ref_lo_ - 1e-12 || a.location > ref_hi_ + 1e-12)
        throw ModelError("atom location outside the prior domain");
      pts.push_back({a.location, a.mass});
    }
    curve_ = detail::CdfCurve::build(ref_lo_, ref_hi_, cont_, pts);

    if (std::abs(curve_.total_mass() - 1.0) > 1e-9)
      throw ModelError("posterior-mean distribution must have total mass 1");
    const double scale = std::max(1.0, ref_hi_ - ref_lo_);
    if (std::abs(curve_.mean() - ref_mean_) > 1e-8 * scale)
      throw ModelError("posterior-mean distribution must preserve the prior mean");
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<std::pair<double, double>>& continuous_knots() const {
    return cont_;
  }
  double reference_mean() const { return ref_mean_; }

 private:
  std::vector<Atom> atoms_;
  std::vector<std::pair<double, double>> cont_;
  double ref_lo_ = 0.0, ref_hi_ = 0.0, ref_mean_ = 0.0;
};

// Degenerate distribution at the prior mean (an uninformative signal).
inline PmDist uninformative(const Prior& f) {
  return PmDist(f, {{f.mean(), 1.0}});
}

// The prior itself, re-expressed as a posterior-mean distribution.
inline PmDist full_info(const Prior& f) { return PmDist(f, {}, f.knots()); }

// Pool qualities at or below x into one posterior mean and those above into
// another. The cutoff must be strictly inside the support.
inline PmDist binary_split(const Prior& f, double x) {
  if (!(x > f.support_lo() && x < f.support_hi()))
    throw DomainError("binary split cutoff must lie strictly inside the support");
  const double mass_below = f.cdf(x);
  return PmDist(f, {{f.conditional_mean_below(x), mass_below},
                    {f.conditional_mean_above(x), 1.0 - mass_below}});
}

// Pool qualities at or below x, reveal everything above exactly.
inline PmDist lower_censorship(const Prior& f, double x) {
  if (!(x > f.support_lo() && x < f.support_hi()))
    throw DomainError("censorship cutoff must lie strictly inside the support");
  const double fx = f.cdf(x);
  std::vector<std::pair<double, double>> tail;
  tail.push_back({x, 0.0});
  for (const auto& [kx, kv] : f.knots())
    if (kx > x) tail.push_back({kx, kv - fx});
  tail.back().second = 1.0 - fx;
  return PmDist(f, {{f.conditional_mean_below(x), fx}}, std::move(tail));
}

struct MpcReport {
  bool is_contraction = false;
  double max_violation = 0.0;  // largest c_g - c_h over the grid
  double violation_at = std::numeric_limits<double>::quiet_NaN();
  double mean_gap = 0.0;       // c_g(lo) - c_h(lo), i.e. the mean mismatch
  explicit operator bool() const { return is_contraction; }
};

// Is g a mean-preserving contraction of h? Checked on the union of both knot
// sets plus 256 equispaced refinement points; the c-functions of piecewise-
// linear CDFs are piecewise quadratic, so this grid pins the violation down.
inline MpcReport is_mpc(const Distribution& g, const Distribution& h,
                        double tol = 1e-9) {
  const double lo = std::min(g.lo(), h.lo());
  const double hi = std::max(g.hi(), h.hi());
  std::vector<double> grid;
  grid.reserve(g.curve().breakpoints().size() + h.curve().breakpoints().size() + 257);
  grid.insert(grid.end(), g.curve().breakpoints().begin(), g.curve().breakpoints().end());
  grid.insert(grid.end(), h.curve().breakpoints().begin(), h.curve().breakpoints().end());
  for (int i = 0; i <= 256; ++i) grid.push_back(lo + (hi - lo) * i / 256.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  MpcReport rep;
  rep.mean_gap = g.curve().survival_integral(lo) - h.curve().survival_integral(lo);
  for (double x : grid) {
    const double gap = g.curve().survival_integral(x) - h.curve().survival_integral(x);
    if (gap > rep.max_violation) {
      rep.max_violation = gap;
      rep.violation_at = x;
    }
  }
  rep.is_contraction = rep.max_violation <= tol && std::abs(rep.mean_gap) <= tol;
  return rep;
}

}  // namespace psearch
