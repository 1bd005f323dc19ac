#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "psearch/errors.hpp"

namespace psearch::detail {

// Breakpoint form of a right-continuous CDF with point masses and a
// piecewise-linear continuous part on [lo, hi].
//
//   value(i) = cdf(x(i)), any jump at x(i) included;
//   the cdf is linear on [x(i), x(i+1)) from value(i) to value(i+1)-jump(i+1).
//
// Prefix first moments and suffix survival integrals are precomputed, so
// means, conditional means, quantiles and integrals of (1 - cdf) all evaluate
// in O(log n) from per-segment closed forms. Everything is immutable after
// build().
class CdfCurve {
 public:
  CdfCurve() = default;

  // cont: knots of the continuous part as (x, cumulative mass), value at the
  // first knot must be 0. atoms: (location, mass) pairs, any order; zero
  // masses are dropped and duplicate locations merged.
  static CdfCurve build(double lo, double hi,
                        std::vector<std::pair<double, double>> cont,
                        std::vector<std::pair<double, double>> atoms);

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  double total_mass() const { return v_.back(); }
  double mean() const { return m_.back(); }

  // Right-continuous cdf, extended by 0 below lo and total_mass above hi.
  double cdf(double x) const;

  // First moment of the restriction to (-inf, x]; an atom at x is included.
  double moment_below(double x) const;

  // Integral of (1 - cdf) from x up to hi; 0 beyond hi and extended with
  // slope -1 below lo (where the cdf vanishes).
  double survival_integral(double x) const;

  // Integral of the extended cdf over [a, b].
  double cdf_integral(double a, double b) const;

  // Smallest x with cdf(x) >= p, for p in [0, total_mass].
  double quantile(double p) const;

  const std::vector<double>& breakpoints() const { return x_; }
  const std::vector<double>& values() const { return v_; }
  double jump_at(std::size_t i) const { return j_[i]; }
  bool has_atom_in(double a, double b) const;  // any atom located in (a, b]

 private:
  // Largest i with x_[i] <= x; requires lo <= x <= hi.
  std::size_t segment(double x) const;

  std::vector<double> x_, v_, j_, m_, t_;
};

inline CdfCurve CdfCurve::build(double lo, double hi,
                                std::vector<std::pair<double, double>> cont,
                                std::vector<std::pair<double, double>> atoms) {
  if (!(lo < hi)) throw ModelError("distribution domain requires lo < hi");
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ModelError("distribution domain must be finite");

  std::sort(cont.begin(), cont.end());
  if (!cont.empty()) {
    if (std::abs(cont.front().second) > 1e-15)
      throw ModelError("continuous part must start at cumulative mass 0");
    cont.front().second = 0.0;
    for (std::size_t i = 0; i + 1 < cont.size(); ++i) {
      if (cont[i + 1].first <= cont[i].first)
        throw ModelError("continuous knots must be strictly increasing");
      if (cont[i + 1].second < cont[i].second - 1e-15)
        throw ModelError("continuous cumulative mass must be nondecreasing");
    }
    if (cont.front().first < lo - 1e-12 || cont.back().first > hi + 1e-12)
      throw ModelError("continuous knots must lie within the domain");
  }

  std::sort(atoms.begin(), atoms.end());
  {
    std::vector<std::pair<double, double>> merged;
    for (const auto& [loc, mass] : atoms) {
      if (mass < 0.0) throw ModelError("atom mass must be nonnegative");
      if (mass == 0.0) continue;
      if (loc < lo - 1e-12 || loc > hi + 1e-12)
        throw ModelError("atom location outside the domain");
      if (!merged.empty() && merged.back().first == loc)
        merged.back().second += mass;
      else
        merged.push_back({loc, mass});
    }
    atoms.swap(merged);
  }

  std::vector<double> xs;
  xs.reserve(cont.size() + atoms.size() + 2);
  xs.push_back(lo);
  xs.push_back(hi);
  for (const auto& k : cont) xs.push_back(std::clamp(k.first, lo, hi));
  for (const auto& a : atoms) xs.push_back(std::clamp(a.first, lo, hi));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  auto cont_at = [&cont](double x) -> double {
    if (cont.empty()) return 0.0;
    if (x <= cont.front().first) return 0.0;
    if (x >= cont.back().first) return cont.back().second;
    auto it = std::upper_bound(cont.begin(), cont.end(),
                               std::make_pair(x, std::numeric_limits<double>::infinity()));
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
  };

  CdfCurve c;
  const std::size_t n = xs.size();
  c.x_ = std::move(xs);
  c.v_.resize(n);
  c.j_.assign(n, 0.0);
  c.m_.resize(n);
  c.t_.resize(n);

  std::size_t ai = 0;
  double atom_cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    while (ai < atoms.size() && atoms[ai].first <= c.x_[i]) {
      atom_cum += atoms[ai].second;
      if (atoms[ai].first == c.x_[i]) c.j_[i] = atoms[ai].second;
      ++ai;
    }
    c.v_[i] = cont_at(c.x_[i]) + atom_cum;
    if (i > 0 && c.v_[i] < c.v_[i - 1]) c.v_[i] = c.v_[i - 1];  // 1-ulp guard
  }

  c.m_[0] = c.x_[0] * c.j_[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double seg_mass = (c.v_[i + 1] - c.j_[i + 1]) - c.v_[i];
    c.m_[i + 1] = c.m_[i] + std::max(seg_mass, 0.0) * 0.5 * (c.x_[i] + c.x_[i + 1]) +
                  c.j_[i + 1] * c.x_[i + 1];
  }

  c.t_[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double left_limit = c.v_[i + 1] - c.j_[i + 1];
    const double dx = c.x_[i + 1] - c.x_[i];
    c.t_[i] = c.t_[i + 1] + dx * (1.0 - 0.5 * (c.v_[i] + left_limit));
  }
  return c;
}

inline std::size_t CdfCurve::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  return i == 0 ? 0 : i - 1;
}

inline double CdfCurve::cdf(double x) const {
  if (x < x_.front()) return 0.0;
  if (x >= x_.back()) return v_.back();
  const std::size_t i = segment(x);
  if (x == x_[i]) return v_[i];
  const double left_limit = v_[i + 1] - j_[i + 1];
  const double w = (x - x_[i]) / (x_[i + 1] - x_[i]);
  return v_[i] + (left_limit - v_[i]) * w;
}

inline double CdfCurve::moment_below(double x) const {
  if (x < x_.front()) return 0.0;
  if (x >= x_.back()) return m_.back();
  const std::size_t i = segment(x);
  if (x == x_[i]) return m_[i];
  const double left_limit = v_[i + 1] - j_[i + 1];
  const double rho = (left_limit - v_[i]) / (x_[i + 1] - x_[i]);
  return m_[i] + rho * (x - x_[i]) * 0.5 * (x + x_[i]);
}

inline double CdfCurve::survival_integral(double x) const {
  if (x >= x_.back()) return 0.0;
  if (x < x_.front()) return t_.front() + (x_.front() - x);
  const std::size_t i = segment(x);
  if (x == x_[i]) return t_[i];
  const double left_limit = v_[i + 1] - j_[i + 1];
  const double dx = x_[i + 1] - x_[i];
  const double rho = (left_limit - v_[i]) / dx;
  const double a = x - x_[i];
  return t_[i + 1] + (x_[i + 1] - x) * (1.0 - v_[i]) - rho * 0.5 * (dx * dx - a * a);
}

inline double CdfCurve::cdf_integral(double a, double b) const {
  if (!(a <= b)) throw DomainError("cdf_integral requires a <= b");
  return (b - a) - (survival_integral(a) - survival_integral(b));
}

inline double CdfCurve::quantile(double p) const {
  if (p < 0.0 || p > v_.back())
    throw DomainError("quantile level outside [0, total mass]");
  auto it = std::lower_bound(v_.begin(), v_.end(), p);
  std::size_t i = static_cast<std::size_t>(it - v_.begin());
  if (i == 0) return x_.front();
  // Mass on [x_{i-1}, x_i) rises continuously to v_i - j_i, then jumps.
  const double left_limit = v_[i] - j_[i];
  if (p > left_limit) return x_[i];
  const double rise = left_limit - v_[i - 1];
  if (rise <= 0.0) return x_[i - 1];
  const double w = (p - v_[i - 1]) / rise;
  return x_[i - 1] + w * (x_[i] - x_[i - 1]);
}

inline bool CdfCurve::has_atom_in(double a, double b) const {
  for (std::size_t i = 0; i < x_.size(); ++i)
    if (j_[i] > 0.0 && x_[i] > a && x_[i] <= b) return true;
  return false;
}

}  // namespace psearch::detail
