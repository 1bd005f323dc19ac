#pragma once

#include <array>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "psearch/dist.hpp"
#include "psearch/search.hpp"

namespace testsupport {

// Random full-support piecewise-linear prior with bounded density ratios, so
// grid-based oracles stay well behaved.
inline psearch::Prior random_prior(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double lo = -0.5 + 0.8 * U(rng);
  const double hi = std::max(lo + 0.5 + 1.5 * U(rng), 0.05);
  const int n = 4 + static_cast<int>(U(rng) * 7.0);
  std::vector<double> xg(static_cast<std::size_t>(n)), vg(static_cast<std::size_t>(n));
  xg[0] = 0.0;
  vg[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    xg[static_cast<std::size_t>(i)] = xg[static_cast<std::size_t>(i - 1)] + 0.35 + 0.65 * U(rng);
    vg[static_cast<std::size_t>(i)] = vg[static_cast<std::size_t>(i - 1)] + 0.35 + 0.65 * U(rng);
  }
  std::vector<std::pair<double, double>> knots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    knots[static_cast<std::size_t>(i)] = {
        lo + (hi - lo) * xg[static_cast<std::size_t>(i)] / xg[static_cast<std::size_t>(n - 1)],
        vg[static_cast<std::size_t>(i)] / vg[static_cast<std::size_t>(n - 1)]};
  knots.front() = {lo, 0.0};
  knots.back() = {hi, 1.0};
  return psearch::Prior(std::move(knots));
}

inline psearch::Environment random_environment(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int attempt = 0; attempt < 500; ++attempt) {
    psearch::Prior f = random_prior(rng);
    const double delta = 0.4 + 0.5 * U(rng);
    psearch::Environment env(std::move(f), delta);
    if (!env.never_searches()) return env;
  }
  throw std::runtime_error("could not draw a searchable environment");
}

inline double polyline_at(const std::vector<std::pair<double, double>>& k, double x) {
  if (k.empty()) return 0.0;
  if (x <= k.front().first) return k.front().second;
  if (x >= k.back().first) return k.back().second;
  std::size_t i = 1;
  while (k[i].first < x) ++i;
  const auto& a = k[i - 1];
  const auto& b = k[i];
  return a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
}

// Convex mixture of posterior-mean distributions over the same prior. c_G is
// linear in the CDF, so a mixture of contractions is again a contraction.
inline psearch::PmDist mix(const psearch::Prior& ref,
                           const std::vector<std::pair<double, const psearch::PmDist*>>& parts) {
  std::vector<psearch::Atom> atoms;
  std::vector<double> xs;
  for (const auto& [w, part] : parts) {
    for (const psearch::Atom& a : part->atoms()) atoms.push_back({a.location, w * a.mass});
    for (const auto& [x, v] : part->continuous_knots()) {
      (void)v;
      xs.push_back(x);
    }
  }
  std::vector<std::pair<double, double>> cont;
  if (!xs.empty()) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
      double v = 0.0;
      for (const auto& [w, part] : parts) v += w * polyline_at(part->continuous_knots(), x);
      cont.push_back({x, v});
    }
    cont.front().second = 0.0;
  }
  return psearch::PmDist(ref, std::move(atoms), std::move(cont));
}

// Random mean-preserving contraction of f: a convex mixture of the degenerate
// distribution, a binary split, a lower censorship and full information.
inline psearch::PmDist random_mpc(const psearch::Prior& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double slo = f.support_lo(), shi = f.support_hi();
  auto cut = [&] { return slo + (0.15 + 0.7 * U(rng)) * (shi - slo); };
  std::array<double, 4> w{};
  double total = 0.0;
  for (double& x : w) {
    x = 0.05 + U(rng);
    total += x;
  }
  for (double& x : w) x /= total;
  const psearch::PmDist parts[4] = {psearch::uninformative(f),
                                    psearch::binary_split(f, cut()),
                                    psearch::lower_censorship(f, cut()),
                                    psearch::full_info(f)};
  return mix(f, {{w[0], &parts[0]}, {w[1], &parts[1]}, {w[2], &parts[2]}, {w[3], &parts[3]}});
}

// Cell-midpoint integration of (1 - cdf) from x to hi. The cdf is linear on
// every open cell between breakpoints, where the midpoint rule is exact, so
// this recomputes the incremental benefit through a different route than the
// library's suffix accumulations.
inline double quadrature_benefit(const psearch::Distribution& d, double x) {
  const auto& bp = d.curve().breakpoints();
  std::vector<double> cells{x};
  for (double b : bp)
    if (b > x) cells.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const double a = cells[i], b = cells[i + 1];
    total += (b - a) * (1.0 - d.cdf(0.5 * (a + b)));
  }
  return total;
}

}  // namespace testsupport
