#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "psearch/dist.hpp"
#include "psearch/equilibrium.hpp"
#include "psearch/errors.hpp"
#include "psearch/public_signals.hpp"
#include "psearch/search.hpp"

namespace psearch {

struct RunConfig {
  RunConfig(Prior p, double d) : prior(std::move(p)), delta(d) {}

  Prior prior;
  double delta;
  std::optional<PublicSignalModel> public_signal;
  double root_tol = 1e-13;
  int oracle_grid = 4096;
  double mpc_tol = 1e-9;
  bool has_simulation = false;
  long sim_episodes = 0;
  std::uint64_t sim_seed = 0;
  std::string output_dir = ".";

  Environment environment() const { return Environment(prior, delta); }
};

namespace detail {

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

// Unknown keys are rejected so typos never silently change a run.
inline void expect_keys(const nlohmann::json& obj,
                        std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
  }
}

inline double get_number(const nlohmann::json& obj, const char* key,
                         const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError("missing key \"" + std::string(key) + "\" in " + where);
  if (!obj.at(key).is_number())
    throw ConfigError("\"" + std::string(key) + "\" must be a number in " + where);
  return obj.at(key).get<double>();
}

inline std::vector<std::pair<double, double>> get_pairs(const nlohmann::json& arr,
                                                        const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where + " must be an array of [x, y] pairs");
  std::vector<std::pair<double, double>> out;
  out.reserve(arr.size());
  for (const auto& el : arr) {
    if (!el.is_array() || el.size() != 2 || !el[0].is_number() || !el[1].is_number())
      throw ConfigError(where + " entries must be [number, number] pairs");
    out.push_back({el[0].get<double>(), el[1].get<double>()});
  }
  return out;
}

}  // namespace detail

// Atomless distribution literal:
//   {"kind":"uniform","lo":..,"hi":..}
//   {"kind":"pwl","knots":[[x,F(x)],...]}
//   {"kind":"linear","lo":..,"hi":..,"density_lo":..,"density_hi":..}
inline Prior parse_prior(const nlohmann::json& j, Prior::Support req,
                         const std::string& where) {
  using detail::expect_keys;
  using detail::get_number;
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(where + " must be a distribution literal with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "uniform") {
      expect_keys(j, {"kind", "lo", "hi"}, where);
      return Prior::uniform(get_number(j, "lo", where), get_number(j, "hi", where));
    }
    if (kind == "pwl") {
      expect_keys(j, {"kind", "knots"}, where);
      if (!j.contains("knots")) throw ConfigError("missing \"knots\" in " + where);
      return Prior(detail::get_pairs(j.at("knots"), where + ".knots"), req);
    }
    if (kind == "linear") {
      expect_keys(j, {"kind", "lo", "hi", "density_lo", "density_hi"}, where);
      return Prior::linear_density(get_number(j, "lo", where), get_number(j, "hi", where),
                                   get_number(j, "density_lo", where),
                                   get_number(j, "density_hi", where));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError("unknown distribution kind \"" + kind + "\" in " + where);
}

// Posterior-mean distribution literal: any atomless literal above, or
//   {"kind":"mixed","atoms":[[loc,mass],...],"pwl":[[x,C(x)],...]}
// where C is the cumulative mass of the continuous part.
inline PmDist parse_pm_dist(const nlohmann::json& j, const Prior& reference,
                            const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(where + " must be a distribution literal with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "mixed") {
      detail::expect_keys(j, {"kind", "atoms", "pwl"}, where);
      std::vector<Atom> atoms;
      if (j.contains("atoms"))
        for (const auto& [loc, mass] : detail::get_pairs(j.at("atoms"), where + ".atoms"))
          atoms.push_back({loc, mass});
      std::vector<std::pair<double, double>> cont;
      if (j.contains("pwl")) cont = detail::get_pairs(j.at("pwl"), where + ".pwl");
      return PmDist(reference, std::move(atoms), std::move(cont));
    }
    const Prior as_prior = parse_prior(j, Prior::Support::any, where);
    return PmDist(reference, {}, as_prior.knots());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline RunConfig load_config(const std::filesystem::path& path) {
  using detail::expect_keys;
  using detail::get_number;
  const nlohmann::json j = detail::load_json(path);
  expect_keys(j, {"environment", "public_signal", "solver", "simulation", "output_dir"},
              "config");
  if (!j.contains("environment")) throw ConfigError("config needs an \"environment\"");
  const auto& je = j.at("environment");
  expect_keys(je, {"distribution", "delta"}, "environment");
  if (!je.contains("distribution"))
    throw ConfigError("environment needs a \"distribution\"");
  const double delta = get_number(je, "delta", "environment");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("environment.delta must lie strictly inside (0,1)");

  RunConfig cfg(parse_prior(je.at("distribution"), Prior::Support::full,
                            "environment.distribution"),
                delta);

  if (j.contains("solver")) {
    const auto& js = j.at("solver");
    expect_keys(js, {"root_tol", "oracle_grid", "mpc_tol"}, "solver");
    if (js.contains("root_tol")) cfg.root_tol = get_number(js, "root_tol", "solver");
    if (js.contains("mpc_tol")) cfg.mpc_tol = get_number(js, "mpc_tol", "solver");
    if (js.contains("oracle_grid")) {
      cfg.oracle_grid = static_cast<int>(get_number(js, "oracle_grid", "solver"));
      if (cfg.oracle_grid < 2) throw ConfigError("solver.oracle_grid must be at least 2");
    }
    if (!(cfg.root_tol > 0.0) || !(cfg.mpc_tol > 0.0))
      throw ConfigError("solver tolerances must be positive");
  }

  if (j.contains("simulation")) {
    const auto& js = j.at("simulation");
    expect_keys(js, {"n", "seed"}, "simulation");
    cfg.has_simulation = true;
    cfg.sim_episodes = static_cast<long>(get_number(js, "n", "simulation"));
    if (cfg.sim_episodes < 1) throw ConfigError("simulation.n must be at least 1");
    if (js.contains("seed")) {
      const double s = get_number(js, "seed", "simulation");
      if (s < 0) throw ConfigError("simulation.seed must be nonnegative");
      cfg.sim_seed = static_cast<std::uint64_t>(s);
    }
  }

  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string())
      throw ConfigError("output_dir must be a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }

  if (j.contains("public_signal")) {
    const auto& jp = j.at("public_signal");
    expect_keys(jp, {"outcomes"}, "public_signal");
    if (!jp.contains("outcomes") || !jp.at("outcomes").is_array())
      throw ConfigError("public_signal needs an \"outcomes\" array");
    std::vector<PublicOutcome> outcomes;
    for (const auto& jo : jp.at("outcomes")) {
      expect_keys(jo, {"label", "weight", "interim"}, "public_signal outcome");
      if (!jo.contains("label") || !jo.at("label").is_string())
        throw ConfigError("public_signal outcome needs a string \"label\"");
      if (!jo.contains("interim"))
        throw ConfigError("public_signal outcome needs an \"interim\" distribution");
      outcomes.push_back(
          {jo.at("label").get<std::string>(),
           get_number(jo, "weight", "public_signal outcome"),
           parse_prior(jo.at("interim"), Prior::Support::any, "interim")});
    }
    // Consistency failures here (weights, mixing back to the prior) are
    // substantive model violations, not schema problems; they propagate as
    // ModelError.
    cfg.public_signal.emplace(cfg.prior, std::move(outcomes));
  }

  return cfg;
}

// Contract file: {"price": number, "dist": <distribution literal>}.
inline Contract load_contract(const std::filesystem::path& path,
                              const Environment& env, double mpc_tol = 1e-9) {
  const nlohmann::json j = detail::load_json(path);
  detail::expect_keys(j, {"price", "dist"}, "contract");
  if (!j.contains("dist")) throw ConfigError("contract needs a \"dist\"");
  const double price = detail::get_number(j, "price", "contract");
  if (!(price >= 0.0)) throw ConfigError("contract price must be nonnegative");
  return make_contract(env, price, parse_pm_dist(j.at("dist"), env.prior(), "contract.dist"),
                       mpc_tol);
}

}  // namespace psearch
