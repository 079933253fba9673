#pragma once

/// \file
/// Experiment configuration: JSON schema "ttb.experiment/1".
///
/// {
///   "schema": "ttb.experiment/1",
///   "seed": 42, "trials": 100000, "alpha": 0.001,
///   "theta_grid": {"kind": "quantile", "points": 16, "p_lo": 0.001, "p_hi": 0.5},
///   "output": {"dir": "ttb-out"},
///   "overrides": {"sigma_sq_scale": 1.0, "mu_scale": 1.0},
///   "theorems": [...],            // optional, applied to every ensemble
///   "ensembles": [{"name": ..., "kind": ..., "coefficients": [...], "T": ...,
///                  "n": ..., "dims": [...], "profile": ..., "adaptivity": ...,
///                  "seed": ..., "theorems": [...], "theta_grid": {...}}]
/// }
///
/// A coefficient is an inline tensor ({"row_dims", "col_dims", "entries"}),
/// a file reference {"ref": "path"} resolved against the config directory, or
/// a generator: {"identity": [dims]}, {"ones": {"row_dims", "col_dims"}},
/// {"random_hermitian": {"dims", "seed", "norm"}}, {"random": {"row_dims",
/// "col_dims", "seed", "scale"}}.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ttb/bounds.hpp"
#include "ttb/ensembles.hpp"
#include "ttb/error.hpp"
#include "ttb/montecarlo.hpp"
#include "ttb/random_tensors.hpp"
#include "ttb/serialize.hpp"

namespace ttb {

inline constexpr const char* kConfigSchema = "ttb.experiment/1";

struct EnsembleEntry {
  EnsembleSpec spec;
  std::vector<Theorem> theorems;
  std::optional<ThetaGrid> theta_grid;
  std::optional<std::size_t> trials;
  json echo;  // the ensemble object as written in the config
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 100000;
  double alpha = 1e-3;
  ThetaGrid theta_grid;
  std::filesystem::path output_dir = "ttb-out";
  double sigma_sq_scale = 1.0;
  double mu_scale = 1.0;
  std::vector<EnsembleEntry> ensembles;
  std::string hash;  // FNV-1a 64 of the canonical JSON, hex
  json source;
};

/// FNV-1a 64-bit.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

inline Dims dims_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(where + ": '" + key + "' must be an array of positive integers");
  Dims d;
  for (const json& v : j.at(key)) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      throw ConfigError(where + ": '" + key + "' must hold positive integers");
    d.push_back(v.get<std::size_t>());
  }
  return d;
}

inline DenseTensor coefficient_from_json(const json& c, const std::filesystem::path& base,
                                         const std::string& where) {
  if (!c.is_object()) throw ConfigError(where + ": coefficient must be an object");
  if (c.contains("ref")) {
    std::filesystem::path p = c.at("ref").get<std::string>();
    if (p.is_relative()) p = base / p;
    return load_tensor(p);
  }
  if (c.contains("identity")) {
    json wrap = {{"dims", c.at("identity")}};
    return identity(dims_field(wrap, "dims", where));
  }
  if (c.contains("ones")) {
    const json& o = c.at("ones");
    return ones(Shape(dims_field(o, "row_dims", where), dims_field(o, "col_dims", where)));
  }
  if (c.contains("random_hermitian")) {
    const json& o = c.at("random_hermitian");
    RngStream rng(get_or<std::uint64_t>(o, "seed", 0, where), 0);
    return random_hermitian(dims_field(o, "dims", where), rng, get_or<double>(o, "norm", -1.0, where))
        .base();
  }
  if (c.contains("random")) {
    const json& o = c.at("random");
    RngStream rng(get_or<std::uint64_t>(o, "seed", 0, where), 0);
    const DenseTensor t =
        random_tensor(Shape(dims_field(o, "row_dims", where), dims_field(o, "col_dims", where)), rng);
    return scale(t, complex(get_or<double>(o, "scale", 1.0, where), 0.0));
  }
  return tensor_from_json(c);
}

inline ThetaGrid theta_grid_from_json(const json& g, const std::string& where) {
  if (!g.is_object()) throw ConfigError(where + ": theta_grid must be an object");
  ThetaGrid out;
  const std::string kind = get_or<std::string>(g, "kind", "quantile", where);
  if (kind == "quantile") {
    out.kind = ThetaGrid::Kind::quantile;
  } else if (kind == "explicit") {
    out.kind = ThetaGrid::Kind::explicit_values;
    if (!g.contains("values") || !g.at("values").is_array() || g.at("values").empty())
      throw ConfigError(where + ": explicit theta_grid needs a nonempty 'values' array");
    for (const json& v : g.at("values")) {
      if (!v.is_number()) throw ConfigError(where + ": theta values must be numbers");
      out.values.push_back(v.get<double>());
    }
  } else if (kind == "linear" || kind == "log") {
    out.kind = kind == "linear" ? ThetaGrid::Kind::linear : ThetaGrid::Kind::log;
    if (!g.contains("lo") || !g.contains("hi"))
      throw ConfigError(where + ": " + kind + " theta_grid needs 'lo' and 'hi'");
    out.lo = get_or<double>(g, "lo", 0.0, where);
    out.hi = get_or<double>(g, "hi", 0.0, where);
  } else {
    throw ConfigError(where + ": unknown theta_grid kind '" + kind + "'");
  }
  out.points = get_or<std::size_t>(g, "points", out.points, where);
  out.p_lo = get_or<double>(g, "p_lo", out.p_lo, where);
  out.p_hi = get_or<double>(g, "p_hi", out.p_hi, where);
  if (out.points < 1) throw ConfigError(where + ": theta_grid points must be >= 1");
  return out;
}

inline std::vector<Theorem> theorems_from_json(const json& list, const std::string& where) {
  if (!list.is_array()) throw ConfigError(where + ": 'theorems' must be an array of tags");
  std::vector<Theorem> out;
  for (const json& t : list) {
    if (!t.is_string()) throw ConfigError(where + ": theorem tags must be strings");
    const auto th = parse_theorem(t.get<std::string>());
    if (!th) throw ConfigError(where + ": unknown theorem tag '" + t.get<std::string>() + "'");
    out.push_back(*th);
  }
  return out;
}

inline EnsembleEntry ensemble_from_json(const json& e, std::size_t index,
                                        const std::filesystem::path& base) {
  std::string where = "ensembles[" + std::to_string(index) + "]";
  if (!e.is_object()) throw ConfigError(where + " must be an object");
  EnsembleEntry out;
  out.echo = e;
  EnsembleSpec& s = out.spec;
  s.name = get_or<std::string>(e, "name", "ensemble" + std::to_string(index), where);
  where += " (" + s.name + ")";
  if (!e.contains("kind")) throw ConfigError(where + ": missing 'kind'");
  const auto kind = parse_ensemble_kind(get_or<std::string>(e, "kind", "", where));
  if (!kind) throw ConfigError(where + ": unknown ensemble kind " + e.at("kind").dump());
  s.kind = *kind;
  s.T = get_or<double>(e, "T", 1.0, where);
  s.n = get_or<std::size_t>(e, "n", 0, where);
  if (e.contains("dims")) s.dims = dims_field(e, "dims", where);
  s.profile = get_or<std::string>(e, "profile", s.profile, where);
  if (e.contains("beta")) {
    const json& b = e.at("beta");
    if (!b.is_array() || b.size() != 2) throw ConfigError(where + ": 'beta' must be [a, b]");
    s.beta_a = b[0].get<double>();
    s.beta_b = b[1].get<double>();
  }
  if (e.contains("adaptivity")) {
    const json& a = e.at("adaptivity");
    if (a.is_boolean()) {
      s.adaptive = a.get<bool>();
    } else if (a.is_string() && (a == "adaptive" || a == "none")) {
      s.adaptive = a == "adaptive";
    } else {
      throw ConfigError(where + ": 'adaptivity' must be true/false, \"adaptive\" or \"none\"");
    }
  }
  s.subexp_scale = get_or<double>(e, "subexp_scale", s.subexp_scale, where);
  s.subexp_cap = get_or<double>(e, "subexp_cap", s.subexp_cap, where);
  if (e.contains("seed")) s.seed = get_or<std::uint64_t>(e, "seed", 0, where);
  if (e.contains("coefficients")) {
    const json& cs = e.at("coefficients");
    if (!cs.is_array()) throw ConfigError(where + ": 'coefficients' must be an array");
    for (std::size_t k = 0; k < cs.size(); ++k)
      s.coefficients.push_back(
          coefficient_from_json(cs[k], base, where + ".coefficients[" + std::to_string(k) + "]"));
  }
  if (e.contains("theorems")) out.theorems = theorems_from_json(e.at("theorems"), where);
  if (e.contains("theta_grid")) out.theta_grid = theta_grid_from_json(e.at("theta_grid"), where);
  if (e.contains("trials")) out.trials = get_or<std::size_t>(e, "trials", 0, where);
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base = ".") {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::string schema = detail::get_or<std::string>(j, "schema", "", "config");
  if (schema != kConfigSchema)
    throw ConfigError("config schema must be \"" + std::string(kConfigSchema) + "\", got \"" +
                      schema + "\"");
  ExperimentConfig c;
  c.source = j;
  c.hash = hex64(fnv1a64(j.dump()));
  if (!j.contains("seed") || !j.at("seed").is_number_integer())
    throw ConfigError("config needs an integer 'seed'");
  c.seed = j.at("seed").get<std::uint64_t>();
  c.trials = detail::get_or<std::size_t>(j, "trials", c.trials, "config");
  c.alpha = detail::get_or<double>(j, "alpha", c.alpha, "config");
  if (c.trials < 1) throw ConfigError("config: trials must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("config: alpha must lie in (0, 1)");
  if (j.contains("theta_grid")) c.theta_grid = detail::theta_grid_from_json(j.at("theta_grid"), "config");
  if (j.contains("output"))
    c.output_dir = detail::get_or<std::string>(j.at("output"), "dir", c.output_dir.string(), "output");
  if (j.contains("overrides")) {
    const json& o = j.at("overrides");
    c.sigma_sq_scale = detail::get_or<double>(o, "sigma_sq_scale", 1.0, "overrides");
    c.mu_scale = detail::get_or<double>(o, "mu_scale", 1.0, "overrides");
  }
  std::vector<Theorem> shared;
  if (j.contains("theorems")) shared = detail::theorems_from_json(j.at("theorems"), "config");
  if (!j.contains("ensembles") || !j.at("ensembles").is_array() || j.at("ensembles").empty())
    throw ConfigError("config needs a nonempty 'ensembles' array");
  for (std::size_t k = 0; k < j.at("ensembles").size(); ++k) {
    EnsembleEntry e = detail::ensemble_from_json(j.at("ensembles")[k], k, base);
    e.theorems.insert(e.theorems.end(), shared.begin(), shared.end());
    if (e.theorems.empty())
      throw ConfigError("ensemble '" + e.spec.name + "' lists no theorems");
    c.ensembles.push_back(std::move(e));
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path().empty() ? "." : path.parent_path());
}

/// Seed of ensemble `index`: its own seed when given, else derived from the
/// experiment seed.
inline std::uint64_t ensemble_seed(const ExperimentConfig& c, std::size_t index) {
  const auto& s = c.ensembles[index].spec.seed;
  return s ? *s : mix_seed(c.seed ^ mix_seed(index + 1));
}

}  // namespace ttb
