#pragma once

/// \file
/// Command implementations behind the `ttb` executable. Each returns the
/// process exit code: 0 success, 1 scientific failure (a bound or property
/// violated), 2 usage or configuration error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ttb/bounds.hpp"
#include "ttb/config.hpp"
#include "ttb/ensembles.hpp"
#include "ttb/montecarlo.hpp"
#include "ttb/report.hpp"
#include "ttb/selftest.hpp"
#include "ttb/serialize.hpp"

namespace ttb {

enum ExitCode : int { kExitOk = 0, kExitScientific = 1, kExitUsage = 2 };

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> workers;
  std::optional<std::filesystem::path> out_dir;
  bool json = false;
  bool dry_run = false;
  bool quiet = false;
};

/// --workers, then TTB_WORKERS, then the hardware thread count.
inline unsigned resolve_workers(std::optional<unsigned> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--workers must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("TTB_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("TTB_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline int cmd_selftest(const SelftestOptions& opt, bool as_json, std::ostream& out) {
  const auto results = run_selftest(opt);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.pass();
  if (as_json) {
    json rows = json::array();
    for (const auto& r : results)
      rows.push_back({{"property", r.name},
                      {"instances", r.instances},
                      {"violations", r.violations},
                      {"max_error", finite_or_string(r.max_error)},
                      {"tolerance", r.tolerance},
                      {"seconds", r.seconds},
                      {"pass", r.pass()},
                      {"error", r.first_error}});
    out << json{{"seed", opt.seed}, {"pass", ok}, {"properties", rows}}.dump(2) << '\n';
  } else {
    char line[200];
    std::snprintf(line, sizeof line, "%-34s %9s %10s %12s %9s  %s\n", "property", "instances",
                  "violations", "max_error", "seconds", "verdict");
    out << line;
    for (const auto& r : results) {
      std::snprintf(line, sizeof line, "%-34s %9zu %10zu %12.3e %9.3f  %s\n", r.name.c_str(),
                    r.instances, r.violations, r.max_error, r.seconds, r.pass() ? "pass" : "FAIL");
      out << line;
      if (!r.first_error.empty()) out << "    first error: " << r.first_error << '\n';
    }
    out << (ok ? "selftest: all properties hold\n" : "selftest: FAILED\n");
  }
  return ok ? kExitOk : kExitScientific;
}

namespace detail {

struct PreparedEntry {
  PreparedEnsemble ensemble;
  std::vector<TheoremPlan> plans;
  std::uint64_t seed;
  std::size_t trials;
  ThetaGrid grid;
};

inline std::string file_stem(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

}  // namespace detail

inline int cmd_verify(const std::filesystem::path& config_path, const RunOptions& ro,
                      std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  std::vector<detail::PreparedEntry> entries;
  VerifyOptions vo;
  try {
    cfg = load_config(config_path);
    if (ro.seed) cfg.seed = *ro.seed;
    if (ro.trials) cfg.trials = *ro.trials;
    if (ro.out_dir) cfg.output_dir = *ro.out_dir;
    vo.alpha = cfg.alpha;
    vo.workers = resolve_workers(ro.workers);
    vo.sigma_sq_scale = cfg.sigma_sq_scale;
    vo.mu_scale = cfg.mu_scale;
    for (std::size_t k = 0; k < cfg.ensembles.size(); ++k) {
      EnsembleEntry& e = cfg.ensembles[k];
      const std::uint64_t seed = ensemble_seed(cfg, k);
      e.spec.seed = seed;
      PreparedEnsemble prepared(e.spec);
      std::vector<TheoremPlan> plans;
      for (Theorem t : e.theorems) plans.push_back(plan_theorem(prepared, t, vo));
      entries.push_back({std::move(prepared), std::move(plans), seed, e.trials.value_or(cfg.trials),
                         e.theta_grid.value_or(cfg.theta_grid)});
    }
  } catch (const Error& e) {
    err << "ttb verify: " << e.what() << '\n';
    return kExitUsage;
  }

  if (ro.dry_run) {
    out << "config " << config_path.string() << " hash=" << cfg.hash << " seed=" << cfg.seed
        << " workers=" << vo.workers << '\n';
    for (const auto& e : entries)
      for (const auto& p : e.plans)
        out << "  " << e.ensemble.spec().name << " [" << to_string(e.ensemble.spec().kind) << "] -> "
            << to_string(p.theorem) << " statistic=" << to_string(p.statistic)
            << " trials=" << e.trials << " seed=" << e.seed << '\n';
    return kExitOk;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<VerifyResult> results;
  try {
    for (auto& e : entries) {
      const auto samples = sample_summaries(e.ensemble, e.trials, e.seed, vo.workers);
      for (const auto& p : e.plans)
        results.push_back(verify_samples(e.ensemble, samples, p.theorem, e.grid, vo));
    }
  } catch (const DomainError& e) {
    err << "ttb verify: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "ttb verify: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "ttb verify: " << e.what() << '\n';
    return kExitScientific;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool ok = true;
  json report;
  report["schema"] = "ttb.report/1";
  report["config"] = cfg.source;
  report["config_hash"] = cfg.hash;
  report["seed"] = cfg.seed;
  report["trials"] = cfg.trials;
  report["alpha"] = cfg.alpha;
  report["wall_time_seconds"] = wall;
  report["results"] = json::array();
  try {
    std::filesystem::create_directories(cfg.output_dir);
    for (const auto& r : results) {
      ok = ok && r.all_pass();
      const auto csv = cfg.output_dir /
                       (detail::file_stem(r.ensemble) + "__" + std::string(to_string(r.theorem)) + ".csv");
      std::ofstream os(csv);
      if (!os) throw ConfigError("cannot write " + csv.string());
      os << verdicts_csv(r, cfg.seed, cfg.hash);
      report["results"].push_back(verdicts_json(r));
    }
    report["pass"] = ok;
    std::ofstream rs(cfg.output_dir / "report.json");
    if (!rs) throw ConfigError("cannot write " + (cfg.output_dir / "report.json").string());
    rs << report.dump(2) << '\n';
  } catch (const std::exception& e) {
    err << "ttb verify: " << e.what() << '\n';
    return kExitUsage;
  }

  if (ro.json) {
    out << report.dump(2) << '\n';
  } else if (!ro.quiet) {
    out << "seed=" << cfg.seed << " config_hash=" << cfg.hash << " wall_time=" << wall << "s\n";
    for (const auto& r : results) print_verdict_table(out, r);
    out << (ok ? "verify: all verdicts pass\n" : "verify: bound violations detected\n");
  }
  return ok ? kExitOk : kExitScientific;
}

struct BoundArgs {
  Dims dims{1};
  Dims col_dims;  // rectangular and nonuniform tags: product of (I_m + J_m)
  double sigma_sq = 1.0;
  double T = 1.0;
  std::uint64_t n = 1;
  double mu_max = 0.0, mu_min = 0.0, mu_bar_max = 0.0, mu_bar_min = 0.0;
  std::string regime = "general";
  std::string mgf = "gaussian";  // master: gaussian | bounded
  std::vector<double> thetas;
};

inline BoundParams bound_params_from_args(const BoundArgs& a, bool dilated) {
  BoundParams p;
  p.dim_product = 1;
  if (dilated) {
    if (a.col_dims.size() != a.dims.size())
      throw DomainError("--col-dims must have as many modes as --dims");
    for (std::size_t m = 0; m < a.dims.size(); ++m) p.dim_product *= a.dims[m] + a.col_dims[m];
  } else {
    for (auto d : a.dims) p.dim_product *= d;
  }
  p.sigma_sq = a.sigma_sq;
  p.T = a.T;
  p.n = a.n;
  p.mu_max = a.mu_max;
  p.mu_min = a.mu_min;
  p.mu_bar_max = a.mu_bar_max;
  p.mu_bar_min = a.mu_bar_min;
  return p;
}

inline Regime parse_regime(const std::string& s) {
  if (s == "general") return Regime::general;
  if (s == "auto") return Regime::automatic;
  if (s == "small") return Regime::small;
  if (s == "large") return Regime::large;
  throw DomainError("unknown regime '" + s + "' (general|auto|small|large)");
}

inline int cmd_bound(const std::string& tag, const BoundArgs& a, bool as_json, std::ostream& out,
                     std::ostream& err) {
  try {
    json j;
    j["theorem"] = tag;
    auto emit_scalar = [&](const std::vector<std::pair<std::string, double>>& kv) {
      for (const auto& [k, v] : kv) j[k] = v;
      if (as_json) {
        out << j.dump(2) << '\n';
      } else {
        for (const auto& [k, v] : kv) out << k << " = " << format_double(v) << '\n';
      }
    };
    if (tag == "chernoff-expectation") {
      const BoundParams p = bound_params_from_args(a, false);
      const auto [lo, hi] = chernoff_expectation_bounds(p);
      const auto c = chernoff_expectation_constant();
      j["params"] = bound_params_json(p);
      emit_scalar({{"lower", lo}, {"upper", hi}, {"delta", c.delta}, {"C", c.C}});
      return kExitOk;
    }
    if (tag == "subexp-expectation") {
      const BoundParams p = bound_params_from_args(a, false);
      j["params"] = bound_params_json(p);
      emit_scalar({{"upper", subexp_expectation_upper(p)}});
      return kExitOk;
    }
    if (tag == "sandwich") {
      const BoundParams p = bound_params_from_args(a, false);
      const auto [lo, hi] = expectation_norm_sandwich(p);
      j["params"] = bound_params_json(p);
      emit_scalar({{"lower_on_sq", lo}, {"upper_on_sq", hi}});
      return kExitOk;
    }
    const auto th = parse_theorem(tag);
    if (!th) {
      err << "ttb bound: unknown theorem tag '" << tag << "'\n";
      return kExitUsage;
    }
    if (a.thetas.empty()) {
      err << "ttb bound: at least one --theta is required\n";
      return kExitUsage;
    }
    const bool dilated = *th == Theorem::rectangular_series || *th == Theorem::nonuniform_gaussian;
    const BoundParams p = bound_params_from_args(a, dilated);
    auto eval = [&](double theta) -> double {
      switch (*th) {
        case Theorem::gaussian_series:
        case Theorem::rectangular_series:
        case Theorem::nonuniform_gaussian: return gaussian_series_bound(p, theta, false).value;
        case Theorem::gaussian_series_norm: return gaussian_series_bound(p, theta, true).value;
        case Theorem::chernoff1_upper: return chernoff_i_upper(p, theta).value;
        case Theorem::chernoff1_lower: return chernoff_i_lower(p, theta).value;
        case Theorem::chernoff2_upper: return chernoff_ii_upper(p, theta).value;
        case Theorem::chernoff2_lower: return chernoff_ii_lower(p, theta).value;
        case Theorem::bernstein_bounded: return bernstein_bounded(p, theta, parse_regime(a.regime)).value;
        case Theorem::bernstein_bounded_auto: return bernstein_bounded(p, theta, Regime::automatic).value;
        case Theorem::bernstein_subexp:
          return bernstein_subexponential(p, theta, parse_regime(a.regime)).value;
        case Theorem::bernstein_subexp_auto:
          return bernstein_subexponential(p, theta, Regime::automatic).value;
        case Theorem::azuma:
        case Theorem::mcdiarmid:
        case Theorem::hoeffding: return azuma_mcdiarmid_bound(p, theta, *th).value;
        case Theorem::master: {
          const double s2 = p.sigma_sq, T = p.T;
          std::function<double(double)> g;
          if (a.mgf == "gaussian") {
            g = [s2](double t) { return 0.5 * s2 * t * t; };
          } else if (a.mgf == "bounded") {
            g = [s2, T](double t) { return s2 * std::expm1(t * T) / (T * T) - s2 * t / T; };
          } else {
            throw DomainError("unknown --mgf '" + a.mgf + "' (gaussian|bounded)");
          }
          return master_bound_numeric(g, theta, p.dim_product).value;
        }
      }
      throw DomainError("unhandled theorem");
    };
    json rows = json::array();
    std::vector<std::pair<double, double>> values;
    for (double t : a.thetas) values.emplace_back(t, eval(t));
    if (as_json) {
      for (const auto& [t, v] : values) rows.push_back({{"theta", t}, {"bound", v}});
      j["params"] = bound_params_json(p);
      j["values"] = rows;
      out << j.dump(2) << '\n';
    } else {
      out << "theta,bound\n";
      for (const auto& [t, v] : values) out << format_double(t) << ',' << format_double(v) << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "ttb bound: " << e.what() << '\n';
    return kExitUsage;
  }
}

/// Dumps raw draws of one ensemble from a config: JSON lines on stdout, or
/// binary tensor pairs under --out-dir.
inline int cmd_sample(const std::filesystem::path& config_path, const std::string& ensemble_name,
                      const RunOptions& ro, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (ro.seed) cfg.seed = *ro.seed;
    std::size_t index = 0;
    if (!ensemble_name.empty()) {
      index = cfg.ensembles.size();
      for (std::size_t k = 0; k < cfg.ensembles.size(); ++k)
        if (cfg.ensembles[k].spec.name == ensemble_name) index = k;
      if (index == cfg.ensembles.size())
        throw ConfigError("no ensemble named '" + ensemble_name + "' in " + config_path.string());
    }
    EnsembleSpec spec = cfg.ensembles[index].spec;
    const std::uint64_t seed = ensemble_seed(cfg, index);
    spec.seed = seed;
    const PreparedEnsemble e(spec);
    const std::size_t count = ro.trials.value_or(10);
    if (ro.out_dir) std::filesystem::create_directories(*ro.out_dir);
    for (std::size_t k = 0; k < count; ++k) {
      RngStream rng(seed, k);
      const Matrix m = e.draw(rng);
      const SampleSummary s = e.summarize(m);
      const DenseTensor t = DenseTensor::refold(m, e.sum_shape());
      json line = {{"ensemble", spec.name}, {"index", k},
                   {"seed", seed},          {"lambda_max", s.lambda_max},
                   {"lambda_min", s.lambda_min}, {"spectral_norm", s.spectral_norm}};
      if (ro.out_dir) {
        const auto stem = *ro.out_dir / (detail::file_stem(spec.name) + "_" + std::to_string(k));
        line["tensor"] = save_binary(t, stem).string();
      } else {
        line["tensor"] = to_json(t);
      }
      out << line.dump() << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "ttb sample: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace ttb
