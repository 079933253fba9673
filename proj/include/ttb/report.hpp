#pragma once

/// \file
/// Verdict rendering: plot-ready CSV, JSON report and a terminal table.
/// CSV carries raw bound values; clamping to 1 happens only in the JSON
/// "bound_clamped" field and the terminal table.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "ttb/montecarlo.hpp"
#include "ttb/serialize.hpp"

namespace ttb {

/// Shortest round-trip representation ("%.17g"); infinities as "inf".
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string verdicts_csv(const VerifyResult& r, std::uint64_t seed, const std::string& config_hash) {
  std::ostringstream os;
  os << "# seed=" << seed << " config_hash=" << config_hash << " ensemble=" << r.ensemble
     << " theorem=" << to_string(r.theorem) << " statistic=" << to_string(r.statistic) << '\n';
  os << "theta,p_hat,ci_upper,bound,tightness,pass\n";
  for (const TailVerdict& v : r.verdicts) {
    os << format_double(v.estimate.theta) << ',' << format_double(v.estimate.p_hat) << ','
       << format_double(v.estimate.ci_upper) << ',' << format_double(v.bound.value) << ','
       << format_double(v.tightness) << ',' << (v.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

inline json bound_params_json(const BoundParams& p) {
  return {{"dim_product", p.dim_product}, {"sigma_sq", p.sigma_sq}, {"T", p.T},
          {"n", p.n},                     {"mu_max", p.mu_max},     {"mu_min", p.mu_min},
          {"mu_bar_max", p.mu_bar_max},   {"mu_bar_min", p.mu_bar_min}};
}

inline json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline json verdicts_json(const VerifyResult& r) {
  json out;
  out["ensemble"] = r.ensemble;
  out["theorem"] = std::string(to_string(r.theorem));
  out["statistic"] = std::string(to_string(r.statistic));
  out["params"] = bound_params_json(r.params);
  out["pass"] = r.all_pass();
  out["failures"] = r.failures();
  json rows = json::array();
  for (const TailVerdict& v : r.verdicts) {
    rows.push_back({{"theta", v.estimate.theta},
                    {"threshold", v.threshold},
                    {"hits", v.estimate.hits},
                    {"trials", v.estimate.trials},
                    {"p_hat", v.estimate.p_hat},
                    {"ci_upper", v.estimate.ci_upper},
                    {"bound", finite_or_string(v.bound.value)},
                    {"bound_clamped", std::min(v.bound.value, 1.0)},
                    {"tightness", finite_or_string(v.tightness)},
                    {"pass", v.pass}});
  }
  out["verdicts"] = std::move(rows);
  return out;
}

/// One line per theta, bounds clamped to 1 for reading.
inline void print_verdict_table(std::ostream& os, const VerifyResult& r) {
  char line[160];
  os << r.ensemble << " / " << to_string(r.theorem) << "  (" << r.verdicts.size() << " thetas, "
     << r.failures() << " failing)\n";
  std::snprintf(line, sizeof line, "  %12s %10s %10s %10s %10s  %s\n", "theta", "p_hat",
                "ci_upper", "bound", "tightness", "verdict");
  os << line;
  for (const TailVerdict& v : r.verdicts) {
    std::snprintf(line, sizeof line, "  %12.6g %10.4g %10.4g %10.4g %10.4g  %s\n",
                  v.estimate.theta, v.estimate.p_hat, v.estimate.ci_upper,
                  std::min(v.bound.value, 1.0), v.tightness, v.pass ? "pass" : "FAIL");
    os << line;
  }
}

}  // namespace ttb
