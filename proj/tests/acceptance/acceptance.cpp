// Acceptance run: one PASS/FAIL line per criterion; exit status 1 when any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "ttb/cli.hpp"

using namespace ttb;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome suite_outcome(const std::vector<PropertyResult>& rs, std::size_t want_instances) {
  bool ok = true;
  std::string detail;
  for (const auto& r : rs) {
    ok = ok && r.pass() && r.instances == want_instances;
    detail += fmt("%s %zu/%zu max_err=%.2e; ", r.name.c_str(), r.instances - r.violations,
                  r.instances, r.max_error);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

std::vector<DenseTensor> hermitian_set(const Dims& dims, std::uint64_t seed0, std::size_t count,
                                       double norm) {
  std::vector<DenseTensor> out;
  for (std::size_t k = 0; k < count; ++k) {
    RngStream rng(seed0 + k, 0);
    out.push_back(random_hermitian(dims, rng, norm).base());
  }
  return out;
}

EnsembleSpec series(const std::string& name, EnsembleKind kind, std::vector<DenseTensor> coeffs,
                    std::uint64_t seed) {
  EnsembleSpec s;
  s.name = name;
  s.kind = kind;
  s.coefficients = std::move(coeffs);
  s.seed = seed;
  return s;
}

ThetaGrid quantile_grid(double p_lo) {
  ThetaGrid g;
  g.kind = ThetaGrid::Kind::quantile;
  g.points = 16;
  g.p_lo = p_lo;
  return g;
}

struct Tally {
  std::size_t verdicts = 0, fails = 0, runs = 0;
  void add(const VerifyResult& r) {
    verdicts += r.verdicts.size();
    fails += r.failures();
    ++runs;
  }
  std::string str() const { return fmt("%zu runs, %zu verdicts, %zu fail", runs, verdicts, fails); }
};

constexpr std::size_t kTrials = 100000;

}  // namespace

int main() {
  SelftestOptions so;
  so.seed = 0xacce97u;

  report(1, "Einstein product agrees with brute-force nested sums", [&] {
    const auto t0 = Clock::now();
    RngStream rng(so.seed, 100);
    double worst = 0.0;
    std::size_t bad = 0;
    for (int k = 0; k < 200; ++k) {
      const auto [a, b] = detail::random_conforming_pair(rng);
      const DenseTensor c = einstein_product(a, b);
      const std::vector<oracle::cd> ea(a.entries().begin(), a.entries().end());
      const std::vector<oracle::cd> eb(b.entries().begin(), b.entries().end());
      const auto ref = oracle::einstein(ea, eb, a.shape().row_dims(), a.shape().col_dims(),
                                        b.shape().col_dims());
      double diff = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        diff = std::max(diff, std::abs(c.entries()[i] - ref[i]));
        scale = std::max(scale, std::abs(ref[i]));
      }
      worst = std::max(worst, diff / scale);
      if (!(diff / scale <= 1e-12)) ++bad;
    }
    const PropertyResult lib = check_einstein_oracle(so);
    const double t = seconds_since(t0);
    return Outcome{bad == 0 && lib.pass() && t < 5.0,
                   fmt("200 pairs, max rel err %.2e, %zu violations, library suite %s, %.2fs", worst,
                       bad, lib.pass() ? "ok" : "failed", t)};
  });

  report(2, "unfolding is a product/trace/adjoint homomorphism",
         [&] { return suite_outcome({check_unfolding_homomorphism(so)}, 200); });

  report(3, "spectral mapping, exp-log round trip and dilation identity",
         [&] { return suite_outcome(run_spectral_suite(so), 100); });

  report(4, "trace and operator inequality suite", [&] {
    const auto t0 = Clock::now();
    Outcome o = suite_outcome(run_inequality_suite(so), 100);
    const double t = seconds_since(t0);
    o.pass = o.pass && t < 60.0;
    return o;
  });

  report(5, "Gaussian and Rademacher series tails", [&] {
    Tally tally;
    std::uint64_t seed = 500;
    for (EnsembleKind kind : {EnsembleKind::gaussian_series, EnsembleKind::rademacher_series})
      for (const Dims& dims : {Dims{2, 2}, Dims{2, 3}})
        for (std::size_t set = 0; set < 3; ++set) {
          const std::size_t count = 2 + 2 * set;
          const PreparedEnsemble e(series("series", kind, hermitian_set(dims, 1000 * seed, count, 1.0), seed));
          ++seed;
          const double sigma = std::sqrt(e.params().bound.sigma_sq);
          ThetaGrid g;
          g.kind = ThetaGrid::Kind::linear;
          g.lo = 0.25 * sigma;
          g.hi = 4.0 * sigma;
          g.points = 16;
          tally.add(verify(e, Theorem::gaussian_series, g, kTrials, e.spec().seed.value()));
        }
    return Outcome{tally.fails == 0 && tally.verdicts == 12 * 16, tally.str()};
  });

  report(6, "Chernoff II on psd_bounded, plus halved-mu falsification control", [&] {
    Tally valid, control;
    VerifyOptions halved;
    halved.mu_scale = 0.5;
    for (std::size_t n : {8u, 32u}) {
      EnsembleSpec s;
      s.name = "psd";
      s.kind = EnsembleKind::psd_bounded;
      s.dims = {2, 2};
      s.n = n;
      s.T = 1.0;
      s.seed = 600 + n;
      const PreparedEnsemble e(s);
      const auto samples = sample_summaries(e, kTrials, *s.seed);
      for (Theorem t : {Theorem::chernoff2_upper, Theorem::chernoff2_lower}) {
        valid.add(verify_samples(e, samples, t, quantile_grid(1e-3)));
        control.add(verify_samples(e, samples, t, quantile_grid(1e-3), halved));
      }
    }
    return Outcome{valid.fails == 0 && control.fails >= 1,
                   "valid: " + valid.str() + "; control: " + control.str()};
  });

  report(7, "Bernstein bounded and subexponential, regime dominance and empirical pass", [&] {
    Tally tally;
    std::size_t checked = 0, dominance_bad = 0;
    EnsembleSpec centered = series("centered", EnsembleKind::centered_bounded,
                                   hermitian_set({2, 2}, 41, 12, 0.5), 701);
    EnsembleSpec subexp = series("subexp", EnsembleKind::subexponential,
                                 hermitian_set({2, 2}, 51, 3, 1.0), 702);
    centered.T = 1.0;
    subexp.T = 1.0;
    const PreparedEnsemble ec(centered), es(subexp);
    for (const auto* e : {&ec, &es}) {
      const BoundParams& p = e->params().bound;
      const bool bounded = e == &ec;
      auto form = [&](double th, Regime r) {
        return bounded ? bernstein_bounded(p, th, r).value : bernstein_subexponential(p, th, r).value;
      };
      const double edge = p.sigma_sq / p.T;
      for (int k = 1; k <= 400; ++k) {
        const double th = 10.0 * edge * k / 400.0;
        const double general = form(th, Regime::general);
        const double side = form(th, th <= edge ? Regime::small : Regime::large);
        const double picked = form(th, Regime::automatic);
        ++checked;
        if (general > side * (1 + 1e-12) || picked != side) ++dominance_bad;
      }
      const auto samples = sample_summaries(*e, kTrials, e->spec().seed.value());
      const ThetaGrid g = quantile_grid(1e-5);
      for (Theorem t : bounded ? std::vector{Theorem::bernstein_bounded, Theorem::bernstein_bounded_auto}
                               : std::vector{Theorem::bernstein_subexp, Theorem::bernstein_subexp_auto})
        tally.add(verify_samples(*e, samples, t, g));
    }
    return Outcome{dominance_bad == 0 && tally.fails == 0 && tally.verdicts > 0,
                   fmt("dominance %zu/%zu points; ", checked - dominance_bad, checked) + tally.str()};
  });

  report(8, "Azuma on the adaptive martingale and McDiarmid", [&] {
    Tally tally;
    EnsembleSpec az = series("azuma", EnsembleKind::azuma_martingale,
                             hermitian_set({2, 2}, 61, 12, 0.5), 801);
    az.adaptive = true;
    EnsembleSpec mc = series("mcdiarmid", EnsembleKind::mcdiarmid_function,
                             hermitian_set({2, 2}, 81, 12, 0.5), 802);
    tally.add(verify(PreparedEnsemble(az), Theorem::azuma, quantile_grid(1e-5), kTrials, 801));
    tally.add(verify(PreparedEnsemble(mc), Theorem::mcdiarmid, quantile_grid(1e-5), kTrials, 802));
    return Outcome{tally.fails == 0 && tally.verdicts > 0, tally.str()};
  });

  report(9, "expectation sandwich on five Gaussian series", [&] {
    const std::vector<std::pair<Dims, std::size_t>> specs = {
        {{2}, 1}, {{3}, 4}, {{2, 2}, 3}, {{2, 3}, 2}, {{4, 2}, 6}};
    std::string detail;
    bool ok = true;
    std::uint64_t seed = 900;
    for (const auto& [dims, count] : specs) {
      const PreparedEnsemble e(series("sandwich", EnsembleKind::gaussian_series,
                                      hermitian_set(dims, 10 * seed, count, 1.0), seed));
      const auto [lo, hi] = expectation_norm_sandwich(e.params().bound);
      const MeanEstimate m = estimate_expectation(e, ExpectationStatistic::norm_sq, kTrials, seed++);
      const bool in = m.mean >= lo - 5.0 * m.se && m.mean <= hi + 5.0 * m.se;
      ok = ok && in;
      detail += fmt("%.3f<=%.3f<=%.3f; ", lo, m.mean, hi);
    }
    detail.resize(detail.size() - 2);
    return Outcome{ok, detail};
  });

  report(10, "Chernoff expectation constants and Gaussian integral limit", [&] {
    const auto c = chernoff_expectation_constant();
    const double g = gaussian_integral(std::numeric_limits<double>::infinity());
    const double gerr = std::abs(g - std::sqrt(std::numbers::pi) / 2.0);
    return Outcome{std::abs(c.delta - 0.5671) <= 1e-3 && std::abs(c.C - 10.28) <= 0.1 && gerr <= 1e-9,
                   fmt("delta=%.6f C=%.4f |G(inf)-sqrt(pi)/2|=%.1e", c.delta, c.C, gerr)};
  });

  report(11, "verify CSVs are bit-identical across 1, 2 and 8 workers", [&] {
    const fs::path dir = fs::temp_directory_path() / "ttb_acceptance_repro";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const json cfg = json::parse(R"({
      "schema": "ttb.experiment/1", "seed": 1101, "trials": 30000,
      "ensembles": [
        {"name": "g", "kind": "gaussian_series",
         "coefficients": [{"random_hermitian": {"dims": [2, 2], "seed": 1}},
                          {"random_hermitian": {"dims": [2, 2], "seed": 2}}],
         "theorems": ["gaussian", "gaussian-norm"]},
        {"name": "p", "kind": "psd_bounded", "dims": [2], "n": 16, "T": 1,
         "theorems": ["chernoff2-upper", "chernoff2-lower"]},
        {"name": "a", "kind": "azuma_martingale", "adaptivity": "adaptive",
         "coefficients": [{"random_hermitian": {"dims": [2], "seed": 3, "norm": 0.5}},
                          {"random_hermitian": {"dims": [2], "seed": 4, "norm": 0.5}}],
         "theorems": ["azuma"]}
      ]})");
    std::ofstream(dir / "repro.json") << cfg.dump(2);
    std::vector<std::string> runs;
    std::size_t files = 0;
    for (unsigned w : {1u, 2u, 8u}) {
      RunOptions ro;
      ro.workers = w;
      ro.quiet = true;
      ro.out_dir = dir / ("w" + std::to_string(w));
      std::ostringstream out, err;
      if (cmd_verify(dir / "repro.json", ro, out, err) != kExitOk)
        return Outcome{false, "verify failed with " + std::to_string(w) + " workers: " + err.str()};
      std::string all;
      files = 0;
      for (const auto& f : {"g__gaussian.csv", "g__gaussian-norm.csv", "p__chernoff2-upper.csv",
                            "p__chernoff2-lower.csv", "a__azuma.csv"}) {
        std::ifstream is(*ro.out_dir / f, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        if (!ss.str().empty()) ++files;
        all += ss.str();
      }
      runs.push_back(all);
    }
    fs::remove_all(dir);
    const bool same = runs[0] == runs[1] && runs[0] == runs[2];
    return Outcome{same && files == 5, fmt("%zu CSVs, %zu bytes per run, identical=%s", files,
                                           runs[0].size(), same ? "yes" : "no")};
  });

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
