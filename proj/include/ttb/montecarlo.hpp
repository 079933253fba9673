#pragma once

/// \file
/// Monte Carlo estimation of tail probabilities and expectations, and the
/// verdict logic comparing them with the analytic bounds.
///
/// Sample k of an ensemble always uses substream k of the seed, and workers
/// own contiguous blocks of sample indices writing into preallocated slots,
/// so every result is bit-identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "ttb/bounds.hpp"
#include "ttb/ensembles.hpp"
#include "ttb/error.hpp"
#include "ttb/rng.hpp"

namespace ttb {

enum class Statistic { lambda_max_sum, spectral_norm_sum, lambda_min_sum, lambda_max_centered_F };

inline std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::lambda_max_sum: return "lambda_max_sum";
    case Statistic::spectral_norm_sum: return "spectral_norm_sum";
    case Statistic::lambda_min_sum: return "lambda_min_sum";
    case Statistic::lambda_max_centered_F: return "lambda_max_centered_F";
  }
  return "unknown";
}

enum class ExpectationStatistic { norm, norm_sq, lambda_max };

struct TailEstimate {
  double theta = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  double ci_upper = 1.0;
  double alpha = 1e-3;
};

struct TailVerdict {
  TailEstimate estimate;
  BoundValue bound;
  bool pass = false;
  double tightness = 0.0;
  double threshold = 0.0;  // value of the statistic the event compares against
};

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// One-sided exact binomial upper confidence limit at level 1 - alpha.
inline double clopper_pearson_upper(std::uint64_t hits, std::uint64_t trials, double alpha) {
  if (trials == 0) throw DomainError("clopper_pearson_upper: trials must be >= 1");
  if (hits > trials) throw DomainError("clopper_pearson_upper: hits exceed trials");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("clopper_pearson_upper: alpha in (0, 1)");
  if (hits == trials) return 1.0;
  if (hits == 0) return 1.0 - std::pow(alpha, 1.0 / static_cast<double>(trials));
  return boost::math::ibeta_inv(static_cast<double>(hits + 1),
                                static_cast<double>(trials - hits), 1.0 - alpha);
}

/// Runs body(begin, end) over [0, count) split into contiguous chunks, one per
/// worker. The first exception thrown by any worker is rethrown.
template <typename F>
void parallel_for_chunks(std::size_t count, unsigned workers, F&& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    body(std::size_t{0}, count);
    return;
  }
  const std::size_t w = std::min<std::size_t>(workers, count);
  const std::size_t chunk = (count + w - 1) / w;
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t begin = k * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Order-fixed pairwise summation.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += v[k];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline std::vector<SampleSummary> sample_summaries(const PreparedEnsemble& e, std::size_t trials,
                                                   std::uint64_t seed, unsigned workers = 1) {
  std::vector<SampleSummary> out(trials);
  parallel_for_chunks(trials, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      RngStream rng(seed, k);
      out[k] = e.sample_summary(rng);
    }
  });
  return out;
}

inline double statistic_value(const SampleSummary& s, Statistic stat, const EnsembleParams& p) {
  switch (stat) {
    case Statistic::lambda_max_sum: return s.lambda_max;
    case Statistic::spectral_norm_sum: return s.spectral_norm;
    case Statistic::lambda_min_sum: return s.lambda_min;
    case Statistic::lambda_max_centered_F:
      if (!std::isfinite(p.mean_shift))
        throw ConfigError("centered statistic needs an isotropic analytic mean");
      return s.lambda_max - p.mean_shift;
  }
  throw ConfigError("unknown statistic");
}

inline bool is_lower_tail(Statistic s) { return s == Statistic::lambda_min_sum; }

/// Counts samples with statistic >= threshold (<= for lambda_min_sum).
inline TailEstimate estimate_tail(const std::vector<SampleSummary>& samples, Statistic stat,
                                  const EnsembleParams& params, double threshold,
                                  double alpha = 1e-3) {
  if (samples.empty()) throw DomainError("estimate_tail: trials must be >= 1");
  TailEstimate t;
  t.theta = threshold;
  t.trials = samples.size();
  t.alpha = alpha;
  const bool lower = is_lower_tail(stat);
  for (const SampleSummary& s : samples) {
    const double v = statistic_value(s, stat, params);
    if (lower ? v <= threshold : v >= threshold) ++t.hits;
  }
  t.p_hat = static_cast<double>(t.hits) / static_cast<double>(t.trials);
  t.ci_upper = clopper_pearson_upper(t.hits, t.trials, alpha);
  return t;
}

inline TailEstimate estimate_tail(const PreparedEnsemble& e, Statistic stat, double theta,
                                  std::size_t trials, std::uint64_t seed, double alpha = 1e-3,
                                  unsigned workers = 1) {
  if (trials < 1) throw DomainError("estimate_tail: trials must be >= 1");
  return estimate_tail(sample_summaries(e, trials, seed, workers), stat, e.params(), theta, alpha);
}

inline MeanEstimate estimate_expectation(const PreparedEnsemble& e, ExpectationStatistic stat,
                                         std::size_t trials, std::uint64_t seed,
                                         unsigned workers = 1) {
  if (trials < 2) throw DomainError("estimate_expectation: trials must be >= 2");
  const auto samples = sample_summaries(e, trials, seed, workers);
  std::vector<double> v(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    const SampleSummary& s = samples[k];
    v[k] = stat == ExpectationStatistic::norm      ? s.spectral_norm
           : stat == ExpectationStatistic::norm_sq ? s.spectral_norm * s.spectral_norm
                                                   : s.lambda_max;
  }
  const double n = static_cast<double>(trials);
  const double mean = pairwise_sum(v.data(), v.size()) / n;
  for (double& x : v) x = (x - mean) * (x - mean);
  const double var = pairwise_sum(v.data(), v.size()) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

struct Cumulants {
  HermitianTensor psi1;
  HermitianTensor psi2;
};

/// Sample mean and sample second cumulant E X^2 - (E X)^2 of the summed
/// tensor, accumulated over fixed blocks so the result ignores worker count.
inline Cumulants empirical_cumulants(const PreparedEnsemble& e, std::size_t trials,
                                     std::uint64_t seed, unsigned workers = 1) {
  if (trials < 2) throw DomainError("empirical_cumulants: trials must be >= 2");
  if (e.params().rectangular) throw DomainError("empirical_cumulants needs a Hermitian ensemble");
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = (trials + kBlock - 1) / kBlock;
  const auto d = static_cast<Eigen::Index>(e.sum_shape().row_size());
  std::vector<Matrix> first(blocks, Matrix::Zero(d, d)), second(blocks, Matrix::Zero(d, d));
  parallel_for_chunks(blocks, workers, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b)
      for (std::size_t k = b * kBlock; k < std::min(trials, (b + 1) * kBlock); ++k) {
        RngStream rng(seed, k);
        const Matrix s = e.draw(rng);
        first[b] += s;
        second[b] += s * s;
      }
  });
  std::function<Matrix(const std::vector<Matrix>&, std::size_t, std::size_t)> tree =
      [&](const std::vector<Matrix>& v, std::size_t lo, std::size_t hi) -> Matrix {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return tree(v, lo, mid) + tree(v, mid, hi);
  };
  const double n = static_cast<double>(trials);
  const Matrix m1 = tree(first, 0, blocks) / n;
  const Matrix m2 = tree(second, 0, blocks) / n;
  const Dims& dims = e.sum_shape().row_dims();
  const double tol = 1e-8 * std::max(1.0, m2.cwiseAbs().maxCoeff());
  return {HermitianTensor::from_matrix(m1, dims, tol),
          HermitianTensor::from_matrix(m2 - m1 * m1, dims, tol)};
}

struct ThetaGrid {
  enum class Kind { explicit_values, linear, log, quantile };
  Kind kind = Kind::quantile;
  std::vector<double> values;  // explicit_values
  double lo = std::numeric_limits<double>::quiet_NaN();  // linear/log; NaN = theorem range
  double hi = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 16;
  double p_lo = 1e-3;  // quantile: target tail probabilities, log-spaced
  double p_hi = 0.5;
};

struct VerifyOptions {
  double alpha = 1e-3;
  unsigned workers = 1;
  /// Multipliers applied to the hypothesis statistics before evaluating the
  /// bound and threshold; values other than 1 act as falsification controls.
  double sigma_sq_scale = 1.0;
  double mu_scale = 1.0;
};

/// How one theorem is checked against one ensemble.
struct TheoremPlan {
  Theorem theorem = Theorem::gaussian_series;
  Statistic statistic = Statistic::lambda_max_sum;
  BoundParams params;
  double theta_lo = 0.0;
  double theta_hi = std::numeric_limits<double>::infinity();
  std::function<double(double)> threshold_of_theta;
  std::function<double(double)> theta_of_threshold;
  std::function<BoundValue(double)> bound;
};

namespace detail {

inline bool kind_in(EnsembleKind k, std::initializer_list<EnsembleKind> ks) {
  return std::find(ks.begin(), ks.end(), k) != ks.end();
}

}  // namespace detail

/// Statistic, parameters, valid theta range and bound for a pairing; throws
/// ConfigError when the theorem does not apply to the ensemble.
inline TheoremPlan plan_theorem(const PreparedEnsemble& e, Theorem theorem,
                                const VerifyOptions& opt = {}) {
  using K = EnsembleKind;
  const EnsembleKind kind = e.spec().kind;
  const bool rect = e.params().rectangular;
  TheoremPlan plan;
  plan.theorem = theorem;
  plan.params = e.params().bound;
  plan.threshold_of_theta = [](double t) { return t; };
  plan.theta_of_threshold = [](double t) { return t; };

  auto incompatible = [&] {
    return ConfigError("theorem '" + std::string(to_string(theorem)) +
                       "' is not compatible with ensemble kind '" + std::string(to_string(kind)) +
                       "'" + (rect ? " (rectangular coefficients)" : ""));
  };
  auto require = [&](bool ok) {
    if (!ok) throw incompatible();
  };

  switch (theorem) {
    case Theorem::gaussian_series:
    case Theorem::gaussian_series_norm:
      require(detail::kind_in(kind, {K::gaussian_series, K::rademacher_series}) && !rect);
      plan.statistic = theorem == Theorem::gaussian_series ? Statistic::lambda_max_sum
                                                           : Statistic::spectral_norm_sum;
      break;
    case Theorem::rectangular_series:
      require(detail::kind_in(kind, {K::gaussian_series, K::rademacher_series}));
      if (!rect) plan.params = rectangular_series_params(e.spec().coefficients);
      plan.statistic = Statistic::spectral_norm_sum;
      break;
    case Theorem::nonuniform_gaussian:
      require(kind == K::hadamard_gaussian);
      plan.statistic = Statistic::spectral_norm_sum;
      break;
    case Theorem::chernoff1_upper:
    case Theorem::chernoff1_lower:
    case Theorem::chernoff2_upper:
    case Theorem::chernoff2_lower:
      require(kind == K::psd_bounded);
      break;
    case Theorem::bernstein_bounded:
    case Theorem::bernstein_bounded_auto:
      require(kind == K::centered_bounded);
      plan.statistic = Statistic::lambda_max_sum;
      break;
    case Theorem::bernstein_subexp:
    case Theorem::bernstein_subexp_auto:
      require(kind == K::subexponential);
      plan.statistic = Statistic::lambda_max_sum;
      break;
    case Theorem::azuma:
      require(detail::kind_in(kind, {K::azuma_martingale, K::rademacher_series, K::centered_bounded}) &&
              !rect);
      plan.statistic = Statistic::lambda_max_sum;
      break;
    case Theorem::hoeffding:
      require(detail::kind_in(kind, {K::rademacher_series, K::centered_bounded}) && !rect);
      plan.statistic = Statistic::lambda_max_sum;
      break;
    case Theorem::mcdiarmid:
      require(kind == K::mcdiarmid_function);
      plan.statistic = Statistic::lambda_max_centered_F;
      break;
    case Theorem::master:
      require(detail::kind_in(kind, {K::gaussian_series, K::rademacher_series, K::centered_bounded}) &&
              !rect);
      plan.statistic = Statistic::lambda_max_sum;
      break;
  }

  BoundParams& p = plan.params;
  p.sigma_sq *= opt.sigma_sq_scale;
  p.mu_max *= opt.mu_scale;
  p.mu_min *= opt.mu_scale;
  p.mu_bar_max *= opt.mu_scale;
  p.mu_bar_min *= opt.mu_scale;
  const BoundParams q = p;
  const double n = static_cast<double>(q.n);

  switch (theorem) {
    case Theorem::gaussian_series:
    case Theorem::rectangular_series:
    case Theorem::nonuniform_gaussian:
      plan.bound = [q, theorem](double t) {
        BoundValue b = gaussian_series_bound(q, t, false);
        b.theorem = theorem;
        return b;
      };
      break;
    case Theorem::gaussian_series_norm:
      plan.bound = [q](double t) { return gaussian_series_bound(q, t, true); };
      break;
    case Theorem::chernoff1_upper:
      if (std::abs(q.T - 1.0) > 1e-12) throw ConfigError("chernoff1 needs T = 1");
      plan.statistic = Statistic::lambda_max_sum;
      plan.theta_lo = q.mu_bar_max;
      plan.theta_hi = 1.0;
      plan.threshold_of_theta = [n](double t) { return n * t; };
      plan.theta_of_threshold = [n](double v) { return v / n; };
      plan.bound = [q](double t) { return chernoff_i_upper(q, t); };
      break;
    case Theorem::chernoff1_lower:
      if (std::abs(q.T - 1.0) > 1e-12) throw ConfigError("chernoff1 needs T = 1");
      plan.statistic = Statistic::lambda_min_sum;
      plan.theta_lo = 0.0;
      plan.theta_hi = q.mu_bar_min;
      plan.threshold_of_theta = [n](double t) { return n * t; };
      plan.theta_of_threshold = [n](double v) { return v / n; };
      plan.bound = [q](double t) { return chernoff_i_lower(q, t); };
      break;
    case Theorem::chernoff2_upper: {
      const double mu = q.mu_max;
      plan.statistic = Statistic::lambda_max_sum;
      plan.threshold_of_theta = [mu](double t) { return (1.0 + t) * mu; };
      plan.theta_of_threshold = [mu](double v) { return v / mu - 1.0; };
      plan.bound = [q](double t) { return chernoff_ii_upper(q, t); };
      break;
    }
    case Theorem::chernoff2_lower: {
      const double mu = q.mu_min;
      plan.statistic = Statistic::lambda_min_sum;
      plan.theta_hi = 1.0;
      plan.threshold_of_theta = [mu](double t) { return (1.0 - t) * mu; };
      plan.theta_of_threshold = [mu](double v) { return 1.0 - v / mu; };
      plan.bound = [q](double t) { return chernoff_ii_lower(q, t); };
      break;
    }
    case Theorem::bernstein_bounded:
    case Theorem::bernstein_bounded_auto: {
      const Regime r = theorem == Theorem::bernstein_bounded ? Regime::general : Regime::automatic;
      plan.bound = [q, r](double t) { return bernstein_bounded(q, t, r); };
      break;
    }
    case Theorem::bernstein_subexp:
    case Theorem::bernstein_subexp_auto: {
      const Regime r = theorem == Theorem::bernstein_subexp ? Regime::general : Regime::automatic;
      plan.bound = [q, r](double t) { return bernstein_subexponential(q, t, r); };
      break;
    }
    case Theorem::azuma:
    case Theorem::mcdiarmid:
    case Theorem::hoeffding:
      plan.bound = [q, theorem](double t) { return azuma_mcdiarmid_bound(q, t, theorem); };
      break;
    case Theorem::master: {
      std::function<double(double)> g;
      if (kind == K::centered_bounded) {
        const double s2 = q.sigma_sq, T = q.T;
        g = [s2, T](double t) { return s2 * std::expm1(t * T) / (T * T) - s2 * t / T; };
      } else {
        const double s2 = q.sigma_sq;
        g = [s2](double t) { return 0.5 * s2 * t * t; };
      }
      plan.bound = [q, g](double t) {
        BoundValue b = master_bound_numeric(g, t, q.dim_product);
        b.params = q;
        return b;
      };
      break;
    }
  }
  return plan;
}

namespace detail {

inline std::vector<double> spaced(double lo, double hi, std::size_t points, bool logarithmic) {
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double f = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    out[k] = logarithmic ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                         : lo + f * (hi - lo);
  }
  return out;
}

}  // namespace detail

/// Resolves a grid policy to concrete theta values for a plan. Quantile
/// grids place thresholds at empirical upper quantiles of the statistic so
/// the tail probabilities span [p_lo, p_hi].
inline std::vector<double> resolve_theta_grid(const ThetaGrid& grid, const TheoremPlan& plan,
                                              const std::vector<SampleSummary>& samples,
                                              const EnsembleParams& params) {
  std::vector<double> theta;
  auto clamp = [&](double t) {
    if (!std::isfinite(t)) t = plan.theta_lo;
    return std::clamp(t, plan.theta_lo, plan.theta_hi);
  };
  switch (grid.kind) {
    case ThetaGrid::Kind::explicit_values:
      theta = grid.values;
      break;
    case ThetaGrid::Kind::linear:
    case ThetaGrid::Kind::log: {
      if (!std::isfinite(grid.lo) || !std::isfinite(grid.hi))
        throw ConfigError("linear/log theta grids need finite lo and hi");
      if (grid.kind == ThetaGrid::Kind::log && !(grid.lo > 0.0))
        throw ConfigError("log theta grid needs lo > 0");
      theta = detail::spaced(grid.lo, grid.hi, std::max<std::size_t>(grid.points, 1),
                             grid.kind == ThetaGrid::Kind::log);
      break;
    }
    case ThetaGrid::Kind::quantile: {
      if (samples.empty()) throw DomainError("quantile theta grid needs samples");
      if (!(grid.p_lo > 0.0 && grid.p_lo <= grid.p_hi && grid.p_hi < 1.0))
        throw ConfigError("quantile grid needs 0 < p_lo <= p_hi < 1");
      std::vector<double> v(samples.size());
      for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = statistic_value(samples[k], plan.statistic, params);
      std::sort(v.begin(), v.end());
      const bool lower = is_lower_tail(plan.statistic);
      const auto N = static_cast<double>(v.size());
      for (double p : detail::spaced(grid.p_lo, grid.p_hi, std::max<std::size_t>(grid.points, 1), true)) {
        auto idx = static_cast<std::size_t>(lower ? std::max(0.0, std::ceil(p * N) - 1.0)
                                                  : std::floor((1.0 - p) * N));
        idx = std::min(idx, v.size() - 1);
        theta.push_back(clamp(plan.theta_of_threshold(v[idx])));
      }
      std::sort(theta.begin(), theta.end());
      theta.erase(std::unique(theta.begin(), theta.end()), theta.end());
      break;
    }
  }
  if (theta.empty()) throw ConfigError("theta grid is empty");
  return theta;
}

inline TailVerdict make_verdict(const TheoremPlan& plan, const std::vector<SampleSummary>& samples,
                                const EnsembleParams& params, double theta, double alpha) {
  TailVerdict v;
  v.bound = plan.bound(theta);
  v.threshold = plan.threshold_of_theta(theta);
  v.estimate = estimate_tail(samples, plan.statistic, params, v.threshold, alpha);
  v.estimate.theta = theta;
  const double b = v.bound.value;
  v.pass = b >= 1.0 || v.estimate.ci_upper <= std::min(b, 1.0);
  v.tightness = v.estimate.p_hat > 0.0 ? b / v.estimate.p_hat
                                       : std::numeric_limits<double>::infinity();
  return v;
}

struct VerifyResult {
  std::string ensemble;
  Theorem theorem = Theorem::gaussian_series;
  Statistic statistic = Statistic::lambda_max_sum;
  BoundParams params;
  std::vector<TailVerdict> verdicts;

  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const TailVerdict& v) { return v.pass; });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(verdicts.begin(), verdicts.end(), [](const TailVerdict& v) { return !v.pass; }));
  }
};

/// Verdicts for one theorem over precomputed samples (common random numbers
/// across theta and theorems).
inline VerifyResult verify_samples(const PreparedEnsemble& e, const std::vector<SampleSummary>& samples,
                                   Theorem theorem, const ThetaGrid& grid,
                                   const VerifyOptions& opt = {}) {
  const TheoremPlan plan = plan_theorem(e, theorem, opt);
  VerifyResult r;
  r.ensemble = e.spec().name;
  r.theorem = theorem;
  r.statistic = plan.statistic;
  r.params = plan.params;
  for (double theta : resolve_theta_grid(grid, plan, samples, e.params())) {
    if (theta < plan.theta_lo || theta > plan.theta_hi)
      throw DomainError("theta = " + std::to_string(theta) + " outside the valid range [" +
                        std::to_string(plan.theta_lo) + ", " + std::to_string(plan.theta_hi) +
                        "] of " + std::string(to_string(theorem)));
    r.verdicts.push_back(make_verdict(plan, samples, e.params(), theta, opt.alpha));
  }
  return r;
}

inline VerifyResult verify(const PreparedEnsemble& e, Theorem theorem, const ThetaGrid& grid,
                           std::size_t trials, std::uint64_t seed, const VerifyOptions& opt = {}) {
  if (trials < 1) throw DomainError("verify: trials must be >= 1");
  plan_theorem(e, theorem, opt);  // reject incompatible pairings before sampling
  return verify_samples(e, sample_summaries(e, trials, seed, opt.workers), theorem, grid, opt);
}

}  // namespace ttb
