#pragma once

/// \file
/// Closed-form right-hand sides of the tensor tail and expectation bounds.
///
/// Every evaluator takes the hypothesis statistics of an ensemble (total
/// variance, uniform bound T, dimension product, summand count, means) and a
/// threshold, and returns the raw bound value. Values may exceed 1; clamping
/// is left to report rendering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "ttb/error.hpp"
#include "ttb/spectral.hpp"
#include "ttb/tensor.hpp"

namespace ttb {

enum class Theorem {
  gaussian_series,           // lambda_max, one-sided
  gaussian_series_norm,      // spectral norm, two-sided
  rectangular_series,        // spectral norm of a rectangular series via dilation
  nonuniform_gaussian,       // spectral norm of a Gaussian tensor with entrywise variances
  chernoff1_upper,
  chernoff1_lower,
  chernoff2_upper,
  chernoff2_lower,
  bernstein_bounded,         // general form
  bernstein_bounded_auto,    // regime simplification picked by theta vs sigma^2/T
  bernstein_subexp,
  bernstein_subexp_auto,
  azuma,
  mcdiarmid,
  hoeffding,
  master,
};

inline constexpr std::pair<Theorem, std::string_view> kTheoremTags[] = {
    {Theorem::gaussian_series, "gaussian"},
    {Theorem::gaussian_series_norm, "gaussian-norm"},
    {Theorem::rectangular_series, "rectangular"},
    {Theorem::nonuniform_gaussian, "nonuniform-gaussian"},
    {Theorem::chernoff1_upper, "chernoff1-upper"},
    {Theorem::chernoff1_lower, "chernoff1-lower"},
    {Theorem::chernoff2_upper, "chernoff2-upper"},
    {Theorem::chernoff2_lower, "chernoff2-lower"},
    {Theorem::bernstein_bounded, "bernstein-bounded"},
    {Theorem::bernstein_bounded_auto, "bernstein-bounded-auto"},
    {Theorem::bernstein_subexp, "bernstein-subexp"},
    {Theorem::bernstein_subexp_auto, "bernstein-subexp-auto"},
    {Theorem::azuma, "azuma"},
    {Theorem::mcdiarmid, "mcdiarmid"},
    {Theorem::hoeffding, "hoeffding"},
    {Theorem::master, "master"},
};

inline std::string_view to_string(Theorem t) {
  for (const auto& [k, v] : kTheoremTags)
    if (k == t) return v;
  return "unknown";
}

inline std::optional<Theorem> parse_theorem(std::string_view tag) {
  for (const auto& [k, v] : kTheoremTags)
    if (v == tag) return k;
  return std::nullopt;
}

struct BoundParams {
  std::uint64_t dim_product = 1;  // product of the row dims (or of I_m + J_m after dilation)
  double sigma_sq = 0.0;
  double T = 1.0;
  std::uint64_t n = 1;
  double mu_max = 0.0;
  double mu_min = 0.0;
  double mu_bar_max = 0.0;
  double mu_bar_min = 0.0;

  void validate() const {
    if (dim_product < 1) throw DomainError("dim_product must be >= 1");
    if (!(sigma_sq >= 0.0)) throw DomainError("sigma_sq must be >= 0");
    if (!(T > 0.0)) throw DomainError("T must be > 0");
    if (n < 1) throw DomainError("n must be >= 1");
    if (mu_min > mu_max) throw DomainError("mu_min must not exceed mu_max");
    if (mu_bar_min > mu_bar_max) throw DomainError("mu_bar_min must not exceed mu_bar_max");
  }

  double dims() const { return static_cast<double>(dim_product); }
};

struct BoundValue {
  double value = 0.0;
  Theorem theorem = Theorem::master;
  BoundParams params;
  double theta = 0.0;
};

enum class Regime { automatic, general, small, large };

namespace detail {

inline void require_theta_nonneg(double theta, const char* who) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw DomainError(std::string(who) + ": theta must be finite and >= 0, got " +
                      std::to_string(theta));
}

inline void require_sigma(const BoundParams& p, double theta, const char* who) {
  if (p.sigma_sq == 0.0 && theta > 0.0)
    throw DomainError(std::string(who) + ": degenerate ensemble with sigma^2 = 0");
}

inline BoundValue make(double v, Theorem t, const BoundParams& p, double theta) {
  return {v, t, p, theta};
}

}  // namespace detail

/// dim * exp(-theta^2 / (2 sigma^2)), doubled for the two-sided norm version.
inline BoundValue gaussian_series_bound(const BoundParams& p, double theta, bool two_sided = false) {
  p.validate();
  detail::require_theta_nonneg(theta, "gaussian_series_bound");
  detail::require_sigma(p, theta, "gaussian_series_bound");
  const double e = theta == 0.0 ? 0.0 : -theta * theta / (2.0 * p.sigma_sq);
  const double v = (two_sided ? 2.0 : 1.0) * p.dims() * std::exp(e);
  return detail::make(v, two_sided ? Theorem::gaussian_series_norm : Theorem::gaussian_series,
                      p, theta);
}

/// Variance and dimension factor for a rectangular series sum_i alpha_i A_i:
/// sigma^2 = max(||sum A A^H||, ||sum A^H A||), dim_product = prod (I_m + J_m).
inline BoundParams rectangular_series_params(const std::vector<DenseTensor>& coeffs) {
  if (coeffs.empty()) throw DomainError("rectangular_series_params: empty coefficient list");
  const Shape& s = coeffs.front().shape();
  if (s.row_dims().size() != s.col_dims().size())
    throw ShapeError("rectangular_series_params: row and column mode counts differ in " +
                     s.str());
  Matrix left = Matrix::Zero(static_cast<Eigen::Index>(s.row_size()),
                             static_cast<Eigen::Index>(s.row_size()));
  Matrix right = Matrix::Zero(static_cast<Eigen::Index>(s.col_size()),
                              static_cast<Eigen::Index>(s.col_size()));
  for (const DenseTensor& a : coeffs) {
    if (!(a.shape() == s))
      throw ShapeError("rectangular_series_params: shape mismatch " + a.shape().str() + " vs " +
                       s.str());
    const Matrix m = a.matrix();
    left += m * m.adjoint();
    right += m.adjoint() * m;
  }
  BoundParams p;
  p.sigma_sq = std::max(detail::eigenvalues_of(left).front(), detail::eigenvalues_of(right).front());
  p.dim_product = 1;
  for (std::size_t m = 0; m < s.row_dims().size(); ++m)
    p.dim_product *= s.row_dims()[m] + s.col_dims()[m];
  p.n = coeffs.size();
  return p;
}

/// Largest squared Frobenius norm over all row slices and column slices.
inline double nonuniform_gaussian_sigma(const DenseTensor& a) {
  const std::size_t rows = a.shape().row_size();
  const std::size_t cols = a.shape().col_size();
  std::vector<double> row(rows, 0.0), col(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = std::norm(a(r, c));
      row[r] += v;
      col[c] += v;
    }
  double s = 0.0;
  for (double v : row) s = std::max(s, v);
  for (double v : col) s = std::max(s, v);
  return s;
}

/// (sigma^2, 2 sigma^2 log(2e dim)) bracketing E||X||^2 for a Gaussian series.
inline std::pair<double, double> expectation_norm_sandwich(const BoundParams& p) {
  p.validate();
  if (p.sigma_sq == 0.0) return {0.0, 0.0};
  return {p.sigma_sq, 2.0 * p.sigma_sq * std::log(2.0 * std::exp(1.0) * p.dims())};
}

/// Kullback-Leibler divergence between Bernoulli(a) and Bernoulli(b).
inline double binary_divergence(double a, double b) {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
    throw DomainError("binary_divergence requires a, b in (0, 1), got " + std::to_string(a) +
                      ", " + std::to_string(b));
  return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

namespace detail {

/// Binary divergence with the endpoint limits a in {0, 1} (b stays interior).
inline double binary_divergence_closed(double a, double b) {
  if (!(b > 0.0 && b < 1.0)) throw DomainError("reference mean must lie in (0, 1)");
  if (a == b) return 0.0;
  if (a == 1.0) return -std::log(b);
  if (a == 0.0) return -std::log(1.0 - b);
  return binary_divergence(a, b);
}

inline void require_unit_scale(const BoundParams& p, const char* who) {
  if (std::abs(p.T - 1.0) > 1e-12)
    throw DomainError(std::string(who) + " expects summands normalized to T = 1");
}

}  // namespace detail

/// dim * exp(-n D(theta || mu_bar_max)) for mu_bar_max <= theta <= 1.
inline BoundValue chernoff_i_upper(const BoundParams& p, double theta) {
  p.validate();
  detail::require_unit_scale(p, "chernoff_i_upper");
  if (!(theta >= p.mu_bar_max && theta <= 1.0))
    throw DomainError("chernoff_i_upper: theta must lie in [mu_bar_max, 1] = [" +
                      std::to_string(p.mu_bar_max) + ", 1], got " + std::to_string(theta));
  const double d = detail::binary_divergence_closed(theta, p.mu_bar_max);
  return detail::make(p.dims() * std::exp(-static_cast<double>(p.n) * d),
                      Theorem::chernoff1_upper, p, theta);
}

/// dim * exp(-n D(theta || mu_bar_min)) for 0 <= theta <= mu_bar_min.
inline BoundValue chernoff_i_lower(const BoundParams& p, double theta) {
  p.validate();
  detail::require_unit_scale(p, "chernoff_i_lower");
  if (!(theta >= 0.0 && theta <= p.mu_bar_min))
    throw DomainError("chernoff_i_lower: theta must lie in [0, mu_bar_min] = [0, " +
                      std::to_string(p.mu_bar_min) + "], got " + std::to_string(theta));
  const double d = detail::binary_divergence_closed(theta, p.mu_bar_min);
  return detail::make(p.dims() * std::exp(-static_cast<double>(p.n) * d),
                      Theorem::chernoff1_lower, p, theta);
}

/// dim * (e^theta / (1+theta)^(1+theta))^(mu_max/T), theta >= 0.
inline BoundValue chernoff_ii_upper(const BoundParams& p, double theta) {
  p.validate();
  detail::require_theta_nonneg(theta, "chernoff_ii_upper");
  if (p.mu_max < 0.0) throw DomainError("chernoff_ii_upper: mu_max must be >= 0");
  const double e = theta - (1.0 + theta) * std::log1p(theta);
  return detail::make(p.dims() * std::exp(e * p.mu_max / p.T), Theorem::chernoff2_upper, p,
                      theta);
}

/// dim * (e^-theta / (1-theta)^(1-theta))^(mu_min/T), theta in [0, 1].
inline BoundValue chernoff_ii_lower(const BoundParams& p, double theta) {
  p.validate();
  if (!(theta >= 0.0 && theta <= 1.0))
    throw DomainError("chernoff_ii_lower: theta must lie in [0, 1], got " +
                      std::to_string(theta));
  if (p.mu_min < 0.0) throw DomainError("chernoff_ii_lower: mu_min must be >= 0");
  // (1 - theta)^(1 - theta) -> 1 as theta -> 1
  const double tail = theta == 1.0 ? 0.0 : (1.0 - theta) * std::log1p(-theta);
  const double e = -theta - tail;
  return detail::make(p.dims() * std::exp(e * p.mu_min / p.T), Theorem::chernoff2_lower, p,
                      theta);
}

struct ChernoffConstant {
  double delta = 0.0;  // root of e^delta = 1/delta
  double C = 0.0;      // e^{e^delta} / delta
};

inline ChernoffConstant chernoff_expectation_constant() {
  auto f = [](double d) { return std::exp(d) - 1.0 / d; };
  boost::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      f, 0.1, 1.0, boost::math::tools::eps_tolerance<double>(52), iters);
  const double delta = 0.5 * (lo + hi);
  return {delta, std::exp(std::exp(delta)) / delta};
}

/// (mu_max, C dim e^{-mu_max/T}) as stated for E lambda_max of a sum of
/// bounded PSD tensors.
inline std::pair<double, double> chernoff_expectation_bounds(const BoundParams& p) {
  p.validate();
  if (p.mu_max < 0.0) throw DomainError("chernoff_expectation_bounds: mu_max must be >= 0");
  const double C = chernoff_expectation_constant().C;
  return {p.mu_max, C * p.dims() * std::exp(-p.mu_max / p.T)};
}

namespace detail {

struct RegimeForms {
  double general;
  double small;  // valid for theta <= sigma^2 / T
  double large;  // valid for theta >= sigma^2 / T
};

inline BoundValue pick_regime(const BoundParams& p, double theta, Regime regime,
                              const RegimeForms& f, Theorem general_tag, Theorem auto_tag,
                              const char* who) {
  const double boundary = p.sigma_sq / p.T;
  switch (regime) {
    case Regime::general:
      return make(f.general, general_tag, p, theta);
    case Regime::small:
      if (theta > boundary)
        throw DomainError(std::string(who) + ": small-deviation form needs theta <= sigma^2/T = " +
                          std::to_string(boundary));
      return make(f.small, auto_tag, p, theta);
    case Regime::large:
      if (theta < boundary)
        throw DomainError(std::string(who) + ": large-deviation form needs theta >= sigma^2/T = " +
                          std::to_string(boundary));
      return make(f.large, auto_tag, p, theta);
    case Regime::automatic: {
      const double picked = theta <= boundary ? f.small : f.large;
      if (f.general > picked * (1.0 + 1e-12))
        throw std::logic_error(std::string(who) + ": general form exceeds its regime simplification");
      return make(picked, auto_tag, p, theta);
    }
  }
  throw DomainError("unknown regime");
}

}  // namespace detail

/// Bounded-lambda_max Bernstein bound.
/// general: dim exp(-(theta^2/2) / (sigma^2 + T theta/3));
/// small: dim exp(-3 theta^2 / (8 sigma^2)); large: dim exp(-3 theta / (8 T)).
inline BoundValue bernstein_bounded(const BoundParams& p, double theta,
                                    Regime regime = Regime::general) {
  p.validate();
  detail::require_theta_nonneg(theta, "bernstein_bounded");
  detail::require_sigma(p, theta, "bernstein_bounded");
  if (theta == 0.0) {
    const Theorem tag = regime == Regime::general ? Theorem::bernstein_bounded
                                                  : Theorem::bernstein_bounded_auto;
    return detail::make(p.dims(), tag, p, theta);
  }
  const double s2 = p.sigma_sq;
  const detail::RegimeForms f{
      p.dims() * std::exp(-0.5 * theta * theta / (s2 + p.T * theta / 3.0)),
      p.dims() * std::exp(-3.0 * theta * theta / (8.0 * s2)),
      p.dims() * std::exp(-3.0 * theta / (8.0 * p.T))};
  return detail::pick_regime(p, theta, regime, f, Theorem::bernstein_bounded,
                             Theorem::bernstein_bounded_auto, "bernstein_bounded");
}

/// Subexponential Bernstein bound.
/// general: dim exp(-(theta^2/2) / (sigma^2 + T theta));
/// small: dim exp(-theta^2 / (4 sigma^2)); large: dim exp(-theta / (4 T)).
inline BoundValue bernstein_subexponential(const BoundParams& p, double theta,
                                           Regime regime = Regime::general) {
  p.validate();
  detail::require_theta_nonneg(theta, "bernstein_subexponential");
  detail::require_sigma(p, theta, "bernstein_subexponential");
  if (theta == 0.0) {
    const Theorem tag = regime == Regime::general ? Theorem::bernstein_subexp
                                                  : Theorem::bernstein_subexp_auto;
    return detail::make(p.dims(), tag, p, theta);
  }
  const double s2 = p.sigma_sq;
  const detail::RegimeForms f{p.dims() * std::exp(-0.5 * theta * theta / (s2 + p.T * theta)),
                              p.dims() * std::exp(-theta * theta / (4.0 * s2)),
                              p.dims() * std::exp(-theta / (4.0 * p.T))};
  return detail::pick_regime(p, theta, regime, f, Theorem::bernstein_subexp,
                             Theorem::bernstein_subexp_auto, "bernstein_subexponential");
}

/// G(x) = int_0^x e^{-s^2} ds by adaptive Gauss-Kronrod; x may be +infinity.
inline double gaussian_integral(double x) {
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -gaussian_integral(-x);
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double s) { return std::exp(-s * s); }, 0.0, x, 15, 1e-14, &err);
  return v;
}

/// 2 dim (sigma G(sigma / 2T) + 2T e^{-sigma^2 / 4T^2}).
inline double subexp_expectation_upper(const BoundParams& p) {
  p.validate();
  const double sigma = std::sqrt(p.sigma_sq);
  return 2.0 * p.dims() *
         (sigma * gaussian_integral(sigma / (2.0 * p.T)) +
          2.0 * p.T * std::exp(-p.sigma_sq / (4.0 * p.T * p.T)));
}

/// dim * exp(-theta^2 / (8 sigma^2)); shared by the Azuma, McDiarmid and
/// Hoeffding statements.
inline BoundValue azuma_mcdiarmid_bound(const BoundParams& p, double theta,
                                        Theorem tag = Theorem::azuma) {
  p.validate();
  detail::require_theta_nonneg(theta, "azuma_mcdiarmid_bound");
  detail::require_sigma(p, theta, "azuma_mcdiarmid_bound");
  const double e = theta == 0.0 ? 0.0 : -theta * theta / (8.0 * p.sigma_sq);
  return detail::make(p.dims() * std::exp(e), tag, p, theta);
}

/// Default transform grid: log-spaced over [1e-4, 50].
inline std::vector<double> default_t_grid(std::size_t points = 256) {
  std::vector<double> g(points);
  const double lo = std::log(1e-4), hi = std::log(50.0);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
  return g;
}

/// dim * inf_t exp(-t theta + g(t)), with g(t) an upper bound on the largest
/// eigenvalue of the summed cumulant-generating functions. The infimum is
/// taken over the grid and then polished by golden-section search around the
/// best grid point.
inline BoundValue master_bound_numeric(const std::function<double(double)>& log_mgf_max_eig,
                                       double theta, std::uint64_t dim_product,
                                       std::vector<double> t_grid = default_t_grid()) {
  if (t_grid.empty()) throw DomainError("master_bound_numeric: empty t grid");
  std::sort(t_grid.begin(), t_grid.end());
  if (!(t_grid.front() > 0.0)) throw DomainError("master_bound_numeric: t grid must be positive");
  auto exponent = [&](double t) {
    const double g = log_mgf_max_eig(t);
    if (!std::isfinite(g))
      throw DomainError("master_bound_numeric: non-finite g(t) at t = " + std::to_string(t));
    return -t * theta + g;
  };
  std::size_t best = 0;
  double best_e = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double e = exponent(t_grid[k]);
    if (e < best_e) {
      best_e = e;
      best = k;
    }
  }
  double a = t_grid[best == 0 ? 0 : best - 1];
  double b = t_grid[best + 1 < t_grid.size() ? best + 1 : best];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = exponent(c), fd = exponent(d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = exponent(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = exponent(d);
    }
  }
  best_e = std::min({best_e, fc, fd});
  BoundParams p;
  p.dim_product = dim_product;
  return detail::make(static_cast<double>(dim_product) * std::exp(best_e), Theorem::master, p,
                      theta);
}

}  // namespace ttb
