#pragma once

/// \file
/// Seedable random-tensor ensembles whose draws satisfy the hypotheses of
/// the tail theorems by construction, together with the exact hypothesis
/// statistics (total variance, uniform bound, means) of each ensemble.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/QR>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include "ttb/bounds.hpp"
#include "ttb/error.hpp"
#include "ttb/rng.hpp"
#include "ttb/spectral.hpp"
#include "ttb/tensor.hpp"

namespace ttb {

enum class EnsembleKind {
  gaussian_series,
  rademacher_series,
  hadamard_gaussian,
  psd_bounded,
  centered_bounded,
  subexponential,
  azuma_martingale,
  mcdiarmid_function,
};

inline constexpr std::pair<EnsembleKind, std::string_view> kEnsembleTags[] = {
    {EnsembleKind::gaussian_series, "gaussian_series"},
    {EnsembleKind::rademacher_series, "rademacher_series"},
    {EnsembleKind::hadamard_gaussian, "hadamard_gaussian"},
    {EnsembleKind::psd_bounded, "psd_bounded"},
    {EnsembleKind::centered_bounded, "centered_bounded"},
    {EnsembleKind::subexponential, "subexponential"},
    {EnsembleKind::azuma_martingale, "azuma_martingale"},
    {EnsembleKind::mcdiarmid_function, "mcdiarmid_function"},
};

inline std::string_view to_string(EnsembleKind k) {
  for (const auto& [kind, tag] : kEnsembleTags)
    if (kind == k) return tag;
  return "unknown";
}

inline std::optional<EnsembleKind> parse_ensemble_kind(std::string_view tag) {
  for (const auto& [kind, t] : kEnsembleTags)
    if (t == tag) return kind;
  return std::nullopt;
}

struct EnsembleSpec {
  std::string name;
  EnsembleKind kind = EnsembleKind::gaussian_series;
  /// Fixed coefficients A_i, or the single variance mask for hadamard_gaussian.
  std::vector<DenseTensor> coefficients;
  double T = 1.0;
  /// Summand count for psd_bounded; other kinds use one summand per coefficient.
  std::size_t n = 0;
  /// Row dims of the psd_bounded summands.
  Dims dims;
  /// psd_bounded eigenvalue law: "uniform", "beta" or "anisotropic".
  std::string profile = "uniform";
  double beta_a = 2.0;
  double beta_b = 2.0;
  /// azuma_martingale: first step unscaled, then tanh(lambda_max(prefix)).
  bool adaptive = true;
  /// subexponential radial law s = min(scale * Exp(1), cap).
  double subexp_scale = 1.0 / std::numbers::sqrt2;
  double subexp_cap = 30.0;
  std::optional<std::uint64_t> seed;
};

/// Hypothesis statistics of an ensemble, computed without sampling except
/// where provenance says "estimated".
struct EnsembleParams {
  BoundParams bound;
  bool rectangular = false;  // summands are not square Hermitian; statistics act on the dilation
  std::string provenance = "exact";
  /// E[sum] = mean_shift * I when finite; NaN when the mean is not isotropic.
  double mean_shift = 0.0;
};

/// Spectral statistics of one sampled sum; computed once and shared by every
/// theta and theorem.
struct SampleSummary {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double spectral_norm = 0.0;
};

namespace detail {

inline Matrix haar_unitary(std::size_t d, RngStream& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix g(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& rr = qr.matrixQR();
  for (Eigen::Index k = 0; k < n; ++k) {
    const complex r = rr(k, k);
    const double a = std::abs(r);
    q.col(k) *= a > 0.0 ? r / a : complex(1.0, 0.0);
  }
  return q;
}

/// E[min(scale * E, cap)^p] for E ~ Exp(1), by quadrature.
inline double capped_exponential_moment(double scale, double cap, int p) {
  const double c = cap / scale;
  const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [p](double x) { return std::pow(x, p) * std::exp(-x); }, 0.0, c, 15, 1e-13);
  return std::pow(scale, p) * (body + std::pow(c, p) * std::exp(-c));
}

inline Matrix square_sum(const std::vector<Matrix>& a) {
  Matrix s = Matrix::Zero(a.front().rows(), a.front().cols());
  for (const Matrix& m : a) s += m * m;
  return s;
}

inline bool is_hermitian_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

}  // namespace detail

/// An ensemble with validated, unfolded coefficients ready for fast sampling.
class PreparedEnsemble {
 public:
  explicit PreparedEnsemble(EnsembleSpec spec) : spec_(std::move(spec)) {
    validate_and_unfold();
    compute_params();
  }

  const EnsembleSpec& spec() const noexcept { return spec_; }
  const EnsembleParams& params() const noexcept { return params_; }
  const Shape& sum_shape() const noexcept { return shape_; }
  std::size_t summand_count() const noexcept { return summands_; }
  const std::vector<Matrix>& coefficient_matrices() const noexcept { return coeffs_; }

  /// Calls f(i, X_i) for every summand of one draw, X_i as an unfolded matrix.
  template <typename F>
  void for_each_summand(RngStream& rng, F&& f) const {
    switch (spec_.kind) {
      case EnsembleKind::gaussian_series:
        for (std::size_t i = 0; i < coeffs_.size(); ++i) f(i, Matrix(rng.normal() * coeffs_[i]));
        return;
      case EnsembleKind::rademacher_series:
      case EnsembleKind::centered_bounded:
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
          f(i, Matrix(rng.rademacher() * coeffs_[i]));
        return;
      case EnsembleKind::mcdiarmid_function:
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
          f(i, Matrix(0.5 * rng.rademacher() * coeffs_[i]));
        return;
      case EnsembleKind::hadamard_gaussian: {
        const Matrix& mask = coeffs_.front();
        Matrix x(mask.rows(), mask.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r)
          for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.normal() * mask(r, c);
        f(0, std::move(x));
        return;
      }
      case EnsembleKind::psd_bounded:
        for (std::size_t i = 0; i < summands_; ++i) f(i, psd_summand(rng));
        return;
      case EnsembleKind::subexponential:
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
          const double s = std::min(spec_.subexp_scale * rng.exponential(), spec_.subexp_cap);
          f(i, Matrix(s * rng.rademacher() * coeffs_[i]));
        }
        return;
      case EnsembleKind::azuma_martingale: {
        Matrix prefix = Matrix::Zero(coeffs_.front().rows(), coeffs_.front().cols());
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
          // step one is unscaled; later steps follow tanh of the running lambda_max
          const double s = !spec_.adaptive || i == 0
                               ? 1.0
                               : std::tanh(detail::eigenvalues_of(prefix).front());
          Matrix x = s * rng.rademacher() * coeffs_[i];
          prefix += x;
          f(i, std::move(x));
        }
        return;
      }
    }
  }

  std::vector<Matrix> draw_summands(RngStream& rng) const {
    std::vector<Matrix> out;
    for_each_summand(rng, [&](std::size_t, Matrix x) { out.push_back(std::move(x)); });
    return out;
  }

  /// Unfolded sum of one draw.
  Matrix draw(RngStream& rng) const {
    Matrix s = Matrix::Zero(static_cast<Eigen::Index>(shape_.row_size()),
                            static_cast<Eigen::Index>(shape_.col_size()));
    for_each_summand(rng, [&](std::size_t, const Matrix& x) { s += x; });
    return s;
  }

  DenseTensor draw_tensor(RngStream& rng) const { return DenseTensor::refold(draw(rng), shape_); }

  SampleSummary summarize(const Matrix& s) const {
    SampleSummary out;
    if (params_.rectangular) {
      out.spectral_norm = detail::largest_singular_value(s);
      out.lambda_max = out.spectral_norm;
      out.lambda_min = -out.spectral_norm;
    } else {
      const auto ev = detail::eigenvalues_of(s);
      out.lambda_max = ev.front();
      out.lambda_min = ev.back();
      out.spectral_norm = std::max(std::abs(ev.front()), std::abs(ev.back()));
    }
    return out;
  }

  SampleSummary sample_summary(RngStream& rng) const { return summarize(draw(rng)); }

  /// Checks the theorem hypothesis on every summand of one draw; throws
  /// HypothesisError on violation.
  void certify_draw(RngStream& rng, double tol = 1e-10) const {
    for_each_summand(rng, [&](std::size_t i, const Matrix& x) {
      auto fail = [&](const std::string& what) {
        throw HypothesisError(spec_.name + ": summand " + std::to_string(i) + " " + what);
      };
      switch (spec_.kind) {
        case EnsembleKind::psd_bounded: {
          const auto ev = detail::eigenvalues_of(x);
          if (ev.back() < -1e-12 * spec_.T) fail("is not positive semidefinite");
          if (ev.front() > spec_.T * (1.0 + 1e-12)) fail("exceeds lambda_max <= T");
          break;
        }
        case EnsembleKind::centered_bounded:
          if (detail::eigenvalues_of(x).front() > spec_.T * (1.0 + 1e-12))
            fail("exceeds lambda_max <= T");
          break;
        case EnsembleKind::azuma_martingale:
        case EnsembleKind::mcdiarmid_function:
        case EnsembleKind::rademacher_series: {
          const Matrix gap = coeffs_[i] * coeffs_[i] - x * x;
          if (detail::eigenvalues_of(gap).back() < -tol * std::max(1.0, gap.cwiseAbs().maxCoeff()))
            fail("violates X^2 <= A^2");
          break;
        }
        default:
          break;
      }
    });
  }

 private:
  Matrix psd_summand(RngStream& rng) const {
    const std::size_t d = shape_.row_size();
    const auto n = static_cast<Eigen::Index>(d);
    if (spec_.profile == "anisotropic") {
      Eigen::VectorXcd v(n);
      for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.complex_normal() / std::sqrt(double(d));
      v(0) += 1.0;
      v.normalize();
      const double scale = spec_.T * rng.uniform();
      Matrix x = scale * (v * v.adjoint());
      return 0.5 * (x + x.adjoint().eval());
    }
    const Matrix u = detail::haar_unitary(d, rng);
    Eigen::VectorXd lam(n);
    for (Eigen::Index k = 0; k < n; ++k)
      lam(k) = spec_.T * (spec_.profile == "beta" ? rng.beta(spec_.beta_a, spec_.beta_b)
                                                  : rng.uniform());
    Matrix x = u * lam.asDiagonal() * u.adjoint();
    return 0.5 * (x + x.adjoint().eval());
  }

  void validate_and_unfold() {
    const std::string& who = spec_.name.empty() ? std::string(to_string(spec_.kind)) : spec_.name;
    if (!(spec_.T > 0.0)) throw ConfigError(who + ": T must be > 0");
    if (spec_.kind == EnsembleKind::psd_bounded) {
      if (spec_.dims.empty()) throw ConfigError(who + ": psd_bounded needs dims");
      if (spec_.n < 1) throw ConfigError(who + ": psd_bounded needs n >= 1");
      if (spec_.profile != "uniform" && spec_.profile != "beta" && spec_.profile != "anisotropic")
        throw ConfigError(who + ": unknown psd_bounded profile '" + spec_.profile + "'");
      if (spec_.profile == "beta" && !(spec_.beta_a > 0.0 && spec_.beta_b > 0.0))
        throw ConfigError(who + ": beta profile needs positive shape parameters");
      shape_ = Shape::square(spec_.dims);
      summands_ = spec_.n;
      return;
    }
    if (spec_.coefficients.empty()) throw ConfigError(who + ": empty coefficient list");
    shape_ = spec_.coefficients.front().shape();
    for (const DenseTensor& a : spec_.coefficients) {
      if (!(a.shape() == shape_))
        throw ShapeError(who + ": coefficient shape " + a.shape().str() + " differs from " +
                         shape_.str());
      coeffs_.emplace_back(a.matrix());
    }
    summands_ = coeffs_.size();

    const bool equal_modes = shape_.row_dims().size() == shape_.col_dims().size();
    switch (spec_.kind) {
      case EnsembleKind::gaussian_series:
      case EnsembleKind::rademacher_series:
        hermitian_ = true;
        for (const Matrix& m : coeffs_) hermitian_ = hermitian_ && detail::is_hermitian_matrix(m);
        if (!hermitian_ && !equal_modes)
          throw ShapeError(who + ": non-Hermitian series needs equal row and column mode counts");
        if (hermitian_)
          for (Matrix& m : coeffs_) m = 0.5 * (m + m.adjoint().eval());
        break;
      case EnsembleKind::hadamard_gaussian:
        if (coeffs_.size() != 1) throw ConfigError(who + ": hadamard_gaussian takes one mask");
        if (!equal_modes)
          throw ShapeError(who + ": mask needs equal row and column mode counts");
        hermitian_ = false;
        break;
      default:
        for (Matrix& m : coeffs_) {
          if (!detail::is_hermitian_matrix(m))
            throw DomainError(who + ": coefficients must be Hermitian");
          m = 0.5 * (m + m.adjoint().eval());
        }
        hermitian_ = true;
        break;
    }
    if (spec_.kind == EnsembleKind::centered_bounded || spec_.kind == EnsembleKind::subexponential) {
      for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const double norm = detail::largest_singular_value(coeffs_[i]);
        if (norm > spec_.T * (1.0 + 1e-12))
          throw HypothesisError(who + ": ||A_" + std::to_string(i) + "|| = " +
                                std::to_string(norm) + " exceeds T = " + std::to_string(spec_.T));
      }
    }
    if (spec_.kind == EnsembleKind::subexponential) {
      if (!(spec_.subexp_scale > 0.0 && spec_.subexp_cap > 0.0))
        throw ConfigError(who + ": subexponential scale and cap must be positive");
      for (int p = 2; p <= 8; ++p) {
        const double m = detail::capped_exponential_moment(spec_.subexp_scale, spec_.subexp_cap, p);
        const double limit = boost::math::factorial<double>(static_cast<unsigned>(p)) / 2.0;
        if (m > limit * (1.0 + 1e-12))
          throw HypothesisError(who + ": moment condition fails at p = " + std::to_string(p) +
                                " (E s^p = " + std::to_string(m) + " > p!/2 = " +
                                std::to_string(limit) + ")");
      }
    }
  }

  void compute_params() {
    BoundParams& p = params_.bound;
    p.T = spec_.T;
    p.n = summands_;
    p.dim_product = shape_.row_size();
    switch (spec_.kind) {
      case EnsembleKind::hadamard_gaussian: {
        params_.rectangular = true;
        p.sigma_sq = nonuniform_gaussian_sigma(spec_.coefficients.front());
        p.dim_product = 1;
        for (std::size_t m = 0; m < shape_.row_dims().size(); ++m)
          p.dim_product *= shape_.row_dims()[m] + shape_.col_dims()[m];
        return;
      }
      case EnsembleKind::psd_bounded:
        psd_params();
        return;
      default:
        break;
    }
    if (!hermitian_) {
      params_.rectangular = true;
      const BoundParams r = rectangular_series_params(spec_.coefficients);
      p.sigma_sq = r.sigma_sq;
      p.dim_product = r.dim_product;
      return;
    }
    p.sigma_sq = detail::eigenvalues_of(detail::square_sum(coeffs_)).front();
  }

  void psd_params() {
    BoundParams& p = params_.bound;
    if (spec_.profile == "anisotropic") {
      // The mean of a biased rank-one draw has no closed form; estimate it
      // from a pilot run on a reserved substream.
      constexpr std::size_t pilot = 20000;
      RngStream rng(spec_.seed.value_or(0) ^ 0xA5A5A5A5A5A5A5A5ull, ~std::uint64_t{0});
      const auto d = static_cast<Eigen::Index>(shape_.row_size());
      Matrix mean = Matrix::Zero(d, d);
      for (std::size_t k = 0; k < pilot; ++k) mean += psd_summand(rng);
      mean /= static_cast<double>(pilot);
      const auto ev = detail::eigenvalues_of(mean);
      p.mu_bar_max = ev.front();
      p.mu_bar_min = std::max(ev.back(), 0.0);
      params_.provenance = "estimated";
      params_.mean_shift = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double m = spec_.profile == "beta" ? spec_.beta_a / (spec_.beta_a + spec_.beta_b) : 0.5;
      p.mu_bar_max = p.mu_bar_min = spec_.T * m;
      params_.mean_shift = static_cast<double>(summands_) * spec_.T * m;
    }
    p.mu_max = static_cast<double>(summands_) * p.mu_bar_max;
    p.mu_min = static_cast<double>(summands_) * p.mu_bar_min;
    p.sigma_sq = 0.0;
  }

  EnsembleSpec spec_;
  Shape shape_{Dims{1}, Dims{1}};
  std::vector<Matrix> coeffs_;
  std::size_t summands_ = 0;
  bool hermitian_ = true;
  EnsembleParams params_;
};

inline EnsembleParams compute_params(const EnsembleSpec& spec) {
  return PreparedEnsemble(spec).params();
}

namespace detail {

inline HermitianTensor as_hermitian(const Matrix& m, const Dims& dims) {
  return HermitianTensor::from_matrix(m, dims);
}

inline void require_kind(const EnsembleSpec& spec, std::initializer_list<EnsembleKind> kinds,
                         const char* who) {
  for (EnsembleKind k : kinds)
    if (spec.kind == k) return;
  throw ConfigError(std::string(who) + " does not accept ensemble kind " +
                    std::string(to_string(spec.kind)));
}

}  // namespace detail

/// sum_i alpha_i A_i with alpha_i standard normal or Rademacher.
inline HermitianTensor sample_series(const EnsembleSpec& spec, RngStream& rng) {
  detail::require_kind(spec, {EnsembleKind::gaussian_series, EnsembleKind::rademacher_series},
                       "sample_series");
  PreparedEnsemble e(spec);
  if (e.params().rectangular) throw DomainError("sample_series: coefficients are not Hermitian");
  return detail::as_hermitian(e.draw(rng), e.sum_shape().row_dims());
}

/// X o A with X entrywise standard normal.
inline DenseTensor sample_hadamard_gaussian(const DenseTensor& mask, RngStream& rng) {
  std::vector<complex> v(mask.size());
  auto a = mask.entries();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = rng.normal() * a[k];
  return DenseTensor(mask.shape(), std::move(v));
}

/// U Lambda U^H with U Haar and Lambda i.i.d. on [0, T].
inline HermitianTensor sample_psd_bounded(const Dims& dims, double T, RngStream& rng,
                                          const std::string& profile = "uniform") {
  EnsembleSpec s;
  s.kind = EnsembleKind::psd_bounded;
  s.dims = dims;
  s.T = T;
  s.n = 1;
  s.profile = profile;
  PreparedEnsemble e(s);
  return detail::as_hermitian(e.draw(rng), dims);
}

/// beta * A with beta Rademacher.
inline HermitianTensor sample_centered_bounded(const HermitianTensor& a, double T, RngStream& rng) {
  if (spectral_norm(a) > T * (1.0 + 1e-12))
    throw HypothesisError("sample_centered_bounded: ||A|| exceeds T");
  return scale(a, rng.rademacher());
}

/// s * beta * A with s = min(Exp(1)/sqrt(2), 30).
inline HermitianTensor sample_subexponential(const HermitianTensor& a, double T, RngStream& rng) {
  EnsembleSpec s;
  s.kind = EnsembleKind::subexponential;
  s.coefficients = {a.base()};
  s.T = T;
  PreparedEnsemble e(s);
  return detail::as_hermitian(e.draw(rng), a.dims());
}

inline std::vector<HermitianTensor> sample_azuma_sequence(const std::vector<HermitianTensor>& coeffs,
                                                          RngStream& rng, bool adaptive) {
  if (coeffs.empty()) throw ConfigError("sample_azuma_sequence: empty coefficient list");
  EnsembleSpec s;
  s.kind = EnsembleKind::azuma_martingale;
  s.adaptive = adaptive;
  for (const auto& a : coeffs) s.coefficients.push_back(a.base());
  PreparedEnsemble e(s);
  std::vector<HermitianTensor> out;
  for (const Matrix& m : e.draw_summands(rng)) out.push_back(detail::as_hermitian(m, coeffs.front().dims()));
  return out;
}

/// F(x) = sum_i x_i A_i with x_i uniform on {-1/2, +1/2}; E F = 0.
inline std::pair<HermitianTensor, HermitianTensor> mcdiarmid_instance(
    const std::vector<HermitianTensor>& weights, RngStream& rng) {
  if (weights.empty()) throw ConfigError("mcdiarmid_instance: empty weight list");
  EnsembleSpec s;
  s.kind = EnsembleKind::mcdiarmid_function;
  for (const auto& a : weights) s.coefficients.push_back(a.base());
  PreparedEnsemble e(s);
  const Dims& d = weights.front().dims();
  return {detail::as_hermitian(e.draw(rng), d), HermitianTensor(zero(Shape::square(d)))};
}

}  // namespace ttb
