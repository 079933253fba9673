#pragma once

/// \file
/// Randomized property suites for the tensor algebra and spectral calculus.
///
/// Each suite draws its own instances from a dedicated substream, records the
/// largest observed error, and counts violations of the tolerance. Library
/// errors raised while checking an instance count as violations.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ttb/random_tensors.hpp"
#include "ttb/spectral.hpp"
#include "ttb/tensor.hpp"

namespace ttb {

struct PropertyResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t violations = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string first_error;

  bool pass() const { return violations == 0 && instances > 0; }
};

struct SelftestOptions {
  std::uint64_t seed = 0x7e115a17u;
  std::size_t algebra_instances = 200;
  std::size_t spectral_instances = 100;
};

/// Contraction by explicit summation over every index tuple; shares no code
/// path with the unfolding-based product.
inline DenseTensor reference_einstein_product(const DenseTensor& a, const DenseTensor& b) {
  const Dims& I = a.shape().row_dims();
  const Dims& J = a.shape().col_dims();
  const Dims& K = b.shape().col_dims();
  if (J != b.shape().row_dims()) throw ShapeError("reference_einstein_product: modes differ");
  const Shape out_shape(I, K);
  const std::size_t ni = out_shape.row_size(), nk = out_shape.col_size();
  const std::size_t nj = a.shape().col_size();
  std::vector<complex> out(out_shape.size());
  std::vector<std::size_t> ai(I.size() + J.size()), bi(J.size() + K.size());
  for (std::size_t r = 0; r < ni; ++r) {
    const Dims i = multi_index(r, I);
    for (std::size_t c = 0; c < nk; ++c) {
      const Dims k = multi_index(c, K);
      complex s(0.0, 0.0);
      for (std::size_t m = 0; m < nj; ++m) {
        const Dims j = multi_index(m, J);
        std::copy(i.begin(), i.end(), ai.begin());
        std::copy(j.begin(), j.end(), ai.begin() + static_cast<std::ptrdiff_t>(I.size()));
        std::copy(j.begin(), j.end(), bi.begin());
        std::copy(k.begin(), k.end(), bi.begin() + static_cast<std::ptrdiff_t>(J.size()));
        s += a.at(ai) * b.at(bi);
      }
      out[r * nk + c] = s;
    }
  }
  return DenseTensor(out_shape, std::move(out));
}

namespace detail {

inline double rel_diff(const DenseTensor& x, const DenseTensor& y) {
  if (!(x.shape() == y.shape())) return std::numeric_limits<double>::infinity();
  double num = 0.0, den = 0.0;
  auto a = x.entries();
  auto b = y.entries();
  for (std::size_t k = 0; k < a.size(); ++k) {
    num = std::max(num, std::abs(a[k] - b[k]));
    den = std::max(den, std::abs(b[k]));
  }
  return num / std::max(den, 1e-300);
}

template <typename Derived1, typename Derived2>
double rel_diff_matrix(const Eigen::MatrixBase<Derived1>& x, const Eigen::MatrixBase<Derived2>& y) {
  const double den = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
  return (x - y).cwiseAbs().maxCoeff() / den;
}

/// Runs `check(rng)` for each instance; the check returns an error measure
/// compared against `tol`.
inline PropertyResult run_property(const std::string& name, std::size_t instances, double tol,
                                   std::uint64_t seed, std::uint64_t stream,
                                   const std::function<double(RngStream&)>& check) {
  PropertyResult r;
  r.name = name;
  r.tolerance = tol;
  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(seed, stream);
  for (std::size_t k = 0; k < instances; ++k) {
    ++r.instances;
    try {
      const double err = check(rng);
      r.max_error = std::max(r.max_error, std::isnan(err) ? std::numeric_limits<double>::infinity() : err);
      if (!(err <= tol)) ++r.violations;
    } catch (const std::exception& e) {
      ++r.violations;
      r.max_error = std::numeric_limits<double>::infinity();
      if (r.first_error.empty()) r.first_error = e.what();
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Random conforming pair with every tensor holding at most 16 entries.
inline std::pair<DenseTensor, DenseTensor> random_conforming_pair(RngStream& rng) {
  for (;;) {
    const auto mi = static_cast<std::size_t>(rng.uniform() * 3.0);
    const auto nj = 1 + static_cast<std::size_t>(rng.uniform() * 2.0);
    const auto lk = static_cast<std::size_t>(rng.uniform() * 3.0);
    if (mi + lk == 0) continue;
    const Dims I = random_dims(rng, mi, 3), J = random_dims(rng, nj, 3), K = random_dims(rng, lk, 3);
    auto prod = [](const Dims& d) {
      std::size_t p = 1;
      for (auto x : d) p *= x;
      return p;
    };
    if (prod(I) * prod(J) > 16 || prod(J) * prod(K) > 16) continue;
    return {random_tensor(Shape(I, J), rng), random_tensor(Shape(J, K), rng)};
  }
}

inline Dims random_square_dims(RngStream& rng) {
  for (;;) {
    const Dims d = random_dims(rng, 1 + static_cast<std::size_t>(rng.uniform() * 2.0), 4);
    std::size_t p = 1;
    for (auto x : d) p *= x;
    if (p >= 2 && p <= 16) return d;
  }
}

/// Relative shortfall of `lhs >= rhs`: positive when violated.
inline double shortfall(double lhs, double rhs) {
  return (rhs - lhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

inline double psd_shortfall(const HermitianTensor& x, const HermitianTensor& y) {
  const PsdVerdict v = psd_compare(x, y, 0.0);
  const double scale = std::max({1.0, spectral_norm(x), spectral_norm(y)});
  return -v.lambda_min_of_difference / scale;
}

}  // namespace detail

/// Einstein product against the nested-sum oracle.
inline PropertyResult check_einstein_oracle(const SelftestOptions& o) {
  return detail::run_property("einstein_product_oracle", o.algebra_instances, 1e-12, o.seed, 1,
                              [](RngStream& rng) {
                                const auto [a, b] = detail::random_conforming_pair(rng);
                                return detail::rel_diff(einstein_product(a, b),
                                                        reference_einstein_product(a, b));
                              });
}

/// Unfolding preserves products, traces and adjoints.
inline PropertyResult check_unfolding_homomorphism(const SelftestOptions& o) {
  return detail::run_property(
      "unfolding_homomorphism", o.algebra_instances, 1e-12, o.seed, 2, [](RngStream& rng) {
        const auto [a, b] = detail::random_conforming_pair(rng);
        const DenseTensor ab = reference_einstein_product(a, b);
        double err = detail::rel_diff_matrix(Matrix(unfold(ab)), Matrix(unfold(a) * unfold(b)));

        const Dims d = detail::random_square_dims(rng);
        const DenseTensor x = random_tensor(Shape::square(d), rng);
        const complex tr = trace(x);
        const complex mt = unfold(x).trace();
        err = std::max(err, std::abs(tr - mt) / std::max(1.0, std::abs(mt)));

        const DenseTensor xh = conjugate_transpose(a);
        err = std::max(err, detail::rel_diff_matrix(Matrix(unfold(xh)), Matrix(unfold(a).adjoint())));
        return err;
      });
}

/// Eigenvalues of f(X) equal f(eigenvalues of X) for exp, log and square;
/// exp(log X) = X.
inline PropertyResult check_spectral_mapping(const SelftestOptions& o) {
  return detail::run_property(
      "spectral_mapping", o.spectral_instances, 1e-8, o.seed, 3, [](RngStream& rng) {
        const Dims d = detail::random_square_dims(rng);
        const HermitianTensor x = random_hermitian(d, rng, 2.0);
        const HermitianTensor p = random_pd(d, rng, 0.1, 3.0);
        double err = 0.0;
        auto compare = [&](const HermitianTensor& in, const ScalarMap& f) {
          std::vector<double> mapped = f.apply(eigenvalues(in));
          std::sort(mapped.begin(), mapped.end(), std::greater<>());
          const auto got = eigenvalues(tensor_function(in, f));
          for (std::size_t k = 0; k < got.size(); ++k)
            err = std::max(err, std::abs(got[k] - mapped[k]) / std::max(1.0, std::abs(mapped[k])));
        };
        compare(x, ScalarMap::exp());
        compare(p, ScalarMap::log());
        compare(x, ScalarMap::power(2.0));
        err = std::max(err, detail::rel_diff(tensor_exp(tensor_log(p)).base(), p.base()));
        return err;
      });
}

/// lambda_max of the Hermitian dilation equals the spectral norm.
inline PropertyResult check_dilation(const SelftestOptions& o) {
  return detail::run_property("dilation_identity", o.spectral_instances, 1e-8, o.seed, 4,
                              [](RngStream& rng) {
                                const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 2.0);
                                const Shape s(random_dims(rng, m, 3), random_dims(rng, m, 3));
                                const DenseTensor y = random_tensor(s, rng);
                                const double norm = spectral_norm(y);
                                return std::abs(lambda_max(hermitian_dilation(y)) - norm) /
                                       std::max(1.0, norm);
                              });
}

/// Tr e^{X+Y} <= Tr(e^X e^Y).
inline PropertyResult check_golden_thompson(const SelftestOptions& o) {
  return detail::run_property(
      "golden_thompson", o.spectral_instances, 1e-8, o.seed, 5, [](RngStream& rng) {
        const Dims d = detail::random_square_dims(rng);
        const HermitianTensor x = random_hermitian(d, rng, rng.uniform());
        const HermitianTensor y = random_hermitian(d, rng, rng.uniform());
        const double lhs = trace_function(add(x, y), ScalarMap::exp());
        const double rhs = trace(einstein_product(tensor_exp(x), tensor_exp(y))).real();
        return detail::shortfall(rhs, lhs);
      });
}

/// Tr Y >= Tr X - Tr X log X + Tr X log Y for positive definite X, Y.
inline PropertyResult check_klein(const SelftestOptions& o) {
  return detail::run_property("klein_inequality", o.spectral_instances, 1e-8, o.seed, 6,
                              [](RngStream& rng) {
                                const Dims d = detail::random_square_dims(rng);
                                const HermitianTensor x = random_pd(d, rng);
                                const HermitianTensor y = random_pd(d, rng);
                                const double tx = trace(x).real(), ty = trace(y).real();
                                return detail::shortfall(ty, tx - relative_entropy(x, y));
                              });
}

/// X >= Y > 0 implies log X >= log Y.
inline PropertyResult check_log_monotone(const SelftestOptions& o) {
  return detail::run_property("log_monotone", o.spectral_instances, 1e-8, o.seed, 7,
                              [](RngStream& rng) {
                                const Dims d = detail::random_square_dims(rng);
                                const HermitianTensor y = random_pd(d, rng);
                                const HermitianTensor gap = random_spectrum(d, rng, 0.0, 1.0);
                                const HermitianTensor x = add(y, gap);
                                return detail::psd_shortfall(tensor_log(x), tensor_log(y));
                              });
}

/// log((A + B)/2) >= (log A + log B)/2.
inline PropertyResult check_log_concave(const SelftestOptions& o) {
  return detail::run_property("log_concave", o.spectral_instances, 1e-8, o.seed, 8,
                              [](RngStream& rng) {
                                const Dims d = detail::random_square_dims(rng);
                                const HermitianTensor a = random_pd(d, rng);
                                const HermitianTensor b = random_pd(d, rng);
                                const HermitianTensor mid = scale(add(a, b), 0.5);
                                const HermitianTensor avg =
                                    scale(add(tensor_log(a), tensor_log(b)), 0.5);
                                return detail::psd_shortfall(tensor_log(mid), avg);
                              });
}

/// g(t) = Tr exp(H + log(t A1 + (1-t) A2)) is midpoint concave.
inline PropertyResult check_lieb(const SelftestOptions& o) {
  return detail::run_property(
      "lieb_midpoint", o.spectral_instances, 1e-8, o.seed, 9, [](RngStream& rng) {
        const Dims d = detail::random_square_dims(rng);
        const HermitianTensor h = random_hermitian(d, rng, 1.0);
        const HermitianTensor a1 = random_pd(d, rng);
        const HermitianTensor a2 = random_pd(d, rng);
        auto g = [&](double t) {
          const HermitianTensor mix = add(scale(a1, t), scale(a2, 1.0 - t));
          return trace_function(add(h, tensor_log(mix)), ScalarMap::exp());
        };
        return detail::shortfall(g(0.5), 0.5 * g(0.0) + 0.5 * g(1.0));
      });
}

/// D((A1+A2)/2 || (B1+B2)/2) <= (D(A1||B1) + D(A2||B2))/2.
inline PropertyResult check_relative_entropy_convexity(const SelftestOptions& o) {
  return detail::run_property(
      "relative_entropy_joint_convexity", o.spectral_instances, 1e-8, o.seed, 10,
      [](RngStream& rng) {
        const Dims d = detail::random_square_dims(rng);
        const HermitianTensor a1 = random_pd(d, rng), a2 = random_pd(d, rng);
        const HermitianTensor b1 = random_pd(d, rng), b2 = random_pd(d, rng);
        const double lhs = relative_entropy(scale(add(a1, a2), 0.5), scale(add(b1, b2), 0.5));
        const double rhs = 0.5 * relative_entropy(a1, b1) + 0.5 * relative_entropy(a2, b2);
        return detail::shortfall(rhs, lhs);
      });
}

inline std::vector<PropertyResult> run_algebra_suite(const SelftestOptions& o = {}) {
  return {check_einstein_oracle(o), check_unfolding_homomorphism(o)};
}

inline std::vector<PropertyResult> run_spectral_suite(const SelftestOptions& o = {}) {
  return {check_spectral_mapping(o), check_dilation(o)};
}

inline std::vector<PropertyResult> run_inequality_suite(const SelftestOptions& o = {}) {
  return {check_golden_thompson(o), check_klein(o),       check_log_monotone(o),
          check_log_concave(o),     check_lieb(o),        check_relative_entropy_convexity(o)};
}

inline std::vector<PropertyResult> run_selftest(const SelftestOptions& o = {}) {
  std::vector<PropertyResult> all = run_algebra_suite(o);
  for (auto& r : run_spectral_suite(o)) all.push_back(std::move(r));
  for (auto& r : run_inequality_suite(o)) all.push_back(std::move(r));
  return all;
}

}  // namespace ttb
