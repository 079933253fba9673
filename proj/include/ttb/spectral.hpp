#pragma once

/// \file
/// Hermitian spectral calculus: eigendecomposition, tensor functions,
/// semidefinite order, Hermitian dilation, relative entropy and the
/// perspective map. Every computation runs on the unfolding.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ttb/error.hpp"
#include "ttb/tensor.hpp"

namespace ttb {

struct Spectrum {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenbasis;                // columns are eigenvectors of the unfolding

  double lambda_max() const { return eigenvalues.front(); }
  double lambda_min() const { return eigenvalues.back(); }
};

struct PsdVerdict {
  double lambda_min_of_difference = 0.0;
  double tolerance = 0.0;
  bool holds = false;
};

namespace detail {

inline Spectrum eig_matrix(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw SpectralError("Hermitian eigensolver did not converge");
  const Eigen::Index n = m.rows();
  Spectrum s;
  s.eigenvalues.resize(static_cast<std::size_t>(n));
  s.eigenbasis.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    s.eigenvalues[static_cast<std::size_t>(k)] = solver.eigenvalues()(n - 1 - k);
    s.eigenbasis.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return s;
}

/// Eigenvalues only, descending.
template <typename Derived>
std::vector<double> eigenvalues_of(const Eigen::MatrixBase<Derived>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw SpectralError("Hermitian eigensolver did not converge");
  std::vector<double> ev(solver.eigenvalues().data(),
                         solver.eigenvalues().data() + solver.eigenvalues().size());
  std::reverse(ev.begin(), ev.end());
  return ev;
}

template <typename Derived>
double largest_singular_value(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd{Matrix(m)};
  if (svd.info() != Eigen::Success) throw SpectralError("SVD did not converge");
  return svd.singularValues()(0);
}

inline Matrix compose(const Matrix& basis, const std::vector<double>& values) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) d(static_cast<Eigen::Index>(k)) = values[k];
  Matrix out = basis * d.asDiagonal() * basis.adjoint();
  return 0.5 * (out + out.adjoint().eval());
}

/// Relative floor under which an eigenvalue counts as zero.
inline double pd_floor(double lambda_max) { return 1e-12 * std::max(lambda_max, 0.0); }

}  // namespace detail

inline Spectrum hermitian_eig(const HermitianTensor& x) { return detail::eig_matrix(Matrix(x.matrix())); }

inline std::vector<double> eigenvalues(const HermitianTensor& x) {
  return detail::eigenvalues_of(x.matrix());
}

inline double lambda_max(const HermitianTensor& x) { return eigenvalues(x).front(); }
inline double lambda_min(const HermitianTensor& x) { return eigenvalues(x).back(); }

/// Largest singular value of the unfolding.
inline double spectral_norm(const DenseTensor& a) {
  return detail::largest_singular_value(a.matrix());
}

inline double spectral_norm(const HermitianTensor& x) {
  const auto ev = eigenvalues(x);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

/// A real scalar map extended to Hermitian tensors through the spectrum.
class ScalarMap {
 public:
  enum class Domain { all, nonnegative, positive };

  static ScalarMap exp() {
    return ScalarMap("exp", [](double x) { return std::exp(x); }, Domain::all);
  }
  static ScalarMap log() {
    return ScalarMap("log", [](double x) { return std::log(x); }, Domain::positive);
  }
  static ScalarMap power(double p) {
    Domain d = Domain::all;
    if (p < 0.0)
      d = Domain::positive;
    else if (p != std::floor(p))
      d = Domain::nonnegative;
    return ScalarMap("power(" + std::to_string(p) + ")",
                     [p](double x) { return std::pow(x, p); }, d);
  }
  /// sum_k coeffs[k] x^k
  static ScalarMap polynomial(std::vector<double> coeffs) {
    return ScalarMap(
        "polynomial",
        [c = std::move(coeffs)](double x) {
          double acc = 0.0;
          for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
          return acc;
        },
        Domain::all);
  }
  /// t log t with the continuous extension 0 at t = 0.
  static ScalarMap xlogx() {
    return ScalarMap("xlogx", [](double x) { return x == 0.0 ? 0.0 : x * std::log(x); },
                     Domain::nonnegative);
  }
  static ScalarMap custom(std::string name, std::function<double(double)> f, Domain d) {
    return ScalarMap(std::move(name), std::move(f), d);
  }

  double operator()(double x) const { return f_(x); }
  Domain domain() const noexcept { return domain_; }
  const std::string& name() const noexcept { return name_; }

  /// Applies the map to a spectrum, enforcing the domain. Eigenvalues within
  /// the relative floor of zero are snapped to zero for nonnegative domains.
  std::vector<double> apply(std::vector<double> ev) const {
    const double lmax = ev.empty() ? 0.0 : *std::max_element(ev.begin(), ev.end());
    const double lmin = ev.empty() ? 0.0 : *std::min_element(ev.begin(), ev.end());
    const double floor = detail::pd_floor(lmax);
    switch (domain_) {
      case Domain::positive:
        if (!(lmin > floor) || !(lmin > 0.0))
          throw DomainError(name_ + " requires a positive-definite tensor; lambda_min = " +
                            std::to_string(lmin));
        break;
      case Domain::nonnegative:
        if (lmin < -floor)
          throw DomainError(name_ + " requires a positive-semidefinite tensor; lambda_min = " +
                            std::to_string(lmin));
        for (double& v : ev) v = std::max(v, 0.0);
        break;
      case Domain::all:
        break;
    }
    for (double& v : ev) v = f_(v);
    return ev;
  }

 private:
  ScalarMap(std::string name, std::function<double(double)> f, Domain d)
      : name_(std::move(name)), f_(std::move(f)), domain_(d) {}

  std::string name_;
  std::function<double(double)> f_;
  Domain domain_;
};

/// g(X) = U g(Lambda) U^H.
inline HermitianTensor tensor_function(const HermitianTensor& x, const ScalarMap& f) {
  Spectrum s = hermitian_eig(x);
  return HermitianTensor::from_matrix(detail::compose(s.eigenbasis, f.apply(s.eigenvalues)),
                                      x.dims());
}

inline HermitianTensor tensor_exp(const HermitianTensor& x) {
  return tensor_function(x, ScalarMap::exp());
}
inline HermitianTensor tensor_log(const HermitianTensor& x) {
  return tensor_function(x, ScalarMap::log());
}

/// Tr f(X) = sum_k f(lambda_k).
inline double trace_function(const HermitianTensor& x, const ScalarMap& f) {
  double s = 0.0;
  for (double v : f.apply(eigenvalues(x))) s += v;
  return s;
}

/// Verdict on x - y being positive semidefinite up to `tol`.
inline PsdVerdict psd_compare(const HermitianTensor& x, const HermitianTensor& y,
                              double tol = 1e-10) {
  if (!(x.shape() == y.shape()))
    throw ShapeError("psd_compare: shape mismatch " + x.shape().str() + " vs " +
                     y.shape().str());
  Matrix diff = Matrix(x.matrix()) - Matrix(y.matrix());
  const double lmin = detail::eigenvalues_of(diff).back();
  return {lmin, tol, lmin >= -tol};
}

/// Block tensor [[0, Y], [Y^H, 0]] over dims (I_m + J_m). Row index i_m of Y
/// embeds as i_m, column index j_m embeds as I_m + j_m in every mode.
inline HermitianTensor hermitian_dilation(const DenseTensor& y) {
  const Dims& I = y.shape().row_dims();
  const Dims& J = y.shape().col_dims();
  if (I.size() != J.size())
    throw ShapeError("hermitian_dilation needs equal row and column mode counts, got " +
                     y.shape().str());
  Dims D(I.size());
  for (std::size_t m = 0; m < I.size(); ++m) D[m] = I[m] + J[m];
  const Shape out = Shape::square(D);
  const std::size_t n = out.row_size();
  std::vector<complex> v(out.size(), complex(0.0, 0.0));
  const std::size_t rows = y.shape().row_size();
  const std::size_t cols = y.shape().col_size();
  std::vector<std::size_t> top(rows), bottom(cols);
  for (std::size_t r = 0; r < rows; ++r) top[r] = linear_index(multi_index(r, I), D);
  for (std::size_t c = 0; c < cols; ++c) {
    Dims idx = multi_index(c, J);
    for (std::size_t m = 0; m < idx.size(); ++m) idx[m] += I[m];
    bottom[c] = linear_index(idx, D);
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      v[top[r] * n + bottom[c]] = y(r, c);
      v[bottom[c] * n + top[r]] = std::conj(y(r, c));
    }
  return HermitianTensor(DenseTensor(out, std::move(v)));
}

/// D(a || b) = Tr a (log a - log b).
inline double relative_entropy(const HermitianTensor& a, const HermitianTensor& b) {
  if (!(a.shape() == b.shape()))
    throw ShapeError("relative_entropy: shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  const Spectrum sa = hermitian_eig(a);
  const Spectrum sb = hermitian_eig(b);
  const auto log_a = ScalarMap::log().apply(sa.eigenvalues);
  const auto log_b = ScalarMap::log().apply(sb.eigenvalues);
  double a_log_a = 0.0;
  for (std::size_t k = 0; k < log_a.size(); ++k) a_log_a += sa.eigenvalues[k] * log_a[k];
  const Matrix lb = detail::compose(sb.eigenbasis, log_b);
  const double a_log_b = (Matrix(a.matrix()) * lb).trace().real();
  return a_log_a - a_log_b;
}

/// Whether x and y commute: ||xy - yx||_F <= tol * ||x||_F ||y||_F.
inline bool commutes(const HermitianTensor& x, const HermitianTensor& y, double tol = 1e-9) {
  const Matrix a = x.matrix();
  const Matrix b = y.matrix();
  return (a * b - b * a).norm() <= tol * a.norm() * b.norm();
}

/// h(x, y) = f(x y^{-1}) y for commuting x, y, evaluated in a joint eigenbasis.
inline HermitianTensor perspective_map(const HermitianTensor& x, const HermitianTensor& y,
                                       const ScalarMap& f) {
  if (!(x.shape() == y.shape()))
    throw ShapeError("perspective_map: shape mismatch " + x.shape().str() + " vs " +
                     y.shape().str());
  if (!commutes(x, y)) throw DomainError("perspective_map requires commuting tensors");
  const Spectrum sy = hermitian_eig(y);
  const double ynorm = std::max(std::abs(sy.lambda_max()), std::abs(sy.lambda_min()));
  for (double v : sy.eigenvalues)
    if (std::abs(v) <= 1e-12 * ynorm || v == 0.0)
      throw DomainError("perspective_map requires an invertible y; eigenvalue " +
                        std::to_string(v));

  // Within each eigenspace of y, diagonalize the compression of x.
  const Matrix xm = x.matrix();
  const Eigen::Index n = xm.rows();
  Matrix basis(n, n);
  std::vector<double> xv(static_cast<std::size_t>(n)), yv(static_cast<std::size_t>(n));
  const double cluster = 1e-9 * ynorm;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(sy.eigenvalues[static_cast<std::size_t>(end)] -
                               sy.eigenvalues[static_cast<std::size_t>(start)]) <= cluster)
      ++end;
    const Matrix block = sy.eigenbasis.middleCols(start, end - start);
    Matrix compressed = block.adjoint() * xm * block;
    compressed = (0.5 * (compressed + compressed.adjoint().eval())).eval();
    const Spectrum sx = detail::eig_matrix(compressed);
    basis.middleCols(start, end - start) = block * sx.eigenbasis;
    for (Eigen::Index k = start; k < end; ++k) {
      xv[static_cast<std::size_t>(k)] = sx.eigenvalues[static_cast<std::size_t>(k - start)];
      yv[static_cast<std::size_t>(k)] = sy.eigenvalues[static_cast<std::size_t>(k)];
    }
    start = end;
  }
  std::vector<double> ratio(xv.size());
  for (std::size_t k = 0; k < xv.size(); ++k) ratio[k] = xv[k] / yv[k];
  std::vector<double> mapped = f.apply(ratio);
  for (std::size_t k = 0; k < mapped.size(); ++k) mapped[k] *= yv[k];
  return HermitianTensor::from_matrix(detail::compose(basis, mapped), x.dims());
}

}  // namespace ttb
