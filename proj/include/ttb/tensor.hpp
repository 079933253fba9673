#pragma once

/// \file
/// Dense complex tensors with an explicit row-mode / column-mode partition and
/// the Einstein-product algebra over them.
///
/// An order-(M+N) tensor with row dims (I_1..I_M) and column dims (J_1..J_N)
/// is stored row-major over the full index tuple (i_1..i_M, j_1..j_N). Under
/// that layout the unfolding to an (I_1*..*I_M) x (J_1*..*J_N) matrix is a
/// plain reinterpretation of the storage, and the Einstein product is matrix
/// multiplication of unfoldings.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ttb/error.hpp"

namespace ttb {

using complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RowMajorMatrix =
    Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Dims = std::vector<std::size_t>;

/// Largest unfolded side accepted anywhere; every downstream routine is dense.
inline constexpr std::size_t kMaxUnfoldedSide = 4096;

namespace detail {

inline std::string dims_str(const Dims& d) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < d.size(); ++k) os << (k ? "," : "") << d[k];
  os << ')';
  return os.str();
}

inline std::size_t checked_product(const Dims& d, const char* what) {
  std::size_t p = 1;
  for (std::size_t v : d) {
    if (v == 0) throw ShapeError(std::string(what) + " contains a zero extent");
    if (p > std::numeric_limits<std::size_t>::max() / v)
      throw ShapeError(std::string(what) + " size overflows");
    p *= v;
  }
  return p;
}

}  // namespace detail

class Shape {
 public:
  Shape(Dims row_dims, Dims col_dims)
      : row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
    if (row_dims_.empty() && col_dims_.empty())
      throw ShapeError("a tensor needs at least one mode");
    row_size_ = detail::checked_product(row_dims_, "row dims");
    col_size_ = detail::checked_product(col_dims_, "col dims");
    if (row_size_ > kMaxUnfoldedSide || col_size_ > kMaxUnfoldedSide)
      throw ShapeError("shape " + str() + " exceeds the unfolded side limit of " +
                       std::to_string(kMaxUnfoldedSide));
  }

  /// Square shape (dims | dims).
  static Shape square(const Dims& dims) { return Shape(dims, dims); }

  const Dims& row_dims() const noexcept { return row_dims_; }
  const Dims& col_dims() const noexcept { return col_dims_; }
  std::size_t row_size() const noexcept { return row_size_; }
  std::size_t col_size() const noexcept { return col_size_; }
  std::size_t size() const noexcept { return row_size_ * col_size_; }
  std::size_t order() const noexcept { return row_dims_.size() + col_dims_.size(); }
  bool is_square() const noexcept { return row_dims_ == col_dims_; }

  /// All mode extents, row modes first.
  Dims all_dims() const {
    Dims d = row_dims_;
    d.insert(d.end(), col_dims_.begin(), col_dims_.end());
    return d;
  }

  Shape transposed() const { return Shape(col_dims_, row_dims_); }

  std::string str() const {
    return detail::dims_str(row_dims_) + "x" + detail::dims_str(col_dims_);
  }

  friend bool operator==(const Shape& a, const Shape& b) {
    return a.row_dims_ == b.row_dims_ && a.col_dims_ == b.col_dims_;
  }

 private:
  Dims row_dims_;
  Dims col_dims_;
  std::size_t row_size_ = 1;
  std::size_t col_size_ = 1;
};

/// Row-major linearization of a multi-index over the given extents.
inline std::size_t linear_index(std::span<const std::size_t> idx, const Dims& dims) {
  if (idx.size() != dims.size()) throw ShapeError("index has the wrong number of modes");
  std::size_t r = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (idx[k] >= dims[k])
      throw ShapeError("index " + std::to_string(idx[k]) + " out of range for mode " +
                       std::to_string(k) + " of extent " + std::to_string(dims[k]));
    r = r * dims[k] + idx[k];
  }
  return r;
}

/// Inverse of linear_index.
inline Dims multi_index(std::size_t linear, const Dims& dims) {
  Dims idx(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    idx[k] = linear % dims[k];
    linear /= dims[k];
  }
  return idx;
}

/// Immutable dense complex tensor.
class DenseTensor {
 public:
  /// Zero tensor of the given shape.
  explicit DenseTensor(Shape shape)
      : shape_(std::move(shape)), data_(shape_.size(), complex(0.0, 0.0)) {}

  DenseTensor(Shape shape, std::vector<complex> entries)
      : shape_(std::move(shape)), data_(std::move(entries)) {
    if (data_.size() != shape_.size())
      throw ShapeError("entry count " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    for (const complex& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DomainError("tensor entries must be finite");
  }

  /// Builds a tensor from an unfolded matrix (row_size x col_size).
  template <typename Derived>
  static DenseTensor refold(const Eigen::MatrixBase<Derived>& m, Shape shape) {
    if (static_cast<std::size_t>(m.rows()) != shape.row_size() ||
        static_cast<std::size_t>(m.cols()) != shape.col_size())
      throw ShapeError("matrix of size " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + " cannot be refolded to " + shape.str());
    std::vector<complex> v(shape.size());
    Eigen::Map<RowMajorMatrix>(v.data(), m.rows(), m.cols()) = m;
    return DenseTensor(std::move(shape), std::move(v));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::span<const complex> entries() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  /// Entry at a full index tuple (row modes, then column modes).
  complex at(std::span<const std::size_t> idx) const {
    return data_[linear_index(idx, full_dims())];
  }
  complex at(std::initializer_list<std::size_t> idx) const {
    return at(std::span<const std::size_t>(idx.begin(), idx.size()));
  }
  /// Entry at unfolded position (r, c).
  complex operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_.col_size() + c];
  }

  /// Unfolded matrix view; row index = row-major linearization of row modes.
  Eigen::Map<const RowMajorMatrix> matrix() const {
    return {data_.data(), static_cast<Eigen::Index>(shape_.row_size()),
            static_cast<Eigen::Index>(shape_.col_size())};
  }

  double max_abs() const {
    double m = 0.0;
    for (const complex& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

 private:
  Dims full_dims() const { return shape_.all_dims(); }

  Shape shape_;
  std::vector<complex> data_;
};

/// Unfolding as an owning column-major Eigen matrix.
inline Matrix unfold(const DenseTensor& a) { return a.matrix(); }

template <typename Derived>
DenseTensor refold(const Eigen::MatrixBase<Derived>& m, Shape shape) {
  return DenseTensor::refold(m, std::move(shape));
}

inline DenseTensor zero(const Shape& shape) { return DenseTensor(shape); }

inline DenseTensor identity(const Dims& dims) {
  Shape s = Shape::square(dims);
  const std::size_t n = s.row_size();
  std::vector<complex> v(s.size(), complex(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) v[k * n + k] = complex(1.0, 0.0);
  return DenseTensor(std::move(s), std::move(v));
}

inline DenseTensor ones(const Shape& shape) {
  return DenseTensor(shape, std::vector<complex>(shape.size(), complex(1.0, 0.0)));
}

namespace detail {

inline void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* op) {
  if (!(a.shape() == b.shape()))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
}

template <typename F>
DenseTensor entrywise(const DenseTensor& a, const DenseTensor& b, const char* op, F f) {
  require_same_shape(a, b, op);
  std::vector<complex> v(a.size());
  auto x = a.entries();
  auto y = b.entries();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(x[k], y[k]);
  return DenseTensor(a.shape(), std::move(v));
}

}  // namespace detail

inline DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  return detail::entrywise(a, b, "add", [](complex x, complex y) { return x + y; });
}

inline DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  return detail::entrywise(a, b, "subtract", [](complex x, complex y) { return x - y; });
}

inline DenseTensor scale(const DenseTensor& a, complex c) {
  std::vector<complex> v(a.entries().begin(), a.entries().end());
  for (complex& z : v) z *= c;
  return DenseTensor(a.shape(), std::move(v));
}

inline DenseTensor hadamard_product(const DenseTensor& a, const DenseTensor& b) {
  return detail::entrywise(a, b, "hadamard_product",
                           [](complex x, complex y) { return x * y; });
}

/// (a^H)_{j,i} = conj(a_{i,j}); row and column modes swap roles.
inline DenseTensor conjugate_transpose(const DenseTensor& a) {
  const std::size_t rows = a.shape().row_size();
  const std::size_t cols = a.shape().col_size();
  std::vector<complex> v(a.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
#ifdef TTB_INJECT_ADJOINT_SIGN_BUG
      v[c * rows + r] = a(r, c);
#else
      v[c * rows + r] = std::conj(a(r, c));
#endif
  return DenseTensor(a.shape().transposed(), std::move(v));
}

/// Contracts the trailing `contracted_modes` modes of `a` with the leading
/// `contracted_modes` modes of `b`. The result's row modes are the remaining
/// modes of `a` and its column modes the remaining modes of `b`.
inline DenseTensor einstein_product(const DenseTensor& a, const DenseTensor& b,
                                    std::size_t contracted_modes) {
  const Dims ad = a.shape().all_dims();
  const Dims bd = b.shape().all_dims();
  if (contracted_modes > ad.size() || contracted_modes > bd.size())
    throw ShapeError("einstein_product: cannot contract " + std::to_string(contracted_modes) +
                     " modes of tensors with orders " + std::to_string(ad.size()) + " and " +
                     std::to_string(bd.size()));
  const std::size_t a_keep = ad.size() - contracted_modes;
  for (std::size_t k = 0; k < contracted_modes; ++k) {
    if (ad[a_keep + k] != bd[k])
      throw ShapeError("einstein_product: contracted mode " + std::to_string(k) +
                       " differs (" + std::to_string(ad[a_keep + k]) + " vs " +
                       std::to_string(bd[k]) + ")");
  }
  Dims rows(ad.begin(), ad.begin() + static_cast<std::ptrdiff_t>(a_keep));
  Dims cols(bd.begin() + static_cast<std::ptrdiff_t>(contracted_modes), bd.end());
  Shape out(rows, cols);
  const std::size_t inner = detail::checked_product(
      Dims(bd.begin(), bd.begin() + static_cast<std::ptrdiff_t>(contracted_modes)),
      "contracted dims");
  Eigen::Map<const RowMajorMatrix> am(a.entries().data(),
                                      static_cast<Eigen::Index>(out.row_size()),
                                      static_cast<Eigen::Index>(inner));
  Eigen::Map<const RowMajorMatrix> bm(b.entries().data(), static_cast<Eigen::Index>(inner),
                                      static_cast<Eigen::Index>(out.col_size()));
  RowMajorMatrix prod = am * bm;
  return DenseTensor(out, std::vector<complex>(prod.data(), prod.data() + prod.size()));
}

/// Einstein product over the column modes of `a`.
inline DenseTensor einstein_product(const DenseTensor& a, const DenseTensor& b) {
  return einstein_product(a, b, a.shape().col_dims().size());
}

inline complex trace(const DenseTensor& a) {
  if (!a.shape().is_square())
    throw ShapeError("trace requires a square tensor, got " + a.shape().str());
  complex s(0.0, 0.0);
  const std::size_t n = a.shape().row_size();
  for (std::size_t k = 0; k < n; ++k) s += a(k, k);
  return s;
}

/// <a, b> = Tr(a^H * b), the trace taken over the column modes of a.
inline complex inner_product(const DenseTensor& a, const DenseTensor& b) {
  detail::require_same_shape(a, b, "inner_product");
  complex s(0.0, 0.0);
  auto x = a.entries();
  auto y = b.entries();
  for (std::size_t k = 0; k < x.size(); ++k) s += std::conj(x[k]) * y[k];
  return s;
}

inline double frobenius_norm(const DenseTensor& a) {
  double s = 0.0;
  for (const complex& z : a.entries()) s += std::norm(z);
  return std::sqrt(s);
}

/// Square tensor equal to its conjugate transpose. Inputs within tolerance of
/// Hermitian are stored in the symmetrized form (X + X^H)/2.
class HermitianTensor {
 public:
  /// `tol < 0` selects the default 1e-10 * max|X|.
  explicit HermitianTensor(const DenseTensor& x, double tol = -1.0)
      : base_(symmetrize(x, tol)) {}

  /// Builds from an unfolded matrix over square dims, symmetrizing.
  template <typename Derived>
  static HermitianTensor from_matrix(const Eigen::MatrixBase<Derived>& m, const Dims& dims,
                                     double tol = -1.0) {
    return HermitianTensor(DenseTensor::refold(m, Shape::square(dims)), tol);
  }

  const DenseTensor& base() const noexcept { return base_; }
  const Shape& shape() const noexcept { return base_.shape(); }
  const Dims& dims() const noexcept { return base_.shape().row_dims(); }
  std::size_t size() const noexcept { return base_.shape().row_size(); }
  Eigen::Map<const RowMajorMatrix> matrix() const { return base_.matrix(); }

  operator const DenseTensor&() const noexcept { return base_; }

 private:
  static DenseTensor symmetrize(const DenseTensor& x, double tol) {
    if (!x.shape().is_square())
      throw ShapeError("Hermitian tensor must be square, got " + x.shape().str());
    if (tol < 0.0) tol = 1e-10 * x.max_abs();
    const DenseTensor xh = conjugate_transpose(x);
    double dev = 0.0;
    auto a = x.entries();
    auto b = xh.entries();
    std::vector<complex> v(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      dev = std::max(dev, std::abs(a[k] - b[k]));
      v[k] = 0.5 * (a[k] + b[k]);
    }
    if (dev > tol)
      throw DomainError("tensor is not Hermitian: max |X - X^H| = " + std::to_string(dev) +
                        " exceeds tolerance " + std::to_string(tol));
    return DenseTensor(x.shape(), std::move(v));
  }

  DenseTensor base_;
};

inline HermitianTensor add(const HermitianTensor& a, const HermitianTensor& b) {
  return HermitianTensor(add(a.base(), b.base()));
}

inline HermitianTensor subtract(const HermitianTensor& a, const HermitianTensor& b) {
  return HermitianTensor(subtract(a.base(), b.base()));
}

inline HermitianTensor scale(const HermitianTensor& a, double c) {
  return HermitianTensor(scale(a.base(), complex(c, 0.0)));
}

}  // namespace ttb
