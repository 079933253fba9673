#pragma once

/// \file
/// Random tensor factories used by property checks, demos and config
/// generators.

#include <cmath>

#include "ttb/ensembles.hpp"
#include "ttb/rng.hpp"
#include "ttb/spectral.hpp"
#include "ttb/tensor.hpp"

namespace ttb {

/// Entries i.i.d. standard complex Gaussian.
inline DenseTensor random_tensor(const Shape& shape, RngStream& rng) {
  std::vector<complex> v(shape.size());
  for (complex& z : v) z = rng.complex_normal();
  return DenseTensor(shape, std::move(v));
}

/// (G + G^H)/2 for a complex Ginibre G; rescaled to spectral norm `norm` when
/// `norm > 0`.
inline HermitianTensor random_hermitian(const Dims& dims, RngStream& rng, double norm = -1.0) {
  const DenseTensor g = random_tensor(Shape::square(dims), rng);
  HermitianTensor h(scale(add(g, conjugate_transpose(g)), complex(0.5, 0.0)));
  if (norm > 0.0) {
    const double s = spectral_norm(h);
    if (s > 0.0) h = scale(h, norm / s);
  }
  return h;
}

/// U diag(lambda) U^H with U Haar and lambda uniform on [lo, hi].
inline HermitianTensor random_spectrum(const Dims& dims, RngStream& rng, double lo, double hi) {
  const std::size_t d = Shape::square(dims).row_size();
  const Matrix u = detail::haar_unitary(d, rng);
  std::vector<double> lam(d);
  for (double& x : lam) x = lo + (hi - lo) * rng.uniform();
  return HermitianTensor::from_matrix(detail::compose(u, lam), dims);
}

/// Positive definite with eigenvalues in [lo, hi], lo > 0.
inline HermitianTensor random_pd(const Dims& dims, RngStream& rng, double lo = 0.1,
                                 double hi = 2.0) {
  return random_spectrum(dims, rng, lo, hi);
}

/// Random row/column dims with `modes` entries, each extent in [1, max_extent].
inline Dims random_dims(RngStream& rng, std::size_t modes, std::size_t max_extent) {
  Dims d(modes);
  for (auto& x : d) x = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_extent));
  return d;
}

}  // namespace ttb
