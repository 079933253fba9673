// Einstein products, unfoldings and the spectral calculus on a small example.

#include <cstdio>

#include "ttb/random_tensors.hpp"
#include "ttb/spectral.hpp"
#include "ttb/tensor.hpp"

int main() {
  ttb::RngStream rng(2024, 0);

  const ttb::DenseTensor a = ttb::random_tensor(ttb::Shape({2, 3}, {2, 2}), rng);
  const ttb::DenseTensor b = ttb::random_tensor(ttb::Shape({2, 2}, {3, 2}), rng);
  const ttb::DenseTensor ab = ttb::einstein_product(a, b);
  std::printf("A%s * B%s = %s, ||AB||_F = %.6f\n", a.shape().str().c_str(), b.shape().str().c_str(),
              ab.shape().str().c_str(), ttb::frobenius_norm(ab));

  const ttb::HermitianTensor x = ttb::random_hermitian({2, 2}, rng, 1.5);
  const auto spec = ttb::hermitian_eig(x);
  std::printf("eigenvalues of X:");
  for (double l : spec.eigenvalues) std::printf(" %.4f", l);
  std::printf("\nTr exp(X) = %.6f\n", ttb::trace_function(x, ttb::ScalarMap::exp()));

  const ttb::DenseTensor y = ttb::random_tensor(ttb::Shape({2, 3}, {3, 1}), rng);
  std::printf("||Y|| = %.6f, lambda_max(D(Y)) = %.6f\n", ttb::spectral_norm(y),
              ttb::lambda_max(ttb::hermitian_dilation(y)));
}
