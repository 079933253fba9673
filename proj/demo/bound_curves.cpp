// Prints several tail bounds over a theta range as CSV, ready for plotting.

#include <cstdio>

#include "ttb/bounds.hpp"

int main() {
  ttb::BoundParams p;
  p.dim_product = 4;
  p.sigma_sq = 1.0;
  p.T = 1.0;
  p.mu_max = p.mu_min = 8.0;

  std::printf("theta,gaussian,bernstein_bounded,bernstein_subexp,azuma,chernoff2_upper\n");
  for (int k = 0; k <= 40; ++k) {
    const double theta = 0.25 * k;
    std::printf("%.2f,%.6g,%.6g,%.6g,%.6g,%.6g\n", theta,
                ttb::gaussian_series_bound(p, theta).value,
                ttb::bernstein_bounded(p, theta).value,
                ttb::bernstein_subexponential(p, theta).value,
                ttb::azuma_mcdiarmid_bound(p, theta).value,
                ttb::chernoff_ii_upper(p, theta / 8.0).value);
  }
  const auto c = ttb::chernoff_expectation_constant();
  std::printf("# delta* = %.6f, C = %.4f\n", c.delta, c.C);
}
