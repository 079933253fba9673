#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the library's numeric paths.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;

/// Row-major offset of a multi-index.
inline std::size_t offset(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims) {
  std::size_t o = 0;
  for (std::size_t m = 0; m < dims.size(); ++m) o = o * dims[m] + idx[m];
  return o;
}

/// Advances an odometer; returns false after the last tuple.
inline bool next_index(std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims) {
  for (std::size_t m = dims.size(); m-- > 0;) {
    if (++idx[m] < dims[m]) return true;
    idx[m] = 0;
  }
  return false;
}

/// C[i, k] = sum_j A[i, j] B[j, k] over flat row-major arrays with explicit
/// mode lists; every index tuple is visited by odometer.
inline std::vector<cd> einstein(const std::vector<cd>& a, const std::vector<cd>& b,
                                const std::vector<std::size_t>& I, const std::vector<std::size_t>& J,
                                const std::vector<std::size_t>& K) {
  auto prod = [](const std::vector<std::size_t>& d) {
    std::size_t p = 1;
    for (auto x : d) p *= x;
    return p;
  };
  std::vector<cd> c(prod(I) * prod(K), cd(0.0, 0.0));
  std::vector<std::size_t> i(I.size(), 0);
  do {
    std::vector<std::size_t> k(K.size(), 0);
    do {
      cd s(0.0, 0.0);
      std::vector<std::size_t> j(J.size(), 0);
      do {
        std::vector<std::size_t> ij(i), jk(j);
        ij.insert(ij.end(), j.begin(), j.end());
        jk.insert(jk.end(), k.begin(), k.end());
        std::vector<std::size_t> IJ(I), JK(J);
        IJ.insert(IJ.end(), J.begin(), J.end());
        JK.insert(JK.end(), K.begin(), K.end());
        s += a[offset(ij, IJ)] * b[offset(jk, JK)];
      } while (next_index(j, J));
      c[offset(i, I) * prod(K) + offset(k, K)] = s;
    } while (next_index(k, K));
  } while (next_index(i, I));
  return c;
}

/// exp(X) by a truncated Taylor series.
inline Eigen::MatrixXcd taylor_exp(const Eigen::MatrixXcd& x, int terms = 50) {
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(x.rows(), x.cols());
  Eigen::MatrixXcd term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

/// Bernoulli KL divergence written out directly.
inline double kl(double a, double b) {
  return a * std::log(a) - a * std::log(b) + (1 - a) * std::log(1 - a) - (1 - a) * std::log(1 - b);
}

/// Root of f on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int k = 0; k < iters; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// P(Binomial(n, p) <= k) by direct summation in log space.
inline double binom_cdf(long k, long n, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k >= n ? 1.0 : 0.0;
  double s = 0.0;
  for (long i = 0; i <= k; ++i)
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                  i * std::log(p) + (n - i) * std::log1p(-p));
  return s;
}

/// One-sided Clopper-Pearson upper limit: the p with P(Bin(n, p) <= k) = alpha.
inline double cp_upper(long k, long n, double alpha) {
  if (k >= n) return 1.0;
  return bisect([&](double p) { return binom_cdf(k, n, p) - alpha; }, 0.0, 1.0, 100);
}

}  // namespace oracle
