#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ttb/bounds.hpp"
#include "ttb/random_tensors.hpp"

using namespace ttb;

namespace {

BoundParams params(std::uint64_t dim, double sigma_sq, double T = 1.0) {
  BoundParams p;
  p.dim_product = dim;
  p.sigma_sq = sigma_sq;
  p.T = T;
  return p;
}

std::vector<double> grid(double lo, double hi, int points = 64) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  return g;
}

void expect_nonincreasing(const std::function<double(double)>& f, const std::vector<double>& thetas,
                          const char* what) {
  double prev = f(thetas.front());
  for (double t : thetas) {
    const double v = f(t);
    EXPECT_LE(v, prev * (1.0 + 1e-12)) << what << " increases at theta = " << t;
    prev = v;
  }
}

double bennett_h(double u) { return (1.0 + u) * std::log1p(u) - u; }

}  // namespace

TEST(TheoremTags, RoundTripAndRejectUnknown) {
  for (const auto& [t, tag] : kTheoremTags) EXPECT_EQ(parse_theorem(tag), t);
  EXPECT_FALSE(parse_theorem("no-such-theorem").has_value());
}

TEST(GaussianSeries, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(gaussian_series_bound(params(4, 1.0), 0.0).value, 4.0);
  EXPECT_NEAR(gaussian_series_bound(params(4, 1.0), 2.0).value, 4.0 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(gaussian_series_bound(params(4, 1.0), 2.0).value, 0.54134, 1e-5);
  EXPECT_NEAR(gaussian_series_bound(params(4, 1.0), 2.0, true).value, 8.0 * std::exp(-2.0), 1e-15);
  EXPECT_DOUBLE_EQ(gaussian_series_bound(params(3, 2.0), 0.0, true).value, 6.0);
}

TEST(GaussianSeries, DegenerateVarianceAndBadTheta) {
  EXPECT_THROW(gaussian_series_bound(params(4, 0.0), 1.0), DomainError);
  EXPECT_DOUBLE_EQ(gaussian_series_bound(params(4, 0.0), 0.0).value, 4.0);
  EXPECT_THROW(gaussian_series_bound(params(4, 1.0), -0.1), DomainError);
  EXPECT_THROW(gaussian_series_bound(params(4, 1.0), std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(gaussian_series_bound(params(0, 1.0), 1.0), DomainError);
}

TEST(RectangularSeries, VarianceMatchesStackedSingularValueOracle) {
  RngStream rng(101, 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<DenseTensor> coeffs;
    for (int i = 0; i < 3; ++i) coeffs.push_back(random_tensor(Shape({2, 1}, {3, 2}), rng));
    // ||sum A A^H|| = ||[A_1 ... A_n]||^2 and ||sum A^H A|| = ||[A_1; ...; A_n]||^2
    Matrix wide(2, 18), tall(6, 6);
    for (int i = 0; i < 3; ++i) {
      wide.middleCols(6 * i, 6) = coeffs[static_cast<std::size_t>(i)].matrix();
      tall.middleRows(2 * i, 2) = coeffs[static_cast<std::size_t>(i)].matrix();
    }
    const double sw = Eigen::JacobiSVD<Matrix>(wide).singularValues()(0);
    const double st = Eigen::JacobiSVD<Matrix>(tall).singularValues()(0);
    const BoundParams p = rectangular_series_params(coeffs);
    EXPECT_NEAR(p.sigma_sq, std::max(sw * sw, st * st), 1e-12);
    EXPECT_EQ(p.dim_product, (2u + 3u) * (1u + 2u));
    EXPECT_EQ(p.n, 3u);
  }
}

TEST(RectangularSeries, RejectsUnequalModeCounts) {
  EXPECT_THROW(rectangular_series_params({ones(Shape({2, 2}, {3}))}), ShapeError);
  EXPECT_THROW(rectangular_series_params({}), DomainError);
}

TEST(NonuniformGaussian, SliceNormExamples) {
  EXPECT_DOUBLE_EQ(nonuniform_gaussian_sigma(ones(Shape({2}, {3}))), 3.0);
  std::vector<complex> v(6, complex(0.0, 0.0));
  v[4] = complex(0.6, 0.8) * 1.5;
  EXPECT_NEAR(nonuniform_gaussian_sigma(DenseTensor(Shape({2}, {3}), v)), 2.25, 1e-15);
}

TEST(ExpectationSandwich, ClosedFormValues) {
  const auto [lo, hi] = expectation_norm_sandwich(params(1, 1.0));
  EXPECT_DOUBLE_EQ(lo, 1.0);
  EXPECT_NEAR(hi, 2.0 * std::log(2.0 * std::numbers::e), 1e-15);
  EXPECT_NEAR(hi, 3.3863, 1e-4);
  const auto [z0, z1] = expectation_norm_sandwich(params(5, 0.0));
  EXPECT_EQ(z0, 0.0);
  EXPECT_EQ(z1, 0.0);
  // the upper/lower ratio grows like log of the dimension
  const double r4 = expectation_norm_sandwich(params(4, 2.0)).second / 2.0;
  const double r16 = expectation_norm_sandwich(params(16, 2.0)).second / 2.0;
  EXPECT_NEAR(r16 - r4, 2.0 * std::log(4.0), 1e-12);
}

TEST(BinaryDivergence, MatchesDirectFormulaAndRejectsEndpoints) {
  EXPECT_NEAR(binary_divergence(0.75, 0.5), oracle::kl(0.75, 0.5), 1e-15);
  EXPECT_NEAR(binary_divergence(0.75, 0.5), 0.13081, 1e-5);
  for (double a : {0.1, 0.3, 0.9})
    for (double b : {0.2, 0.5, 0.95}) {
      EXPECT_NEAR(binary_divergence(a, b), oracle::kl(a, b), 1e-14);
      EXPECT_GE(binary_divergence(a, b), 0.0);
    }
  EXPECT_EQ(binary_divergence(0.4, 0.4), 0.0);
  EXPECT_THROW(binary_divergence(0.0, 0.5), DomainError);
  EXPECT_THROW(binary_divergence(0.5, 1.0), DomainError);
}

TEST(ChernoffI, WorkedValuesAndRanges) {
  BoundParams p = params(4, 0.0);
  p.n = 10;
  p.mu_bar_max = 0.5;
  p.mu_bar_min = 0.3;
  EXPECT_DOUBLE_EQ(chernoff_i_upper(p, 0.5).value, 4.0);
  EXPECT_NEAR(chernoff_i_upper(p, 0.75).value, 4.0 * std::exp(-10.0 * oracle::kl(0.75, 0.5)), 1e-13);
  EXPECT_NEAR(chernoff_i_upper(p, 0.75).value, 1.081311, 1e-6);
  EXPECT_NEAR(chernoff_i_upper(p, 1.0).value, 4.0 * std::pow(0.5, 10), 1e-15);
  EXPECT_DOUBLE_EQ(chernoff_i_lower(p, 0.3).value, 4.0);
  EXPECT_NEAR(chernoff_i_lower(p, 0.1).value, 4.0 * std::exp(-10.0 * oracle::kl(0.1, 0.3)), 1e-13);
  EXPECT_NEAR(chernoff_i_lower(p, 0.0).value, 4.0 * std::pow(0.7, 10), 1e-14);
  EXPECT_THROW(chernoff_i_upper(p, 0.25), DomainError);
  EXPECT_THROW(chernoff_i_upper(p, 1.01), DomainError);
  EXPECT_THROW(chernoff_i_lower(p, 0.31), DomainError);
  p.T = 2.0;
  EXPECT_THROW(chernoff_i_upper(p, 0.75), DomainError);
}

TEST(ChernoffII, WorkedValues) {
  BoundParams p = params(1, 0.0);
  p.mu_max = 1.0;
  p.mu_min = 1.0;
  EXPECT_NEAR(chernoff_ii_upper(p, 1.0).value, std::numbers::e / 4.0, 1e-15);
  EXPECT_NEAR(chernoff_ii_upper(p, 1.0).value, 0.67957, 1e-5);
  EXPECT_DOUBLE_EQ(chernoff_ii_upper(p, 0.0).value, 1.0);
  EXPECT_DOUBLE_EQ(chernoff_ii_lower(p, 0.0).value, 1.0);
  p.dim_product = 3;
  p.mu_max = 3.0;
  p.mu_min = 2.5;
  p.T = 0.5;
  EXPECT_NEAR(chernoff_ii_lower(p, 1.0).value, 3.0 * std::exp(-5.0), 1e-15);
  EXPECT_NEAR(chernoff_ii_lower(p, 0.5).value,
              3.0 * std::pow(std::exp(-0.5) / std::pow(0.5, 0.5), 5.0), 1e-14);
  EXPECT_THROW(chernoff_ii_lower(p, 1.5), DomainError);
  EXPECT_THROW(chernoff_ii_upper(p, -1.0), DomainError);
}

TEST(ChernoffExpectation, ConstantMatchesBisectionOracle) {
  const double delta = oracle::bisect([](double d) { return std::exp(d) - 1.0 / d; }, 0.1, 1.0);
  const ChernoffConstant c = chernoff_expectation_constant();
  EXPECT_NEAR(c.delta, delta, 1e-12);
  EXPECT_NEAR(c.C, std::exp(std::exp(delta)) / delta, 1e-10);
  EXPECT_NEAR(c.delta, 0.5671, 1e-3);
  EXPECT_NEAR(c.delta, 0.56699, 2e-4);
  EXPECT_NEAR(c.C, 10.28, 0.1);
}

TEST(ChernoffExpectation, BoundsUseTheConstant) {
  BoundParams p = params(4, 0.0, 2.0);
  p.mu_max = 3.0;
  const auto [lo, hi] = chernoff_expectation_bounds(p);
  EXPECT_EQ(lo, 3.0);
  EXPECT_NEAR(hi, chernoff_expectation_constant().C * 4.0 * std::exp(-1.5), 1e-12);
}

TEST(BernsteinBounded, WorkedValuesAndRegimes) {
  const BoundParams p = params(4, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(bernstein_bounded(p, 0.0).value, 4.0);
  EXPECT_NEAR(bernstein_bounded(p, 1.0).value, 4.0 * std::exp(-0.375), 1e-15);
  EXPECT_NEAR(bernstein_bounded(p, 1.0).value, 2.7492, 1e-4);
  EXPECT_NEAR(bernstein_bounded(p, 1.0, Regime::small).value, 4.0 * std::exp(-0.375), 1e-15);
  EXPECT_NEAR(bernstein_bounded(p, 1.0, Regime::large).value, 4.0 * std::exp(-0.375), 1e-15);
  EXPECT_EQ(bernstein_bounded(p, 1.0, Regime::automatic).theorem, Theorem::bernstein_bounded_auto);
  EXPECT_THROW(bernstein_bounded(p, 2.0, Regime::small), DomainError);
  EXPECT_THROW(bernstein_bounded(p, 0.5, Regime::large), DomainError);
}

TEST(BernsteinSubexp, WorkedValuesAndRegimes) {
  const BoundParams p = params(1, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(bernstein_subexponential(p, 0.0).value, 1.0);
  EXPECT_NEAR(bernstein_subexponential(p, 1.0).value, std::exp(-0.25), 1e-15);
  EXPECT_NEAR(bernstein_subexponential(p, 1.0).value, 0.7788, 1e-4);
  EXPECT_NEAR(bernstein_subexponential(p, 0.5, Regime::small).value, std::exp(-0.0625), 1e-15);
  EXPECT_NEAR(bernstein_subexponential(p, 3.0, Regime::large).value, std::exp(-0.75), 1e-15);
  EXPECT_THROW(bernstein_subexponential(p, 3.0, Regime::small), DomainError);
}

TEST(Bernstein, RegimeFormsDominateGeneralForm) {
  for (double s2 : {0.3, 1.0, 4.0})
    for (double T : {0.5, 1.0, 2.0}) {
      const BoundParams p = params(6, s2, T);
      for (double th : grid(1e-3, 10.0 * s2 / T + 5.0 * T, 200)) {
        const Regime side = th <= s2 / T ? Regime::small : Regime::large;
        EXPECT_LE(bernstein_bounded(p, th).value, bernstein_bounded(p, th, side).value * (1 + 1e-12));
        EXPECT_LE(bernstein_subexponential(p, th).value,
                  bernstein_subexponential(p, th, side).value * (1 + 1e-12));
        EXPECT_NO_THROW(bernstein_bounded(p, th, Regime::automatic));
        EXPECT_NO_THROW(bernstein_subexponential(p, th, Regime::automatic));
      }
    }
}

TEST(Bernstein, RegimeFormsAgreeAtBoundary) {
  const BoundParams p = params(2, 1.5, 0.75);
  const double b = p.sigma_sq / p.T;
  EXPECT_NEAR(bernstein_bounded(p, b, Regime::small).value, bernstein_bounded(p, b, Regime::large).value, 1e-14);
  EXPECT_NEAR(bernstein_subexponential(p, b, Regime::small).value,
              bernstein_subexponential(p, b, Regime::large).value, 1e-14);
}

TEST(GaussianIntegral, MatchesErfAndLimit) {
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0})
    EXPECT_NEAR(gaussian_integral(x), 0.5 * std::sqrt(std::numbers::pi) * std::erf(x), 1e-13);
  EXPECT_NEAR(gaussian_integral(1.0), 0.746824, 1e-6);
  EXPECT_NEAR(gaussian_integral(std::numeric_limits<double>::infinity()), std::sqrt(std::numbers::pi) / 2.0, 1e-9);
  EXPECT_EQ(gaussian_integral(0.0), 0.0);
  EXPECT_NEAR(gaussian_integral(-1.0), -gaussian_integral(1.0), 1e-15);
}

TEST(SubexpExpectation, WorkedValueAndSmallSigmaLimit) {
  EXPECT_NEAR(subexp_expectation_upper(params(1, 4.0, 1.0)), 4.458814, 1e-6);
  const double simpson = oracle::simpson([](double s) { return std::exp(-s * s); }, 0.0, 1.0);
  EXPECT_NEAR(subexp_expectation_upper(params(1, 4.0, 1.0)), 2.0 * (2.0 * simpson + 2.0 * std::exp(-1.0)), 1e-10);
  EXPECT_NEAR(subexp_expectation_upper(params(3, 0.0, 0.5)), 4.0 * 3.0 * 0.5, 1e-15);
}

TEST(Azuma, WorkedValueAndGaussianEquivalence) {
  EXPECT_DOUBLE_EQ(azuma_mcdiarmid_bound(params(4, 1.0), 0.0).value, 4.0);
  EXPECT_NEAR(azuma_mcdiarmid_bound(params(4, 1.0), 2.0).value, 4.0 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(azuma_mcdiarmid_bound(params(4, 1.0), 2.0).value, 2.4261, 1e-4);
  for (double th : grid(0.0, 12.0))
    EXPECT_NEAR(azuma_mcdiarmid_bound(params(5, 1.7), th).value,
                gaussian_series_bound(params(5, 4.0 * 1.7), th).value, 1e-14);
  EXPECT_EQ(azuma_mcdiarmid_bound(params(4, 1.0), 1.0, Theorem::mcdiarmid).theorem, Theorem::mcdiarmid);
}

TEST(AllBounds, EqualDimensionAtZeroAndNonincreasing) {
  BoundParams p = params(6, 1.3, 0.7);
  p.n = 12;
  p.mu_max = 4.0;
  p.mu_min = 2.0;
  p.mu_bar_max = 0.6;
  p.mu_bar_min = 0.2;
  const std::vector<std::pair<const char*, std::function<double(double)>>> fs = {
      {"gaussian", [&](double t) { return gaussian_series_bound(p, t).value; }},
      {"chernoff2-upper", [&](double t) { return chernoff_ii_upper(p, t).value; }},
      {"bernstein-bounded", [&](double t) { return bernstein_bounded(p, t).value; }},
      {"bernstein-subexp", [&](double t) { return bernstein_subexponential(p, t).value; }},
      {"bernstein-bounded-auto", [&](double t) { return bernstein_bounded(p, t, Regime::automatic).value; }},
      {"azuma", [&](double t) { return azuma_mcdiarmid_bound(p, t).value; }}};
  for (const auto& [name, f] : fs) {
    EXPECT_DOUBLE_EQ(f(0.0), 6.0) << name;
    expect_nonincreasing(f, grid(0.0, 20.0), name);
  }
  expect_nonincreasing([&](double t) { return chernoff_ii_lower(p, t).value; }, grid(0.0, 1.0), "chernoff2-lower");
  BoundParams unit = p;
  unit.T = 1.0;
  expect_nonincreasing([&](double t) { return chernoff_i_upper(unit, t).value; }, grid(0.6, 1.0), "chernoff1-upper");
  // the lower-tail Chernoff I bound decreases as theta moves away from mu_bar_min
  expect_nonincreasing([&](double t) { return chernoff_i_lower(unit, 0.2 - t).value; }, grid(0.0, 0.2), "chernoff1-lower");
}

TEST(AllBounds, ScaleCovariance) {
  for (double c : {0.25, 3.0, 17.0}) {
    BoundParams p = params(4, 1.2, 0.8);
    p.mu_max = 3.0;
    p.mu_min = 1.5;
    BoundParams q = params(4, c * c * 1.2, c * 0.8);
    q.mu_max = c * 3.0;
    q.mu_min = c * 1.5;
    for (double th : {0.3, 1.0, 2.5}) {
      EXPECT_NEAR(bernstein_bounded(p, th).value, bernstein_bounded(q, c * th).value, 1e-13);
      EXPECT_NEAR(bernstein_subexponential(p, th).value, bernstein_subexponential(q, c * th).value, 1e-13);
      EXPECT_NEAR(chernoff_ii_upper(p, th).value, chernoff_ii_upper(q, th).value, 1e-13);
      EXPECT_NEAR(chernoff_ii_lower(p, th / 3.0).value, chernoff_ii_lower(q, th / 3.0).value, 1e-13);
    }
  }
}

TEST(MasterBound, GaussianCgfRecoversSeriesBound) {
  for (double s2 : {0.5, 1.0, 3.0})
    for (double th : {0.5, 1.0, 2.0, 4.0}) {
      const BoundValue m = master_bound_numeric([&](double t) { return s2 * t * t / 2.0; }, th, 4);
      EXPECT_NEAR(m.value / gaussian_series_bound(params(4, s2), th).value, 1.0, 1e-6);
    }
}

TEST(MasterBound, BoundedCgfGivesBennettAndBeatsBernstein) {
  for (double s2 : {0.5, 1.0, 2.0})
    for (double th : {0.25, 1.0, 3.0, 6.0}) {
      const BoundValue m =
          master_bound_numeric([&](double t) { return (std::exp(t) - t - 1.0) * s2; }, th, 3);
      const double bennett = 3.0 * std::exp(-s2 * bennett_h(th / s2));
      EXPECT_NEAR(m.value / bennett, 1.0, 1e-6);
      EXPECT_LE(m.value, bernstein_bounded(params(3, s2, 1.0), th).value * (1.0 + 1e-9));
    }
}

TEST(MasterBound, NeverExceedsAnyGridEvaluation) {
  auto g = [](double t) { return 0.7 * t * t + 0.1 * t * t * t; };
  const auto ts = default_t_grid(64);
  const BoundValue m = master_bound_numeric(g, 1.5, 2, ts);
  for (double t : ts) EXPECT_LE(m.value, 2.0 * std::exp(-1.5 * t + g(t)) * (1 + 1e-15));
}

TEST(MasterBound, ZeroCgfAndErrors) {
  const double v = master_bound_numeric([](double) { return 0.0; }, 1.0, 5).value;
  EXPECT_LE(v, 5.0 * std::exp(-49.0));
  EXPECT_THROW(master_bound_numeric([](double) { return 0.0; }, 1.0, 5, {}), DomainError);
  EXPECT_THROW(master_bound_numeric([](double) { return std::nan(""); }, 1.0, 5), DomainError);
  EXPECT_THROW(master_bound_numeric([](double) { return 0.0; }, 1.0, 5, {-1.0, 1.0}), DomainError);
}
