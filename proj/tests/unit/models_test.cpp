#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/harness/config.hpp"
#include "nonstatcov/models.hpp"

namespace nonstatcov {
namespace {

using harness::reference_ar1;
using harness::reference_sre;
using harness::reference_vma;
using harness::white_noise;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModelSpec affine_ar1() {
  ModelSpec m = reference_ar1(0.3, 1.0);
  m.coefficients[0] = CoefficientFn::affine(Matrix::Constant(1, 1, 0.3), Matrix::Constant(1, 1, 0.2));
  return m;
}

ModelSpec scalar_vma(int order, double amp) {
  ModelSpec m;
  m.family = Family::TvVMA;
  m.p = 1;
  m.order = order;
  m.kappa = 4.0;
  m.coefficients.push_back(CoefficientFn::constant(Matrix::Identity(1, 1)));
  const CoefficientFn tail =
      CoefficientFn::sinusoidal(Matrix::Constant(1, 1, 0.9), Matrix::Constant(1, 1, amp), 1.0);
  for (int j = 1; j <= order; ++j) m.coefficients.push_back(tail.scaled(std::pow(gu(j), -4.0)));
  return m;
}

TEST(CoefficientFn, Forms) {
  const Matrix one = Matrix::Identity(1, 1);
  EXPECT_EQ(CoefficientFn::constant(2 * one)(0.3)(0, 0), 2.0);
  const CoefficientFn a = CoefficientFn::affine(one, 2 * one, 0.0, 0.5);
  EXPECT_DOUBLE_EQ(a(0.25)(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(a(0.9)(0, 0), 2.0);
  const CoefficientFn s = CoefficientFn::sinusoidal(one, one, 1.0);
  EXPECT_NEAR(s(0.25)(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(s.derivative(0.0)(0, 0), kTwoPi, 1e-12);
  const CoefficientFn pl = CoefficientFn::piecewise_linear({0.0, 1.0}, {one, 3 * one});
  EXPECT_DOUBLE_EQ(pl(0.5)(0, 0), 2.0);
  EXPECT_NEAR(pl.lipschitz(), 2.0, 1e-12);
}

TEST(CovBlock, WhiteNoise) {
  const ModelSpec m = white_noise(2);
  EXPECT_EQ(cov_block(m, 100, 10, 10), Matrix(Matrix::Identity(2, 2)));
  EXPECT_EQ(cov_block(m, 100, 10, 11), Matrix(Matrix::Zero(2, 2)));
  EXPECT_EQ(cov_block(m, 100, 40, 3), Matrix(Matrix::Zero(2, 2)));
}

TEST(CovBlock, StationaryAr1Interior) {
  const ModelSpec m = reference_ar1(0.5, 1.0);
  for (long n : {50, 200})
    for (long r = -6; r <= 6; ++r)
      EXPECT_NEAR(cov_block(m, n, 100, 100 + r)(0, 0), std::pow(0.5, std::abs(r)) / 0.75, 1e-10);
}

TEST(CovBlock, TimeVaryingAr1MatchesMonteCarlo) {
  const ModelSpec m = affine_ar1();
  const long n = 200, t = 120;
  const long reps = 100000;
  double s00 = 0.0, s01 = 0.0;
  std::vector<double> a(reps), b(reps);
  for (long r = 0; r < reps; ++r) {
    const SamplePath path = simulate_path(m, n, t, t + 1, static_cast<std::uint64_t>(r));
    a[static_cast<std::size_t>(r)] = path.data(0, 0) * path.data(0, 0);
    b[static_cast<std::size_t>(r)] = path.data(0, 0) * path.data(0, 1);
    s00 += a[static_cast<std::size_t>(r)];
    s01 += b[static_cast<std::size_t>(r)];
  }
  s00 /= reps;
  s01 /= reps;
  double v00 = 0.0, v01 = 0.0;
  for (long r = 0; r < reps; ++r) {
    v00 += std::pow(a[static_cast<std::size_t>(r)] - s00, 2);
    v01 += std::pow(b[static_cast<std::size_t>(r)] - s01, 2);
  }
  const double se00 = std::sqrt(v00 / (reps - 1) / reps);
  const double se01 = std::sqrt(v01 / (reps - 1) / reps);
  EXPECT_NEAR(s00, cov_block(m, n, t, t)(0, 0), 3.0 * se00);
  EXPECT_NEAR(s01, cov_block(m, n, t, t + 1)(0, 0), 3.0 * se01);
}

TEST(StationaryCov, Ar1Closed) {
  const ModelSpec m = reference_ar1(0.5, 1.0);
  for (long r = -5; r <= 5; ++r)
    EXPECT_NEAR(stationary_cov(m, 0.4, r)(0, 0), std::pow(0.5, std::abs(r)) * 4.0 / 3.0, 1e-12);
}

TEST(StationaryCov, FarLagVanishes) {
  EXPECT_LE(spectral_norm(stationary_cov(reference_ar1(0.5, 1.0), 0.5, 60)), 1e-10);
  EXPECT_EQ(spectral_norm(stationary_cov(reference_vma(), 0.5, 400)), 0.0);
}

TEST(StationaryCov, QuadratureOfSpectralDensity) {
  const ModelSpec m = harness::reference_var3();
  const int grid = 1 << 12;
  for (long r : {0, 1, 3}) {
    CMatrix acc = CMatrix::Zero(3, 3);
    for (int k = 0; k < grid; ++k) {
      const double w = kTwoPi * k / grid;
      acc += local_spectral_density(m, 0.3, w) * std::polar(1.0, -w * static_cast<double>(r));
    }
    acc /= static_cast<double>(grid);
    const Matrix c = stationary_cov(m, 0.3, r);
    EXPECT_LE((acc.real() - c).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(acc.imag().cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LocalSpectralDensity, WhiteNoiseFlat) {
  const ModelSpec m = white_noise(2);
  for (double w : {0.0, 1.0, 3.0}) {
    const CMatrix f = local_spectral_density(m, 0.5, w);
    EXPECT_LE((f - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(LocalSpectralDensity, Ar1AtZeroFrequency) {
  EXPECT_NEAR(local_spectral_density(reference_ar1(0.5, 1.0), 0.5, 0.0)(0, 0).real(), 4.0, 1e-12);
}

TEST(LocalSpectralDensity, HermitianAndMatchesFourierSum) {
  const ModelSpec m = reference_vma();
  const auto cs = stationary_cov_sequence(m, 0.7, 300);
  for (double w : {0.0, 0.4, 2.0, 5.5}) {
    const CMatrix f = local_spectral_density(m, 0.7, w);
    EXPECT_LE((f - f.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    CMatrix sum = cs[0].cast<std::complex<double>>();
    for (std::size_t r = 1; r < cs.size(); ++r) {
      const std::complex<double> e = std::polar(1.0, w * static_cast<double>(r));
      sum += cs[r].cast<std::complex<double>>() * e +
             cs[r].transpose().cast<std::complex<double>>() * std::conj(e);
    }
    EXPECT_LE((f - sum).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(SpectralEigRange, WhiteNoiseConstant) {
  const EigRange r = spectral_eig_range(white_noise(2), {0.0, 0.5, 1.0}, {0.0, 1.0, 2.0});
  EXPECT_NEAR(r.lambda_min, r.lambda_max, 1e-14);
}

TEST(SpectralEigRange, Ar1Extrema) {
  std::vector<double> omegas;
  for (int k = 0; k < 1024; ++k) omegas.push_back(kTwoPi * k / 1024.0);
  const EigRange r = spectral_eig_range(reference_ar1(0.5, 1.0), {0.5}, omegas);
  EXPECT_NEAR(r.lambda_min, 1.0 / 2.25, 1e-12);
  EXPECT_NEAR(r.lambda_max, 4.0, 1e-12);
}

TEST(SpectralEigRange, ToeplitzSectionSandwich) {
  const ModelSpec m = reference_vma();
  std::vector<double> omegas;
  for (int k = 0; k < 512; ++k) omegas.push_back(kTwoPi * k / 512.0);
  const EigRange g = spectral_eig_range(m, {0.4}, omegas);
  const EigRange s = sym_eig_range(stationary_window(m, 0.4, 300));
  EXPECT_GE(s.lambda_min, g.lambda_min - 0.05);
  EXPECT_LE(s.lambda_max, g.lambda_max + 0.05);
}

TEST(SimulatePath, SameSeedIsBitwiseIdentical) {
  const ModelSpec m = reference_sre();
  const SamplePath a = simulate_path(m, 200, 0, 199, 42);
  const SamplePath b = simulate_path(m, 200, 0, 199, 42);
  EXPECT_EQ(a.data, b.data);
  const SamplePath c = simulate_path(m, 200, 0, 199, 43);
  EXPECT_NE(a.data, c.data);
}

TEST(SimulatePath, ZeroNoiseGivesZeroPath) {
  ModelSpec m = reference_ar1(0.0, 1.0);
  m.innovation_variance = CoefficientFn::constant(Matrix::Zero(1, 1));
  const SamplePath path = simulate_path(m, 100, 0, 49, 1);
  EXPECT_EQ(path.data.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SimulatePath, LagZeroVarianceMatchesCovBlock) {
  const ModelSpec m = affine_ar1();
  const long n = 200, t = 60, reps = 100000;
  std::vector<double> sq(reps);
  double mean = 0.0;
  for (long r = 0; r < reps; ++r) {
    const double x = simulate_path(m, n, t, t, 1000000 + static_cast<std::uint64_t>(r)).data(0, 0);
    sq[static_cast<std::size_t>(r)] = x * x;
    mean += x * x;
  }
  mean /= reps;
  double var = 0.0;
  for (double v : sq) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (reps - 1) / reps);
  EXPECT_NEAR(mean, cov_block(m, n, t, t)(0, 0), 3.0 * se);
}

TEST(PhysicalDependence, BeyondMaMemoryIsZero) {
  const ModelSpec m = scalar_vma(3, 0.1);
  const PhysicalDependence d = physical_dep_estimate(m, 100, 50, 5, 2000, 9);
  EXPECT_LE(d.value, 3.0 * d.std_error + 1e-15);
}

TEST(PhysicalDependence, WhiteNoiseLagZero) {
  const PhysicalDependence d = physical_dep_estimate(white_noise(1), 100, 50, 0, 20000, 3);
  EXPECT_NEAR(d.value, 2.0, 3.0 * d.std_error);
}

TEST(PhysicalDependence, SreDecaysGeometrically) {
  const ModelSpec m = reference_sre();
  const double rho = 0.25;
  ASSERT_LE(var_stability(m).spectral_radius, rho);
  std::vector<double> xs, ys;
  for (long j = 1; j <= 6; ++j) {
    const PhysicalDependence d = physical_dep_estimate(m, 200, 100, j, 5000, 11);
    xs.push_back(static_cast<double>(j));
    ys.push_back(std::log(std::sqrt(d.value)));
  }
  EXPECT_LE(least_squares_line(xs, ys).slope, std::log(std::sqrt(rho)) + 0.2);
}

TEST(AssumptionFit, FrozenModelIsSmooth) {
  const AssumptionFit f = assumption_fit(reference_vma().frozen(0.3), 100, 20, 80);
  EXPECT_LE(f.smoothness_gu, 1e-8);
  EXPECT_LE(f.max_gap, 1e-8);
}

TEST(AssumptionFit, ScalarVmaDecayExponent) {
  const AssumptionFit f = assumption_fit(scalar_vma(60, 0.1), 100, 0, 79);
  EXPECT_GE(f.decay.exponent, 3.5);
  EXPECT_LE(f.decay.exponent, 4.5);
}

TEST(AssumptionFit, SmoothnessGapHalvesWithN) {
  const ModelSpec m = scalar_vma(60, 0.1);
  const double g100 = assumption_fit(m, 100, 40, 70).max_gap;
  const double g200 = assumption_fit(m, 200, 80, 140).max_gap;
  EXPECT_GE(g100 / g200, 1.5);
  EXPECT_LE(g100 / g200, 2.7);
}

TEST(ValidateModel, RejectsUnstableVar) {
  EXPECT_THROW(validate_model(reference_ar1(1.2, 1.0)), ModelError);
}

TEST(ValidateModel, RejectsShapeMismatch) {
  ModelSpec m = white_noise(2);
  m.coefficients.push_back(CoefficientFn::constant(Matrix::Identity(3, 3)));
  m.order = 1;
  EXPECT_ANY_THROW(validate_model(m));
}

}  // namespace
}  // namespace nonstatcov
