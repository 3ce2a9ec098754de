#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/harness/config.hpp"
#include "nonstatcov/random.hpp"
#include "nonstatcov/var_extraction.hpp"

namespace nonstatcov {
namespace {

using harness::reference_arch;
using harness::reference_ar1;
using harness::reference_var3;
using harness::reference_vma;
using harness::white_noise;

ModelSpec frozen_var2() {
  ModelSpec m;
  m.family = Family::TvVAR;
  m.p = 2;
  m.order = 2;
  Matrix a(2, 2), b(2, 2);
  a << 0.4, 0.1, -0.2, 0.3;
  b << 0.1, 0.0, 0.05, -0.15;
  m.coefficients = {CoefficientFn::constant(a), CoefficientFn::constant(b)};
  Matrix s(2, 2);
  s << 1.0, 0.3, 0.3, 0.8;
  m.innovation_variance = CoefficientFn::constant(s);
  return m;
}

TEST(VarCoeffsInfinite, WhiteNoise) {
  const VarCoefficients v = var_coeffs_infinite(white_noise(2), 100, 80, 4);
  for (const auto& phi : v.phis) EXPECT_LE(phi.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((v.sigma - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(VarCoeffsInfinite, Ar1) {
  const VarCoefficients v = var_coeffs_infinite(reference_ar1(0.5, 1.0), 100, 80, 5);
  EXPECT_NEAR(v.phis[0](0, 0), 0.5, 1e-8);
  for (std::size_t j = 1; j < v.phis.size(); ++j) EXPECT_NEAR(v.phis[j](0, 0), 0.0, 1e-8);
  EXPECT_NEAR(v.sigma(0, 0), 1.0, 1e-8);
}

TEST(VarCoeffsInfinite, CoefficientsDecay) {
  const ModelSpec m = reference_vma();
  const VarCoefficients v = var_coeffs_infinite(m, 400, 250, 40);
  std::vector<double> xs, ys;
  for (int j = 2; j <= 40; ++j) {
    xs.push_back(std::log(zeta(j)));
    ys.push_back(std::log(spectral_norm(v.phis[static_cast<std::size_t>(j - 1)])));
  }
  // Envelope K zeta^{kappa - 1}: the fitted exponent is at least kappa - 1.
  EXPECT_GE(least_squares_line(xs, ys).slope, 3.0);
}

TEST(VarCoeffsInfinite, TruncationDriftIsSmall) {
  EXPECT_LE(var_truncation_drift(reference_vma(), 400, 250, 20, 150), 1e-8);
}

TEST(VarCoeffsFinite, Ar1OrderOne) {
  const VarCoefficients v = var_coeffs_finite(reference_ar1(0.5, 1.0), 100, 80, 1);
  // Yule-Walker: C_1 / C_0 with C_r = 0.5^r / 0.75.
  EXPECT_NEAR(v.phis[0](0, 0), (0.5 / 0.75) / (1.0 / 0.75), 1e-12);
}

TEST(VarCoeffsFinite, FrozenVarRecoversGenerator) {
  const ModelSpec m = frozen_var2();
  for (int d : {2, 4}) {
    const VarCoefficients v = var_coeffs_finite(m, 100, 80, d);
    EXPECT_LE((v.phis[0] - m.coefficients[0](0.8)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((v.phis[1] - m.coefficients[1](0.8)).cwiseAbs().maxCoeff(), 1e-8);
    for (int j = 3; j <= d; ++j)
      EXPECT_LE(v.phis[static_cast<std::size_t>(j - 1)].cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((v.sigma - (*m.innovation_variance)(0.8)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(VarProjection, TwoPathsAgreeOnRandomSections) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, 99);
    const int p = 2;
    const long len = 12;
    const Matrix a = random_normal(rng, p * len, p * len);
    Matrix s = a * a.transpose() / static_cast<double>(p * len) + 0.3 * Matrix::Identity(p * len, p * len);
    s = (0.5 * (s + s.transpose())).eval();
    const VarCoefficients v = var_projection(BlockWindow(0, p, s, true), 5);
    EXPECT_LE(v.path_discrepancy, 1e-8);
  }
}

TEST(BaxterGaps, FrozenFiniteVarHasNoGap) {
  const BaxterReport r = baxter_gaps(frozen_var2(), 200, 120, 4, 20);
  EXPECT_LE(r.per_lag.max_measured(), 1e-8);
}

TEST(BaxterGaps, SummedGapDecreasesWithOrder) {
  const ModelSpec m = reference_vma();
  double previous = std::numeric_limits<double>::infinity();
  for (int d : {5, 10, 20}) {
    const BaxterReport r = baxter_gaps(m, 200, 100, d, 80);
    EXPECT_LE(r.summed, previous);
    previous = r.summed;
  }
}

TEST(StationaryVarCoeffs, FrozenVarExact) {
  const ModelSpec m = frozen_var2();
  const VarCoefficients v = stationary_var_coeffs(m, 0.3, 3);
  EXPECT_LE((v.phis[0] - m.coefficients[0](0.3)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((v.phis[1] - m.coefficients[1](0.3)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(v.phis[2].cwiseAbs().maxCoeff(), 1e-8);
}

TEST(StationaryVarCoeffs, TimeVaryingAr1) {
  ModelSpec m = reference_ar1(0.3, 1.0);
  m.coefficients[0] = CoefficientFn::affine(Matrix::Constant(1, 1, 0.3), Matrix::Constant(1, 1, 0.4));
  m.innovation_variance =
      CoefficientFn::affine(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0));
  for (double u : {0.1, 0.5, 0.9}) {
    const VarCoefficients v = stationary_var_coeffs_infinite(m, u, 4);
    EXPECT_NEAR(v.phis[0](0, 0), 0.3 + 0.4 * u, 1e-10);
    EXPECT_NEAR(v.sigma(0, 0), 1.0 + u, 1e-10);
  }
}

TEST(StationaryVarCoeffs, TvVar1RecoversGeneratorAtEachU) {
  const ModelSpec m = reference_var3();
  for (double u : {0.3, 0.31, 0.32, 0.8}) {
    const VarCoefficients v = stationary_var_coeffs_infinite(m, u, 5);
    EXPECT_LE((v.phis[0] - m.coefficients[0](u)).cwiseAbs().maxCoeff(), 1e-8) << u;
    for (std::size_t j = 1; j < v.phis.size(); ++j) EXPECT_LE(v.phis[j].cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((v.sigma - (*m.innovation_variance)(u)).cwiseAbs().maxCoeff(), 1e-8) << u;
  }
}

TEST(VarSmoothnessGap, FrozenModelHasNoGap) {
  const VarSmoothness g = var_smoothness_gap(reference_var3().frozen(0.4), 200, 125, 5);
  EXPECT_LE(g.sigma.max_measured(), 1e-8);
  EXPECT_LE(g.phi.max_measured(), 1e-8);
}

TEST(VarSmoothnessGap, ExactZeroSigmaGapForFiniteModels) {
  // Sigma_T^(N) is the innovation variance at T itself, which equals Sigma(T/N).
  for (const ModelSpec& m : {reference_vma(), reference_var3()})
    for (long n : {100, 200}) {
      const long t = static_cast<long>(0.625 * static_cast<double>(n));
      EXPECT_LE(var_smoothness_gap(m, n, t, 3).sigma.max_measured(), 1e-12);
    }
}

TEST(VarSmoothnessGap, ArchSigmaGapScalesLikeOneOverN) {
  const ModelSpec m = reference_arch();
  const double g100 = var_smoothness_gap(m, 100, 62, 5).sigma.max_measured();
  const double g200 = var_smoothness_gap(m, 200, 125, 5).sigma.max_measured();
  const double l2 = std::log2(g100 / g200);
  EXPECT_GE(l2, 0.7);
  EXPECT_LE(l2, 1.3);
}

TEST(FiniteOrderCombinedGap, WithinEnvelopeConstant) {
  const ModelSpec m = reference_vma();
  double k_max = 0.0, k_min = std::numeric_limits<double>::infinity();
  for (int d : {5, 10, 20}) {
    const CombinedGap g = finite_order_combined_gap(m, 200, 125, d);
    k_max = std::max(k_max, g.measured / g.envelope);
    k_min = std::min(k_min, g.measured / g.envelope);
    EXPECT_GT(g.envelope, 0.0);
  }
  EXPECT_LT(k_max, 10.0);
}

TEST(KolmogorovGap, WhiteNoise) {
  const KolmogorovGap g = kolmogorov_gap(white_noise(2), 100, 60);
  EXPECT_NEAR(g.lhs, 0.0, 1e-12);
  EXPECT_NEAR(g.rhs, 0.0, 1e-12);
}

TEST(KolmogorovGap, Ar1SzegoFormula) {
  const KolmogorovGap g = kolmogorov_gap(reference_ar1(0.5, 1.0), 100, 60);
  EXPECT_NEAR(g.lhs, 0.0, 1e-10);
  EXPECT_NEAR(g.rhs, 0.0, 1e-10);
}

TEST(KolmogorovGap, HalvesWithN) {
  const ModelSpec m = reference_arch();
  const double a = kolmogorov_gap(m, 100, 62).gap;
  const double b = kolmogorov_gap(m, 200, 125).gap;
  EXPECT_GE(a / b, 1.5);
  EXPECT_LE(a / b, 2.7);
}

}  // namespace
}  // namespace nonstatcov
