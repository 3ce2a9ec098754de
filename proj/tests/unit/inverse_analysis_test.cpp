#include <cmath>

#include <gtest/gtest.h>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/harness/config.hpp"
#include "nonstatcov/inverse_analysis.hpp"

namespace nonstatcov {
namespace {

using harness::reference_ar1;
using harness::reference_var3;
using harness::reference_vma;
using harness::white_noise;

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

TEST(FiniteSectionInverse, IdentityWindow) {
  const BlockWindow id(0, 2, Matrix::Identity(30, 30), true);
  for (long pad : {0, 3}) {
    const InverseWindow d = finite_section_inverse(id, pad);
    EXPECT_EQ(d.base.length(), 15 - 2 * pad);
    EXPECT_LE(max_abs(d.base.flat() - Matrix::Identity(d.base.dim(), d.base.dim())), 1e-15);
  }
}

TEST(FiniteSectionInverse, Ar1PrecisionIsTridiagonal) {
  const ModelSpec m = reference_ar1(0.5, 1.0);
  const InverseWindow d = model_inverse(m, 100, 0, 29, 30);
  for (long t = 0; t < 30; ++t)
    for (long tau = 0; tau < 30; ++tau) {
      const double v = d.base.block(t, tau)(0, 0);
      const double expected = t == tau ? 1.25 : (std::abs(t - tau) == 1 ? -0.5 : 0.0);
      EXPECT_NEAR(v, expected, 1e-8) << t << "," << tau;
    }
}

TEST(FiniteSectionInverse, PadStability) {
  const ModelSpec m = reference_vma();
  const InverseWindow a = model_inverse(m, 200, 100, 119, 50);
  const InverseWindow b = model_inverse(m, 200, 100, 119, 100);
  for (long t = 100; t <= 119; ++t)
    for (long tau = 100; tau <= 119; ++tau)
      EXPECT_LE(spectral_norm(a.base.block(t, tau) - b.base.block(t, tau)), 1e-6);
}

TEST(FiniteSectionInverse, RejectsIndefiniteWindow) {
  Matrix a = Matrix::Identity(4, 4);
  a(3, 3) = -1.0;
  EXPECT_THROW(finite_section_inverse(BlockWindow(0, 1, a, true), 0), ConditioningError);
}

TEST(NeumannInverse, AlreadyBandedIsExact) {
  // AR(1) precision: tridiagonal, so M = 1 leaves no remainder.
  const BlockWindow c = BlockWindow::symmetric_banded_from(0, 39, 1, 1, [](long t, long tau) {
    return Matrix::Constant(1, 1, t == tau ? 1.25 : -0.5);
  });
  const NeumannResult r = neumann_inverse(c, 1, 5);
  EXPECT_LE(max_abs(r.approx.flat() - c.flat().inverse()), 1e-10);
  EXPECT_EQ(r.contraction, 0.0);
}

TEST(NeumannInverse, CertificateBoundsErrorOnVma) {
  const ModelSpec m = reference_vma();
  const BlockWindow c = cov_window(m, 200, 60, 139);
  const NeumannResult r = neumann_inverse(c, 8, 20);
  const InverseWindow dense = finite_section_inverse(c, 0);
  EXPECT_LE(spectral_norm(r.approx.flat() - dense.base.flat()), r.certificate);
}

TEST(NeumannInverse, ZeroTermsIsBandedInverse) {
  const ModelSpec m = reference_vma();
  const BlockWindow c = cov_window(m, 200, 60, 99);
  const NeumannResult r = neumann_inverse(c, 4, 0);
  const Matrix b_inv = band_truncate(c, 4).window().flat().inverse();
  EXPECT_LE(max_abs(r.approx.flat() - b_inv), 1e-10);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(band_truncate(c, 4).window().flat());
  const double b_inv_norm = 1.0 / es.eigenvalues().cwiseAbs().minCoeff();
  const double q = r.contraction;
  EXPECT_NEAR(r.certificate, b_inv_norm * q / (1.0 - q) + 1e-12 * b_inv_norm / (1.0 - q),
              1e-12 * r.certificate);
}

TEST(InverseDecayFit, BandedSourceIsBandLimited) {
  const InverseWindow d = model_inverse(reference_var3(), 200, 50, 99, 30);
  const DecayProfile prof = inverse_decay_fit(d, 4.0);
  EXPECT_TRUE(prof.band_limited);
  EXPECT_EQ(prof.band_lag, 1);
  for (std::size_t i = 0; i < prof.lags.size(); ++i)
    if (prof.lags[i] > 1) EXPECT_LE(prof.norms[i], 1e-12);
}

TEST(InverseDecayFit, VmaExponent) {
  const InverseWindow d = model_inverse(reference_vma(), 200, 0, 239, 60);
  EXPECT_GE(inverse_decay_fit(d, 4.0).exponent, 2.5);
}

TEST(InverseDecayFit, ScalingHomogeneity) {
  const BlockWindow c = cov_window(reference_vma(), 200, 0, 159);
  const DecayProfile a = inverse_decay_fit(finite_section_inverse(c, 40), 4.0);
  const DecayProfile b = inverse_decay_fit(finite_section_inverse(c.scaled(3.0), 40), 4.0);
  EXPECT_NEAR(b.constant, a.constant / 3.0, 1e-9 * a.constant);
  EXPECT_NEAR(b.exponent, a.exponent, 1e-8);
  for (std::size_t i = 0; i < a.norms.size(); ++i)
    EXPECT_NEAR(b.norms[i], a.norms[i] / 3.0, 1e-9 * a.norms.front());
}

TEST(OneSidedInverse, WhiteNoiseBlockDiagonal) {
  const InverseWindow d = one_sided_inverse(white_noise(2), 100, 80, 60);
  EXPECT_LE(max_abs(d.base.flat() - Matrix::Identity(d.base.dim(), d.base.dim())), 1e-14);
}

TEST(OneSidedInverse, Ar1BottomRow) {
  const double phi = 0.5, s2 = 2.0;
  const InverseWindow d = one_sided_inverse(reference_ar1(phi, s2), 100, 80, 60);
  EXPECT_NEAR(d.base.block(80, 80)(0, 0), 1.0 / s2, 1e-8);
  EXPECT_NEAR(d.base.block(80, 79)(0, 0), -phi / s2, 1e-8);
  for (long tau = 20; tau <= 78; ++tau) EXPECT_NEAR(d.base.block(80, tau)(0, 0), 0.0, 1e-8);
}

TEST(OneSidedInverse, DepthStability) {
  const ModelSpec m = reference_vma();
  const InverseWindow a = one_sided_inverse(m, 400, 300, 100);
  const InverseWindow b = one_sided_inverse(m, 400, 300, 200);
  for (long tau = 280; tau <= 300; ++tau)
    EXPECT_LE(spectral_norm(a.base.block(300, tau) - b.base.block(300, tau)), 1e-6);
}

TEST(InverseSmoothnessGap, FrozenModelHasNoGap) {
  const GapReport g = inverse_smoothness_gap(reference_vma().frozen(0.4), 100, 50, 60, 3, 60);
  EXPECT_LE(g.max_measured(), 1e-8);
}

TEST(InverseSmoothnessGap, LagZeroScalesLikeOneOverN) {
  const ModelSpec m = reference_vma();
  std::vector<double> gaps, constants;
  for (long n : {100, 200, 400}) {
    const long t = static_cast<long>(0.625 * static_cast<double>(n));
    const GapReport g = inverse_smoothness_gap(m, n, t, t, 0, 60);
    gaps.push_back(g.measured.front());
    constants.push_back(g.constant);
  }
  const double l2 = std::log2(gaps[0] / gaps[1]);
  EXPECT_GE(l2, 0.7);
  EXPECT_LE(l2, 1.3);
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  EXPECT_LE(*hi / *lo, 2.0);
}

TEST(InverseLipschitzGap, EqualPointsGiveZero) {
  const GapReport g = inverse_lipschitz_gap(reference_vma(), 0.3, 0.3, 4, 60);
  EXPECT_EQ(g.max_measured(), 0.0);
}

TEST(InverseLipschitzGap, HalvingDistanceHalvesGap) {
  const ModelSpec m = reference_vma();
  const double a = inverse_lipschitz_gap(m, 0.3, 0.34, 3, 60).max_measured();
  const double b = inverse_lipschitz_gap(m, 0.3, 0.32, 3, 60).max_measured();
  EXPECT_GE(a / b, 1.6);
  EXPECT_LE(a / b, 2.5);
}

TEST(InverseLipschitzGap, DerivativeIdentityMatchesFiniteDifference) {
  const ModelSpec m = reference_vma();
  const double u = 0.3, h = 1e-4;
  const auto d0 = stationary_inverse_lags(m, u - h, 3, 60);
  const auto d1 = stationary_inverse_lags(m, u + h, 3, 60);
  const auto dd = stationary_inverse_derivative(m, u, 3, 60);
  for (std::size_t r = 0; r < dd.size(); ++r) {
    const Matrix fd = (d1[r] - d0[r]) / (2.0 * h);
    EXPECT_LE(spectral_norm(fd - dd[r]), 1e-4 * std::max(spectral_norm(dd[r]), 1e-3)) << r;
  }
}

}  // namespace
}  // namespace nonstatcov
