#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/operator_core.hpp"
#include "nonstatcov/random.hpp"

namespace nonstatcov {
namespace {

Matrix random_spd(Rng& rng, Eigen::Index n, double ridge) {
  const Matrix a = random_normal(rng, n, n);
  const Matrix s = a * a.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
  return 0.5 * (s + s.transpose());
}

double svd_norm(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

TEST(DecayWeights, ZeroLag) {
  const DecayWeights w = decay_weights(0);
  EXPECT_EQ(w.gu, 1.0);
  EXPECT_EQ(w.zeta, 1.0);
}

TEST(DecayWeights, LogClampsBelowE) {
  const DecayWeights w = decay_weights(2);
  EXPECT_EQ(w.gu, 2.0);
  EXPECT_EQ(w.zeta, 0.5);
}

TEST(DecayWeights, TenUsesLogarithm) {
  const DecayWeights w = decay_weights(10);
  EXPECT_EQ(w.gu, 10.0);
  EXPECT_NEAR(w.zeta, std::log(10.0) / 10.0, 1e-15);
  EXPECT_NEAR(w.zeta, 0.230259, 1e-6);
}

TEST(DecayWeights, SymmetricInLag) {
  for (long j = -30; j <= 30; ++j) {
    EXPECT_EQ(gu(j), gu(-j));
    EXPECT_EQ(zeta(j), zeta(-j));
  }
}

TEST(SpectralNorm, Identity) {
  for (int n : {1, 3, 7}) EXPECT_NEAR(spectral_norm(Matrix::Identity(n, n)), 1.0, 1e-14);
}

TEST(SpectralNorm, Diagonal) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -5.0;
  EXPECT_NEAR(spectral_norm(d), 5.0, 1e-14);
}

TEST(SpectralNorm, MatchesSvdOracle) {
  Rng rng = make_rng(7);
  for (int i = 0; i < 20; ++i) {
    const Matrix a = random_normal(rng, 4, 4);
    EXPECT_NEAR(spectral_norm(a), svd_norm(a), 1e-10);
  }
}

TEST(SymEigRange, IdentityWindow) {
  const BlockWindow id(0, 2, Matrix::Identity(20, 20), true);
  const EigRange r = sym_eig_range(id);
  EXPECT_NEAR(r.lambda_min, 1.0, 1e-14);
  EXPECT_NEAR(r.lambda_max, 1.0, 1e-14);
}

TEST(SymEigRange, BlockDiagonalConstant) {
  const BlockWindow w(0, 3, 2 * Matrix::Identity(12, 12), true);
  const EigRange r = sym_eig_range(w);
  EXPECT_NEAR(r.lambda_min, 2.0, 1e-14);
  EXPECT_NEAR(r.lambda_max, 2.0, 1e-14);
}

TEST(SymEigRange, Ar1ToeplitzSandwich) {
  // 2 pi f(omega) = 1 / |1 - 0.5 e^{i omega}|^2 ranges over [4/9, 4].
  const BlockWindow w = BlockWindow::symmetric_from(0, 49, 1, [](long t, long tau) {
    return Matrix::Constant(1, 1, std::pow(0.5, std::abs(tau - t)) / 0.75);
  });
  const EigRange r = sym_eig_range(w);
  EXPECT_GE(r.lambda_min, 4.0 / 9.0 - 1e-12);
  EXPECT_LE(r.lambda_max, 4.0 + 1e-12);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(w.flat());
  EXPECT_NEAR(r.lambda_min, es.eigenvalues().minCoeff(), 1e-12);
  EXPECT_NEAR(r.lambda_max, es.eigenvalues().maxCoeff(), 1e-12);
}

TEST(BandTruncate, WideBandIsIdentity) {
  Rng rng = make_rng(3);
  const BlockWindow w(0, 2, random_spd(rng, 12, 0.1), true);
  const BandedBlockWindow b = band_truncate(w, 10);
  EXPECT_EQ(b.window().flat(), w.flat());
}

TEST(BandTruncate, ZeroBandKeepsDiagonalBlocks) {
  const BlockWindow w = BlockWindow::symmetric_banded_from(
      0, 5, 2, 1, [](long t, long tau) { return Matrix::Constant(2, 2, 1.0 + t + 10.0 * (tau - t)); });
  const BandedBlockWindow b = band_truncate(w, 0);
  for (long t = 0; t <= 5; ++t)
    for (long tau = 0; tau <= 5; ++tau) {
      const Matrix expected = t == tau ? w.block(t, tau) : Matrix::Zero(2, 2);
      EXPECT_EQ(b.window().block(t, tau), expected);
    }
}

TEST(BandTruncate, MatchesIndicatorMask) {
  Rng rng = make_rng(11);
  const int p = 3;
  const long len = 8;
  const Matrix a = random_normal(rng, p * len, p * len);
  const BlockWindow w(0, p, Matrix(a + a.transpose()), true);
  const BandedBlockWindow b = band_truncate(w, 2);
  Matrix mask = Matrix::Zero(p * len, p * len);
  for (Eigen::Index i = 0; i < p * len; ++i)
    for (Eigen::Index j = 0; j < p * len; ++j)
      if (std::abs(i / p - j / p) <= 2) mask(i, j) = 1.0;
  EXPECT_EQ(b.window().flat(), Matrix(w.flat().cwiseProduct(mask)));
}

TEST(BandedErrorBound, DirectFormula) {
  EXPECT_NEAR(banded_error_bound(1.0, 2.0, 3), 1.0, 1e-15);
  EXPECT_NEAR(banded_error_bound(1.0, 3.0, 11), 0.01, 1e-15);
}

TEST(BandedErrorBound, BoundsMaskedRemainder) {
  Rng rng = make_rng(5);
  const double k = 0.8, kappa = 3.0;
  const int p = 2;
  const BlockWindow c = BlockWindow::symmetric_from(0, 59, p, [&](long t, long tau) -> Matrix {
    if (t == tau) return Matrix::Identity(p, p);
    const Matrix r = random_normal(rng, p, p);
    return k * std::pow(gu(tau - t), -kappa) * r / svd_norm(r);
  });
  for (long m : {2, 4, 8}) {
    const Matrix rest = c.flat() - band_truncate(c, m).window().flat();
    EXPECT_LE(svd_norm(rest), banded_error_bound(k, kappa, m));
  }
}

TEST(DemkoBound, EqualSpectrumGivesZero) {
  EXPECT_EQ(demko_bound(2.0, 2.0, 1, 3), 0.0);
}

TEST(DemkoBound, DirectFormula) {
  EXPECT_NEAR(demko_bound(1.0, 4.0, 1, 2), 9.0 / 108.0, 1e-15);
}

TEST(DemkoBound, HoldsOnRandomBandedInverse) {
  Rng rng = make_rng(17);
  const int p = 2;
  const long bw = 2, len = 30;
  const BlockWindow raw = BlockWindow::symmetric_banded_from(
      0, len - 1, p, bw, [&](long, long) -> Matrix { return random_normal(rng, p, p); });
  Matrix flat = raw.flat();
  const EigRange er = sym_eig_range(raw);
  flat.diagonal().array() += 0.5 - er.lambda_min;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(flat);
  const double a = es.eigenvalues().minCoeff(), b = es.eigenvalues().maxCoeff();
  const Matrix inv = flat.inverse();
  for (long t = 0; t < len; ++t)
    for (long tau = 0; tau < len; ++tau)
      if (t != tau)
        EXPECT_LE(svd_norm(inv.block(t * p, tau * p, p, p)), demko_bound(a, b, bw, tau - t) + 1e-13);
}

TEST(SchurComplement, ZeroCouplingReturnsA) {
  Rng rng = make_rng(2);
  const Matrix a = random_spd(rng, 3, 0.5);
  const Matrix e = random_spd(rng, 4, 0.5);
  EXPECT_EQ(schur_complement(a, Matrix::Zero(3, 4), e), a);
}

TEST(SchurComplement, DiagonalArithmetic) {
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = 1.0;
  const Matrix s = schur_complement(Matrix::Identity(2, 2), b, Matrix(2.0 * Matrix::Identity(2, 2)));
  Matrix expected = Matrix::Identity(2, 2);
  expected(0, 0) = 0.5;
  EXPECT_NEAR((s - expected).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(SchurComplement, MatchesInverseOfFullInverseBlock) {
  Rng rng = make_rng(23);
  const Matrix full = random_spd(rng, 6, 0.3);
  const Matrix s = schur_complement(full.topLeftCorner(2, 2), full.topRightCorner(2, 4),
                                    Matrix(full.bottomRightCorner(4, 4)));
  const Matrix oracle = full.inverse().topLeftCorner(2, 2).inverse();
  EXPECT_NEAR((s - oracle).cwiseAbs().maxCoeff(), 0.0, 1e-9);
}

TEST(SchurComplement, SingularComplementThrows) {
  EXPECT_THROW(schur_complement(Matrix::Identity(1, 1), Matrix::Ones(1, 2), Matrix(Matrix::Zero(2, 2))),
               ConditioningError);
}

TEST(PartitionedInverse, AssemblesDenseInverse) {
  Rng rng = make_rng(29);
  const Matrix full = random_spd(rng, 7, 0.4);
  const PartitionedInverse pi = partitioned_inverse(full.topLeftCorner(3, 3), full.topRightCorner(3, 4),
                                                    full.bottomLeftCorner(4, 3),
                                                    full.bottomRightCorner(4, 4));
  EXPECT_NEAR((pi.assemble() - full.inverse()).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(RowBounds, DominateSpectralNorm) {
  Rng rng = make_rng(31);
  const int p = 2;
  const Matrix a = random_normal(rng, 20, 20);
  const BlockWindow w(0, p, Matrix(a + a.transpose()), true);
  EXPECT_GE(block_row_sum_bound(w), svd_norm(w.flat()) - 1e-12);
  std::vector<Matrix> row;
  for (int i = 0; i < 5; ++i) row.push_back(random_normal(rng, 2, 3));
  Matrix stacked(2, 15);
  for (int i = 0; i < 5; ++i) stacked.middleCols(3 * i, 3) = row[static_cast<std::size_t>(i)];
  EXPECT_GE(stacked_row_bound(row), svd_norm(stacked) - 1e-12);
}

TEST(LeastSquaresLine, RecoversExactLine) {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, -1.0, -3.0, -5.0};
  const LineFit f = least_squares_line(x, y);
  EXPECT_NEAR(f.slope, -2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

TEST(MatrixCauchySchwarz, HoldsOnRandomDraws) {
  Rng rng = make_rng(37);
  for (int i = 0; i < 50; ++i) {
    const Matrix x = random_normal(rng, 3, 40);
    const Matrix y = random_normal(rng, 2, 3) * x + random_normal(rng, 2, 40);
    const InequalityCheck c = matrix_cauchy_schwarz(x, y);
    EXPECT_TRUE(c.holds(1e-12 * c.rhs)) << c.lhs << " vs " << c.rhs;
  }
}

TEST(MatrixCauchySchwarz, EqualityForIdenticalScalars) {
  Rng rng = make_rng(41);
  const Matrix x = random_normal(rng, 1, 30);
  const InequalityCheck c = matrix_cauchy_schwarz(x, x);
  EXPECT_NEAR(c.lhs, c.rhs, 1e-12 * c.rhs);
}

TEST(ConvolutionBound, HoldsOnGrid) {
  for (int power : {2, 3, 4})
    for (long y = -20; y <= 20; ++y) EXPECT_TRUE(convolution_bound(power, y, 20000).holds()) << power << " " << y;
}

TEST(ConvolutionBound, LhsMatchesDirectSum) {
  // Direct sum over |j| <= 20000 plus the analytic tail of gu^{-2p} beyond it.
  const int power = 2;
  const long y = 5, jmax = 20000;
  double direct = 0.0;
  for (long j = -jmax; j <= jmax; ++j)
    direct += std::pow(gu(j), -power) * std::pow(gu(j + y), -power);
  const InequalityCheck c = convolution_bound(power, y, jmax);
  EXPECT_GE(c.lhs, direct - 1e-12);
  EXPECT_LE(c.lhs - direct, 1e-9);
  EXPECT_NEAR(c.rhs, (std::numbers::pi * std::numbers::pi + 3.0) * std::pow(gu(y - 1), -power), 1e-14);
  EXPECT_EQ(convolution_bound(power, -y, jmax).rhs, c.rhs);
}

TEST(BlockWindow, SymmetricConstructionRejectsAsymmetricFlat) {
  Matrix a = Matrix::Identity(4, 4);
  a(0, 1) = 1.0;
  EXPECT_THROW(BlockWindow(0, 2, a, true), InputError);
}

TEST(BlockWindow, SectionAndBlockIndexing) {
  const BlockWindow w = BlockWindow::from_blocks(
      3, 8, 1, [](long t, long tau) { return Matrix::Constant(1, 1, 10.0 * t + tau); });
  EXPECT_EQ(w.block(5, 7)(0, 0), 57.0);
  const BlockWindow s = w.section(4, 6);
  EXPECT_EQ(s.length(), 3);
  EXPECT_EQ(s.block(6, 4)(0, 0), 64.0);
}

}  // namespace
}  // namespace nonstatcov
