#include <gtest/gtest.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nearnormal/linalg.hpp"
#include "test_support.hpp"

using namespace nearnormal;
using namespace nntest;

TEST(OpNorm, Examples) {
  EXPECT_NEAR(op_norm(Matrix::Identity(3, 3)), 1.0, 1e-14);
  EXPECT_EQ(op_norm(Matrix::Zero(3, 3)), 0.0);
  EXPECT_NEAR(op_norm(jordan(2)), 1.0, 1e-14);
}

TEST(OpNorm, AgreesWithJacobiSvd) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Matrix m = ginibre(1 + k % 9, rng);
    EXPECT_NEAR(op_norm(m), ref_norm(m), 1e-10 * ref_norm(m));
  }
}

TEST(Commutator, Examples) {
  const Matrix a = jordan(2);
  Matrix expected(2, 2);
  expected << 1.0, 0.0, 0.0, -1.0;
  EXPECT_LT(op_norm(commutator(a, a.adjoint()) - expected), 1e-15);
  std::mt19937_64 rng(2);
  const Matrix g = ginibre(4, rng);
  EXPECT_EQ(op_norm(commutator(g, Matrix::Identity(4, 4))), 0.0);
  const Matrix x = RealVector::LinSpaced(3, 1.0, 3.0).cast<Complex>().asDiagonal();
  const Matrix y = RealVector::LinSpaced(3, -1.0, 5.0).cast<Complex>().asDiagonal();
  EXPECT_EQ(op_norm(commutator(x, y)), 0.0);
  EXPECT_THROW(commutator(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), DimensionMismatch);
}

TEST(Commutator, MatchesLoopReference) {
  std::mt19937_64 rng(3);
  const Matrix a = ginibre(5, rng), b = ginibre(5, rng);
  EXPECT_LT(ref_norm(commutator(a, b) - ref_commutator(a, b)), 1e-12);
}

TEST(EigHermitian, Examples) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3.0, 1.0, 2.0;
  const NormalDecomposition e = eig_hermitian(d);
  EXPECT_NEAR(e.eigenvalues[0].real(), 1.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1].real(), 2.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues[2].real(), 3.0, 1e-14);
  const NormalDecomposition px = eig_hermitian(pauli_x());
  EXPECT_NEAR(px.eigenvalues[0].real(), -1.0, 1e-14);
  EXPECT_NEAR(px.eigenvalues[1].real(), 1.0, 1e-14);
  std::mt19937_64 rng(4);
  const Matrix h = random_hermitian(8, rng, 3.0);
  const NormalDecomposition dh = eig_hermitian(h);
  EXPECT_LT(op_norm(dh.reconstruct() - h), 1e-9);
  EXPECT_THROW(eig_hermitian(jordan(3)), PreconditionError);
}

TEST(EigNormal, Examples) {
  Matrix f(4, 4);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) f(j, k) = std::polar(0.5, 2.0 * std::numbers::pi * j * k / 4.0);
  const NormalDecomposition df = eig_normal(f);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(df.eigenvalues[i]), 1.0, 1e-9);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = Complex(1.0, 1.0);
  d(1, 1) = 2.0;
  const NormalDecomposition dd = eig_normal(d);
  EXPECT_NEAR(std::abs(dd.eigenvalues[0] - Complex(1.0, 1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(dd.eigenvalues[1] - 2.0), 0.0, 1e-14);

  EXPECT_THROW(eig_normal(jordan(2), 1e-6), NotNormal);
}

TEST(EigNormal, DecompositionInvariantsOnRandomNormal) {
  std::mt19937_64 rng(5);
  for (Index n : {1, 3, 8, 16}) {
    const Matrix m = random_normal(n, rng, 2.0);
    const NormalDecomposition d = eig_normal(m);
    EXPECT_LT(ref_norm(d.eigenvectors.adjoint() * d.eigenvectors - Matrix::Identity(n, n)), 1e-10 * n);
    EXPECT_LT(ref_norm(d.reconstruct() - m), 1e-9 * (1.0 + ref_norm(m)));
    for (Index i = 1; i < n; ++i) {
      const Complex a = d.eigenvalues[i - 1], b = d.eigenvalues[i];
      EXPECT_TRUE(a.real() < b.real() || (a.real() == b.real() && a.imag() <= b.imag()));
    }
  }
}

TEST(ApplyFunction, Examples) {
  std::mt19937_64 rng(6);
  const Matrix m = random_normal(5, rng);
  const NormalDecomposition d = eig_normal(m);
  EXPECT_LT(op_norm(apply_function(d, [](Complex z) { return z; }) - m), 1e-12);
  const Complex c(0.3, -2.0);
  EXPECT_LT(op_norm(apply_function(d, [&](Complex) { return c; }) - c * Matrix::Identity(5, 5)), 1e-12);

  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = Complex(1.0, 1.0);
  diag(1, 1) = 2.0;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = Complex(0.0, 2.0);
  expected(1, 1) = 4.0;
  EXPECT_LT(op_norm(apply_function(eig_normal(diag), [](Complex z) { return z * z; }) - expected), 1e-14);
  EXPECT_THROW(apply_function(d, [](Complex) { return Complex(std::nan(""), 0.0); }), PreconditionError);
}

TEST(ApplyFunction, PolynomialHomomorphism) {
  std::mt19937_64 rng(7);
  for (Index n : {2, 4, 8, 16}) {
    const Matrix m = random_normal(n, rng, 1.5);
    const NormalDecomposition d = eig_normal(m);
    const Matrix sq = apply_function(d, [](Complex z) { return z * z; });
    EXPECT_LT(ref_norm(sq - m * m), 1e-8 * (1.0 + ref_norm(m) * ref_norm(m)));
    const Matrix f = apply_function(d, [](Complex z) { return std::exp(z); });
    EXPECT_LT(ref_norm(ref_commutator(f, m)), 1e-9 * (1.0 + ref_norm(f) * ref_norm(m)));
  }
}

TEST(SpectralProjection, Examples) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.2;
  d(1, 1) = 1.7;
  const Matrix p = spectral_projection(eig_normal(d), [](Complex z) { return z.real() >= 0.0 && z.real() < 1.0; });
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  EXPECT_LT(op_norm(p - expected), 1e-14);

  std::mt19937_64 rng(8);
  const Matrix m = random_normal(6, rng, 1.5);
  const NormalDecomposition dm = eig_normal(m);
  EXPECT_LT(op_norm(spectral_projection(dm, [](Complex) { return true; }) - Matrix::Identity(6, 6)), 1e-12);
  const auto disc = [](Complex z) { return std::abs(z) < 1.0; };
  const Matrix pd = spectral_projection(dm, disc);
  EXPECT_LT(ref_norm(pd * pd - pd), 1e-10 * 6);
  EXPECT_LT(ref_norm(pd - pd.adjoint()), 1e-10 * 6);
  EXPECT_LT(ref_norm(ref_commutator(pd, m)), 1e-9);
  int rank = 0;
  for (Index i = 0; i < 6; ++i) rank += disc(dm.eigenvalues[i]) ? 1 : 0;
  EXPECT_NEAR(pd.trace().real(), rank, 1e-10);
}

TEST(PolarParts, Examples) {
  std::mt19937_64 rng(9);
  const Matrix u = random_unitary(4, rng);
  const PolarParts pu = polar_parts(u);
  EXPECT_LT(op_norm(pu.unitary - u), 1e-12);
  EXPECT_LT(op_norm(pu.modulus - Matrix::Identity(4, 4)), 1e-12);

  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = -3.0;
  const PolarParts pm = polar_parts(m);
  Matrix v = Matrix::Zero(2, 2), mod = Matrix::Zero(2, 2);
  v(0, 0) = 1.0;
  v(1, 1) = -1.0;
  mod(0, 0) = 2.0;
  mod(1, 1) = 3.0;
  EXPECT_LT(op_norm(pm.unitary - v), 1e-14);
  EXPECT_LT(op_norm(pm.modulus - mod), 1e-14);

  Matrix s = Matrix::Zero(2, 2);
  s(1, 1) = 2.0;
  const PolarParts ps = polar_parts(s);
  EXPECT_LT(op_norm(ps.unitary - Matrix::Identity(2, 2)), 1e-14);
  EXPECT_LT(op_norm(ps.modulus - s), 1e-14);
}

TEST(PolarParts, RandomInvariants) {
  std::mt19937_64 rng(10);
  for (Index n : {1, 3, 7}) {
    Matrix m = ginibre(n, rng);
    m.col(0).setZero();  // singular on purpose
    const PolarParts p = polar_parts(m);
    EXPECT_LT(ref_norm(p.unitary.adjoint() * p.unitary - Matrix::Identity(n, n)), 1e-10 * n);
    EXPECT_LT(ref_norm(p.modulus - p.modulus.adjoint()), 1e-12);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(p.modulus).eigenvalues().minCoeff(), -1e-12);
    EXPECT_LT(ref_norm(m - p.unitary * p.modulus), 1e-9 * (1.0 + ref_norm(m)));
  }
}

TEST(PolarRetract, Examples) {
  std::mt19937_64 rng(11);
  const Matrix u = random_unitary(3, rng);
  EXPECT_LT(op_norm(polar_retract(u).unitary - u), 1e-12);

  const Matrix s = 1.1 * Matrix::Identity(2, 2);
  const PolarRetraction r = polar_retract(s);
  EXPECT_LT(op_norm(r.unitary - Matrix::Identity(2, 2)), 1e-14);
  EXPECT_NEAR(op_norm(s - r.unitary), 0.1, 1e-14);
  EXPECT_LE(op_norm(s - r.unitary), 0.1 * 1.1 / 0.9);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = -1.0;
  const PolarRetraction rd = polar_retract(d);
  EXPECT_NEAR(rd.eps_meas, 0.5, 1e-14);
  Matrix sign = Matrix::Zero(2, 2);
  sign(0, 0) = 1.0;
  sign(1, 1) = -1.0;
  EXPECT_LT(op_norm(rd.unitary - sign), 1e-14);

  EXPECT_THROW(polar_retract(2.5 * Matrix::Identity(2, 2)), NotNearUnitary);
  EXPECT_THROW(polar_retract(Matrix::Zero(2, 2)), NotNearUnitary);
}

TEST(PolarRetract, RetractionBoundOnNearUnitaries) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> size(0.01, 0.6);
  for (int k = 0; k < 100; ++k) {
    const Index n = 1 + k % 8;
    const Matrix s = random_unitary(n, rng) + size(rng) * ginibre(n, rng, 1.0 / std::sqrt(2.0 * n));
    Eigen::JacobiSVD<Matrix> svd(s);
    const double eps = std::max(svd.singularValues()(0) - 1.0, 1.0 - svd.singularValues()(n - 1));
    if (eps >= 1.0) continue;
    const PolarRetraction r = polar_retract(s);
    EXPECT_NEAR(r.eps_meas, eps, 1e-12);
    EXPECT_LT(ref_norm(r.unitary.adjoint() * r.unitary - Matrix::Identity(n, n)), 1e-10 * n);
    EXPECT_LE(ref_norm(s - r.unitary), eps * (1.0 + eps) / (1.0 - eps) + 1e-9);
  }
}

TEST(PerturbOffPoint, Examples) {
  Matrix u = Matrix::Zero(2, 2);
  u(0, 0) = 1.0;
  u(1, 1) = kI;
  EXPECT_LT(op_norm(perturb_off_point(u, -1.0, 0.1) - u), 1e-15);

  // Exact hit rotates counterclockwise by eps/2.
  const Matrix m1 = -Matrix::Identity(1, 1);
  const Matrix u0 = perturb_off_point(m1, -1.0, 0.2);
  EXPECT_NEAR(std::abs(u0(0, 0) - std::polar(1.0, std::numbers::pi + 0.1)), 0.0, 1e-14);
  EXPECT_NEAR(relative_angle(u0(0, 0), -1.0), 0.1, 1e-14);
  EXPECT_LE(std::abs(u0(0, 0) + 1.0), 0.2);

  EXPECT_THROW(perturb_off_point(u, -1.0, 0.0), PreconditionError);
}

TEST(PerturbOffPoint, ContractOnRandomUnitaries) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    const Index n = 5;
    const double eps = k == 0 ? 0.05 : 0.02 + 0.01 * (k % 10);
    Matrix u = random_unitary(n, rng);
    // Put one eigenvalue close to -1 half the time.
    if (k % 2 == 0) {
      const NormalDecomposition d = eig_normal(u);
      ComplexVector v = d.eigenvalues;
      v[0] = std::polar(1.0, std::numbers::pi - 0.1 * eps);
      u = d.eigenvectors * v.asDiagonal() * d.eigenvectors.adjoint();
    }
    const Matrix u0 = perturb_off_point(u, -1.0, eps);
    EXPECT_LE(ref_norm(u - u0), eps + 1e-12);
    const ComplexVector ev = Eigen::ComplexEigenSolver<Matrix>(u0).eigenvalues();
    for (Index i = 0; i < n; ++i) EXPECT_GE(std::abs(std::arg(-ev[i])), eps / 4.0 - 1e-10);
  }
}

TEST(Doubled, EmbedAndDiagP) {
  const DoubledMatrix i4 = embed_diag(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  EXPECT_LT(op_norm(i4.matrix() - Matrix::Identity(4, 4)), 1e-15);
  EXPECT_EQ(i4.half_n(), 2);
  const DoubledMatrix d12 = embed_diag(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0));
  EXPECT_EQ(d12.half_n(), 1);
  EXPECT_EQ(d12.matrix()(0, 0), Complex(1.0));
  EXPECT_EQ(d12.matrix()(1, 1), Complex(2.0));
  EXPECT_EQ(d12.matrix()(0, 1), Complex(0.0));
  const DoubledMatrix comp = embed_diag(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
  EXPECT_LT(op_norm(comp.matrix() - (Matrix::Identity(4, 4) - DoubledMatrix::projection(2))), 1e-15);
  EXPECT_THROW(embed_diag(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), DimensionMismatch);
  EXPECT_THROW(DoubledMatrix(Matrix::Zero(3, 3)), DimensionMismatch);

  EXPECT_LT(op_norm(diag_P(i4).matrix() - i4.matrix()), 1e-15);
  const DoubledMatrix ones(Matrix::Constant(2, 2, 1.0));
  EXPECT_LT(op_norm(diag_P(ones).matrix() - Matrix::Identity(2, 2)), 1e-15);
}

TEST(Doubled, D2MatchesCommutatorWithP) {
  std::mt19937_64 rng(14);
  const DoubledMatrix t(ginibre(8, rng));
  const Matrix p = DoubledMatrix::projection(4);
  EXPECT_NEAR(compute_d2(t), ref_norm(ref_commutator(p, t.matrix())), 1e-12);
  EXPECT_NEAR(ref_norm(t.matrix() - diag_P(t).matrix()), compute_d2(t), 1e-12);

  EXPECT_EQ(compute_d2(embed_diag(ginibre(3, rng), ginibre(3, rng))), 0.0);
  Matrix off = Matrix::Zero(4, 4);
  const Matrix r = ginibre(2, rng);
  off.topRightCorner(2, 2) = r;
  EXPECT_NEAR(compute_d2(DoubledMatrix(off)), ref_norm(r), 1e-12);
}

namespace {

struct BlockDiagProblem {
  const Matrix* t;
  Index n;  // half size

  Matrix block_diag(const gsl_vector* v) const {
    Matrix b = Matrix::Zero(2 * n, 2 * n);
    size_t k = 0;
    for (int blk = 0; blk < 2; ++blk)
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          b(blk * n + i, blk * n + j) = Complex(gsl_vector_get(v, k), gsl_vector_get(v, k + 1));
          k += 2;
        }
    return b;
  }

  static double f(const gsl_vector* v, void* self) {
    auto* p = static_cast<BlockDiagProblem*>(self);
    return ref_norm(*p->t - p->block_diag(v));
  }
};

// Minimizes ||T - B|| over block-diagonal B from B = 0 with a derivative-free search.
double brute_force_d2(const Matrix& t) {
  BlockDiagProblem prob{&t, t.rows() / 2};
  const size_t np = static_cast<size_t>(4 * prob.n * prob.n);
  gsl_vector* x = gsl_vector_calloc(np);
  gsl_vector* step = gsl_vector_alloc(np);
  gsl_multimin_function fn{&BlockDiagProblem::f, np, &prob};
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, np);
  double best = BlockDiagProblem::f(x, &prob);
  for (int round = 0; round < 12; ++round) {
    gsl_vector_set_all(step, round == 0 ? 0.5 : 0.5 / (1 << round));
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    for (int it = 0; it < 20000; ++it) {
      if (gsl_multimin_fminimizer_iterate(s) != 0) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-12) == GSL_SUCCESS) break;
    }
    gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(s));
    best = std::min(best, gsl_multimin_fminimizer_minimum(s));
  }
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return best;
}

}  // namespace

TEST(Doubled, D2EqualsDistanceToBlockDiagonals) {
  std::mt19937_64 rng(15);
  for (Index dim : {4, 6}) {
    for (int k = 0; k < 3; ++k) {
      const Matrix t = ginibre(dim, rng);
      const double oracle = brute_force_d2(t);
      const double d2 = compute_d2(DoubledMatrix(t));
      EXPECT_GE(oracle, d2 - 1e-9);  // no block-diagonal does better than diag_P(T)
      EXPECT_NEAR(oracle, d2, 1e-6);
    }
  }
}

TEST(PathMargin, Examples) {
  const MarginReport id = path_margin_check([](double) { return DoubledMatrix(Matrix::Identity(2, 2)); });
  EXPECT_TRUE(id.pass);
  EXPECT_EQ(id.samples.size(), 33u);
  EXPECT_NEAR(id.samples.front().sigma_min, 1.0, 1e-15);
  EXPECT_EQ(id.samples.front().commutator, 0.0);

  const MarginReport sing = path_margin_check([](double t) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0 - t;
    return DoubledMatrix(m);
  });
  EXPECT_FALSE(sing.pass);
  ASSERT_TRUE(sing.singular_at.has_value());
  EXPECT_EQ(*sing.singular_at, 1.0);
}

TEST(PathMargin, StraightHomotopyNearBlockDiagonal) {
  // G_t = t T + (1 - t) diag_P T for a small off-diagonal perturbation.
  std::mt19937_64 rng(16);
  const Matrix u = random_unitary(3, rng), v = random_unitary(3, rng);
  const DoubledMatrix base = embed_diag(u, v);
  Matrix pert = Matrix::Zero(6, 6);
  pert.topRightCorner(3, 3) = 0.05 * ginibre(3, rng, 1.0 / 3.0);
  const DoubledMatrix t(base.matrix() + pert);
  const MarginReport r = path_margin_check([&](double s) { return DoubledMatrix(base.matrix() + s * pert); });
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.worst_margin(), 0.5);
  EXPECT_NEAR(r.samples.back().commutator, compute_d2(t), 1e-15);
}
