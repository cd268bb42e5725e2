#pragma once

// Reference machinery independent of the construction: a brute-force
// nearest-normal search for tiny matrices, the Schur-diagonal baseline and
// the seeded random Hermitian pair generator used by the ensembles.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "nearnormal/linalg.hpp"

namespace nearnormal {

/// N = Q diag(R) Q* from the Schur form A = Q R Q*.
inline Matrix schur_baseline(const Matrix& a) {
  require_square(a, "schur_baseline");
  if (a.rows() == 0) return a;
  Eigen::ComplexSchur<Matrix> schur(a);
  const ComplexVector diag = schur.matrixT().diagonal();
  return schur.matrixU() * diag.asDiagonal() * schur.matrixU().adjoint();
}

/// Haar-distributed unitary (QR of a complex Ginibre matrix, phases fixed).
template <class Rng>
Matrix haar_unitary(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Hermitian GUE sample scaled to unit operator norm.
template <class Rng>
Matrix unit_gue(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = Complex(normal(rng), normal(rng));
  Matrix g = hermitian_part(z);
  const double norm = op_norm(g);
  if (norm > 0.0) g /= norm;
  return g;
}

struct OracleResult {
  Matrix N;
  double distance = std::numeric_limits<double>::infinity();
  int restarts = 0;
  long evaluations = 0;
};

inline constexpr Index kOracleMaxDim = 4;

namespace detail {

struct OracleProblem {
  const Matrix* a = nullptr;
  Matrix base;  // U = base * exp(iH)
  Index n = 0;
  long evaluations = 0;

  size_t size() const { return static_cast<size_t>(n * n + 2 * n); }

  Matrix unitary(const gsl_vector* v) const {
    Matrix h = Matrix::Zero(n, n);
    size_t k = 0;
    for (Index i = 0; i < n; ++i) h(i, i) = gsl_vector_get(v, k++);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const double re = gsl_vector_get(v, k++);
        const double im = gsl_vector_get(v, k++);
        h(i, j) = Complex(re, im);
        h(j, i) = Complex(re, -im);
      }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    ComplexVector ph(n);
    for (Index i = 0; i < n; ++i) ph[i] = std::polar(1.0, es.eigenvalues()[i]);
    return base * (es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
  }

  ComplexVector values(const gsl_vector* v) const {
    const size_t off = static_cast<size_t>(n * n);
    ComplexVector mu(n);
    for (Index i = 0; i < n; ++i)
      mu[i] = Complex(gsl_vector_get(v, off + static_cast<size_t>(i)),
                      gsl_vector_get(v, off + static_cast<size_t>(n + i)));
    return mu;
  }

  double objective(const gsl_vector* v) {
    ++evaluations;
    const Matrix u = unitary(v);
    Matrix m = u.adjoint() * (*a) * u;
    m.diagonal() -= values(v);
    return op_norm(m);
  }

  static double call(const gsl_vector* v, void* self) { return static_cast<OracleProblem*>(self)->objective(v); }
};

struct GslDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

// One simplex run from H = 0 around the given base unitary and values.
inline double simplex_run(OracleProblem& prob, const ComplexVector& mu0, double step_h, double step_mu, int iters,
                          Matrix& best_u, ComplexVector& best_mu) {
  const size_t np = prob.size();
  std::unique_ptr<gsl_vector, GslDeleter> x(gsl_vector_calloc(np));
  std::unique_ptr<gsl_vector, GslDeleter> step(gsl_vector_alloc(np));
  const size_t off = static_cast<size_t>(prob.n * prob.n);
  for (Index i = 0; i < prob.n; ++i) {
    gsl_vector_set(x.get(), off + static_cast<size_t>(i), mu0[i].real());
    gsl_vector_set(x.get(), off + static_cast<size_t>(prob.n + i), mu0[i].imag());
  }
  for (size_t k = 0; k < np; ++k) gsl_vector_set(step.get(), k, k < off ? step_h : step_mu);

  gsl_multimin_function fn{&OracleProblem::call, np, &prob};
  std::unique_ptr<gsl_multimin_fminimizer, GslDeleter> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, np));
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
  for (int it = 0; it < iters; ++it) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-11) == GSL_SUCCESS) break;
  }
  const gsl_vector* xb = gsl_multimin_fminimizer_x(s.get());
  best_u = prob.unitary(xb);
  best_mu = prob.values(xb);
  return gsl_multimin_fminimizer_minimum(s.get());
}

}  // namespace detail

/// Random-restart simplex search for min ||A - U diag(mu) U*|| over unitary U
/// and complex mu. Restart 0 starts from the Schur basis; every run is
/// re-started twice from its own best point to shake off simplex collapse.
inline OracleResult nearest_normal_search(const Matrix& a, int restarts = 200, int iters = 400,
                                          std::uint64_t seed = 0x5eedULL) {
  require_square(a, "nearest_normal_search");
  const Index n = a.rows();
  if (n > kOracleMaxDim)
    throw GateViolation("nearest_normal_search", "dimension above the oracle limit", static_cast<double>(n));
  if (restarts < 1) throw PreconditionError("nearest_normal_search", "need at least one restart", restarts);
  OracleResult out;
  if (n == 0) {
    out.N = a;
    out.distance = 0.0;
    return out;
  }
  gsl_set_error_handler_off();
  std::mt19937_64 rng(seed);
  const double scale = 1.0 + op_norm(a);
  Eigen::ComplexSchur<Matrix> schur(a);

  detail::OracleProblem prob;
  prob.a = &a;
  prob.n = n;
  for (int r = 0; r < restarts; ++r) {
    Matrix u = r == 0 ? Matrix(schur.matrixU()) : haar_unitary(n, rng);
    ComplexVector mu = (u.adjoint() * a * u).diagonal();
    double run_best = std::numeric_limits<double>::infinity();
    for (int polish = 0; polish < 3; ++polish) {
      prob.base = u;
      const double step_h = polish == 0 ? 0.4 : 0.05;
      const double step_mu = (polish == 0 ? 0.2 : 0.02) * scale;
      Matrix u_new;
      ComplexVector mu_new;
      const double val = detail::simplex_run(prob, mu, step_h, step_mu, iters, u_new, mu_new);
      if (val < run_best) {
        run_best = val;
        u = u_new;
        mu = mu_new;
      }
    }
    if (run_best < out.distance) {
      out.distance = run_best;
      out.N = u * mu.asDiagonal() * u.adjoint();
    }
    ++out.restarts;
  }
  out.evaluations = prob.evaluations;
  // Report the distance of the returned matrix itself.
  out.distance = op_norm(a - out.N);
  return out;
}

struct RandomPair {
  Matrix X;
  Matrix Y;
  double commutator = 0.0;  ///< ||[X,Y]||
  double eta = 0.0;         ///< perturbation size used
  int iterations = 0;
};

/// Generator state for trial (n, scale, index) derived from the master seed only.
inline std::mt19937_64 trial_rng(std::uint64_t master_seed, Index n, double scale, std::uint64_t index) {
  const auto bits = std::bit_cast<std::uint64_t>(scale);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(bits),
                    static_cast<std::uint32_t>(bits >> 32), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Commuting diagonal pair in a random common eigenbasis plus GUE
/// perturbations, rescaled until ||[X,Y]|| lies in [0.5, 2] * scale.
inline RandomPair random_pair(Index n, double scale, std::uint64_t master_seed, std::uint64_t index) {
  if (n < 1) throw PreconditionError("random_pair", "n must be positive", static_cast<double>(n));
  if (!(scale >= 0.0)) throw PreconditionError("random_pair", "scale must be nonnegative", scale);
  auto rng = trial_rng(master_seed, n, scale, index);
  std::uniform_real_distribution<double> unif(-0.8, 0.8);
  const Matrix q = haar_unitary(n, rng);
  RealVector dx(n), dy(n);
  for (Index i = 0; i < n; ++i) {
    dx[i] = unif(rng);
    dy[i] = unif(rng);
  }
  const Matrix x0 = q * dx.cast<Complex>().asDiagonal() * q.adjoint();
  const Matrix y0 = q * dy.cast<Complex>().asDiagonal() * q.adjoint();
  const Matrix gx = unit_gue(n, rng);
  const Matrix gy = unit_gue(n, rng);

  RandomPair out;
  auto build = [&](double eta) {
    out.eta = eta;
    out.X = hermitian_part(x0 + eta * gx);
    out.Y = hermitian_part(y0 + eta * gy);
    const double m = std::max({1.0, op_norm(out.X), op_norm(out.Y)});
    out.X /= m;
    out.Y /= m;
    out.commutator = op_norm(commutator(out.X, out.Y));
  };
  if (scale == 0.0) {
    build(0.0);
    return out;
  }
  double eta = scale;
  for (int it = 0; it < 10; ++it) {
    build(eta);
    out.iterations = it + 1;
    const double c = out.commutator;
    if (c >= 0.5 * scale && c <= 2.0 * scale) break;
    eta *= c > 0.0 ? scale / c : 10.0;
  }
  return out;
}

}  // namespace nearnormal
