#pragma once

// Dense complex linear algebra used by every construction stage: operator
// norms, normal diagonalization, functional calculus, polar machinery and
// the doubled-space (2x2 block) helpers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "nearnormal/errors.hpp"

namespace nearnormal {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_square(const Matrix& m, const std::string& stage) {
  if (m.rows() != m.cols()) throw DimensionMismatch(stage, "matrix is not square");
  if (!m.allFinite()) throw PreconditionError(stage, "matrix has non-finite entries");
}

/// Largest singular value.
inline double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.cols() <= m.rows() ? Matrix(m.adjoint() * m) : Matrix(m * m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline RealVector singular_values(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline double sigma_min(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m).minCoeff();
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw DimensionMismatch("commutator", "operands must be square and of equal dimension");
  return a * b - b * a;
}

/// ||[M, M*]||
inline double self_commutator_norm(const Matrix& m) { return op_norm(commutator(m, m.adjoint())); }

inline Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) * 0.5; }
inline Matrix skew_hermitian_part_as_hermitian(const Matrix& m) {
  return (m - m.adjoint()) * Complex(0.0, -0.5);
}

/// Unitary diagonalization M = Q diag(lambda) Q*.
struct NormalDecomposition {
  ComplexVector eigenvalues;
  Matrix eigenvectors;
  double source_residual = 0.0;  ///< ||[M, M*]|| of the decomposed matrix

  Index size() const { return eigenvalues.size(); }

  Matrix reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
  }

  /// Same eigenvectors, eigenvalues mapped by f (no finiteness check).
  NormalDecomposition mapped(const std::function<Complex(Complex)>& f) const {
    NormalDecomposition out{eigenvalues, eigenvectors, source_residual};
    for (Index i = 0; i < out.eigenvalues.size(); ++i) out.eigenvalues[i] = f(eigenvalues[i]);
    return out;
  }
};

namespace detail {

// Ascending by real part, ties broken by imaginary part.
inline std::vector<Index> eigen_order(const ComplexVector& values) {
  std::vector<Index> order(static_cast<size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (values[a].real() != values[b].real()) return values[a].real() < values[b].real();
    return values[a].imag() < values[b].imag();
  });
  return order;
}

inline NormalDecomposition sorted(const ComplexVector& values, const Matrix& vectors, double residual) {
  const auto order = eigen_order(values);
  NormalDecomposition d;
  d.eigenvalues.resize(values.size());
  d.eigenvectors.resize(vectors.rows(), vectors.cols());
  for (size_t k = 0; k < order.size(); ++k) {
    d.eigenvalues[static_cast<Index>(k)] = values[order[k]];
    d.eigenvectors.col(static_cast<Index>(k)) = vectors.col(order[k]);
  }
  d.source_residual = residual;
  return d;
}

}  // namespace detail

inline constexpr double kDefaultNormalTol = 1e-8;

inline NormalDecomposition eig_hermitian(const Matrix& h) {
  require_square(h, "eig_hermitian");
  const double asym = op_norm(h - h.adjoint());
  if (asym > 1e-10 * (1.0 + op_norm(h)))
    throw PreconditionError("eig_hermitian", "input is not Hermitian", asym);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  NormalDecomposition d;
  d.eigenvalues = es.eigenvalues().cast<Complex>();
  d.eigenvectors = es.eigenvectors();
  d.source_residual = 0.0;
  return d;
}

/// Schur-form diagonalization of a (numerically) normal matrix.
inline NormalDecomposition eig_normal(const Matrix& m, double tol = kDefaultNormalTol) {
  require_square(m, "eig_normal");
  const double norm = op_norm(m);
  const double residual = self_commutator_norm(m);
  if (residual > tol * (1.0 + norm * norm))
    throw NotNormal("eig_normal", "self-commutator exceeds normality tolerance", residual);
  if (m.rows() == 0) return {};
  Eigen::ComplexSchur<Matrix> schur(m);
  const Matrix& tri = schur.matrixT();
  const Matrix strict = tri.triangularView<Eigen::StrictlyUpper>();
  const double off = op_norm(strict);
  if (off > 10.0 * std::sqrt(tol) * (1.0 + norm))
    throw NotNormal("eig_normal", "Schur factor is not diagonal", off);
  return detail::sorted(tri.diagonal(), schur.matrixU(), residual);
}

/// Q diag(f(lambda_i)) Q*.
inline Matrix apply_function(const NormalDecomposition& d, const std::function<Complex(Complex)>& f) {
  ComplexVector values(d.size());
  for (Index i = 0; i < d.size(); ++i) {
    values[i] = f(d.eigenvalues[i]);
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
      throw PreconditionError("apply_function", "function is not finite on the spectrum",
                              std::abs(d.eigenvalues[i]));
  }
  return d.eigenvectors * values.asDiagonal() * d.eigenvectors.adjoint();
}

inline Matrix spectral_projection(const NormalDecomposition& d, const std::function<bool(Complex)>& region) {
  return apply_function(d, [&](Complex z) { return region(z) ? Complex(1.0) : Complex(0.0); });
}

struct PolarParts {
  Matrix unitary;
  Matrix modulus;
};

/// M = V |M| with V = W Z* from the SVD M = W S Z*; V is unitary even for singular M.
inline PolarParts polar_parts(const Matrix& m) {
  require_square(m, "polar_parts");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PolarParts out;
  out.unitary = svd.matrixU() * svd.matrixV().adjoint();
  out.modulus = svd.matrixV() * svd.singularValues().cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
  return out;
}

struct PolarRetraction {
  Matrix unitary;
  double eps_meas = 0.0;  ///< max(|sigma_max - 1|, |1 - sigma_min|)
  double sigma_min = 0.0;
  double sigma_max = 0.0;

  /// eps(1+eps)/(1-eps); infinite when eps >= 1.
  double bound() const {
    return eps_meas < 1.0 ? eps_meas * (1.0 + eps_meas) / (1.0 - eps_meas)
                          : std::numeric_limits<double>::infinity();
  }
};

/// U = S (S*S)^{-1/2}. With allow_far the eps < 1 requirement is dropped but
/// S must still be invertible.
inline PolarRetraction polar_retract(const Matrix& s, bool allow_far = false) {
  require_square(s, "polar_retract");
  PolarRetraction out;
  if (s.rows() == 0) return out;
  Eigen::BDCSVD<Matrix> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  out.sigma_max = sv.maxCoeff();
  out.sigma_min = sv.minCoeff();
  out.eps_meas = std::max({out.sigma_max - 1.0, 1.0 - out.sigma_min, 0.0});
  if (out.sigma_min <= 1e-14 * std::max(1.0, out.sigma_max))
    throw NotNearUnitary("polar_retract", "operator is singular", out.eps_meas);
  if (out.eps_meas >= 1.0 && !allow_far)
    throw NotNearUnitary("polar_retract", "singular values leave (0, 2)", out.eps_meas);
  out.unitary = svd.matrixU() * svd.matrixV().adjoint();
  return out;
}

/// Signed angle of z relative to w, in (-pi, pi].
inline double relative_angle(Complex z, Complex w) { return std::arg(z / w); }

namespace detail {

// In-place: rotate unimodular values within arc distance eps/4 of w by eps/2,
// away from w; exact hits rotate counterclockwise. Returns whether any moved.
inline bool push_off_point(ComplexVector& values, Complex w, double eps) {
  bool touched = false;
  for (Index i = 0; i < values.size(); ++i) {
    const double delta = relative_angle(values[i], w);
    if (std::abs(delta) < eps / 4.0) {
      values[i] *= std::polar(1.0, (delta >= 0.0 ? 1.0 : -1.0) * eps / 2.0);
      touched = true;
    }
  }
  return touched;
}

}  // namespace detail

/// Moves every eigenvalue of a unitary within arc distance eps/4 of w by
/// eps/2 along the circle, away from w (exact hits go counterclockwise).
/// Returns U unchanged when nothing is within reach.
inline Matrix perturb_off_point(const Matrix& u, Complex w, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("perturb_off_point", "eps must be positive", eps);
  require_square(u, "perturb_off_point");
  const NormalDecomposition d = eig_normal(u);
  ComplexVector values = d.eigenvalues;
  if (!detail::push_off_point(values, w, eps)) return u;
  return d.eigenvectors * values.asDiagonal() * d.eigenvectors.adjoint();
}

/// Element of M_2(A): a 2n x 2n matrix read in n x n blocks against P = I (+) 0.
class DoubledMatrix {
 public:
  DoubledMatrix() = default;
  explicit DoubledMatrix(Matrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() % 2 != 0)
      throw DimensionMismatch("DoubledMatrix", "dimension must be square and even");
    half_n_ = matrix_.rows() / 2;
  }

  Index half_n() const { return half_n_; }
  Index dim() const { return 2 * half_n_; }
  const Matrix& matrix() const { return matrix_; }
  Matrix& matrix() { return matrix_; }

  auto block(int r, int c) const { return matrix_.block(r * half_n_, c * half_n_, half_n_, half_n_); }
  auto block(int r, int c) { return matrix_.block(r * half_n_, c * half_n_, half_n_, half_n_); }

  /// The projection P = I (+) 0 of matching size.
  static Matrix projection(Index half_n) {
    Matrix p = Matrix::Zero(2 * half_n, 2 * half_n);
    p.topLeftCorner(half_n, half_n).setIdentity();
    return p;
  }

 private:
  Index half_n_ = 0;
  Matrix matrix_;
};

inline DoubledMatrix embed_diag(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw DimensionMismatch("embed_diag", "blocks must be square of equal size");
  const Index n = a.rows();
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = a;
  m.bottomRightCorner(n, n) = b;
  return DoubledMatrix(std::move(m));
}

/// P T P + (1-P) T (1-P).
inline DoubledMatrix diag_P(const DoubledMatrix& t) {
  DoubledMatrix out = t;
  out.block(0, 1).setZero();
  out.block(1, 0).setZero();
  return out;
}

/// ||[P, T]||, which in a matrix algebra is d_2(T).
inline double compute_d2(const DoubledMatrix& t) {
  return std::max(op_norm(t.block(0, 1)), op_norm(t.block(1, 0)));
}

struct PathSample {
  double t = 0.0;
  double sigma_min = 0.0;
  double commutator = 0.0;
};

/// Sampled check of ||G_t^{-1}|| < ||[P, G_t]||^{-1} along a path.
struct MarginReport {
  std::vector<PathSample> samples;
  bool pass = true;
  std::optional<double> singular_at;  ///< first sampled t with singular G_t
  std::optional<double> failing_t;    ///< first sampled t where the margin fails

  double worst_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::min(m, s.sigma_min - s.commutator);
    return m;
  }
};

inline constexpr int kDefaultPathSamples = 33;

inline MarginReport path_margin_check(const std::function<DoubledMatrix(double)>& path,
                                      int samples = kDefaultPathSamples) {
  if (samples < 2) throw PreconditionError("path_margin_check", "need at least two samples", samples);
  MarginReport report;
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
    const DoubledMatrix g = path(t);
    const RealVector sv = singular_values(g.matrix());
    PathSample s{t, sv.minCoeff(), compute_d2(g)};
    report.samples.push_back(s);
    if (s.sigma_min <= 1e-14 * std::max(1.0, sv.maxCoeff())) {
      report.pass = false;
      if (!report.singular_at) report.singular_at = t;
    }
    if (!(s.sigma_min > s.commutator)) {
      report.pass = false;
      if (!report.failing_t) report.failing_t = t;
    }
  }
  return report;
}

}  // namespace nearnormal
