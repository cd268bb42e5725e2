#pragma once

// Pinching of a Hermitian pair and the doubled normal extension of an almost
// normal matrix. Both constructions are carried out in the eigenbasis of
// X = re A, where every function of X is diagonal and the band projections
// reduce to one 2x2 matrix per eigenvalue.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nearnormal/linalg.hpp"
#include "nearnormal/smoothkit.hpp"

namespace nearnormal {

namespace detail {

struct BandWeight {
  long n;
  double rho;
};

// Nonzero rho_n(x) for one eigenvalue. The support of rho_n is (np - b, np + b).
inline std::vector<BandWeight> band_weights(const BumpFamily& bump, double x) {
  std::vector<BandWeight> out;
  const double p = bump.period();
  const long lo = static_cast<long>(std::floor((x - bump.support()) / p));
  const long hi = static_cast<long>(std::ceil((x + bump.support()) / p));
  for (long n = lo; n <= hi; ++n) {
    const double r = bump.translate(n, x);
    if (r > 0.0) out.push_back({n, r});
  }
  return out;
}

// K_ab = sum_n rho_n(x_a) rho_n(x_b), so that sum_n rho_n(X) Y rho_n(X) = Q (K o Q*YQ) Q*.
inline Eigen::MatrixXd pinch_kernel(const BumpFamily& bump, const ComplexVector& x) {
  const Index m = x.size();
  std::vector<std::vector<BandWeight>> w(static_cast<size_t>(m));
  for (Index a = 0; a < m; ++a) w[static_cast<size_t>(a)] = band_weights(bump, x[a].real());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = a; b < m; ++b) {
      double s = 0.0;
      for (const auto& u : w[static_cast<size_t>(a)])
        for (const auto& v : w[static_cast<size_t>(b)])
          if (u.n == v.n) s += u.rho * v.rho;
      k(a, b) = s;
      k(b, a) = s;
    }
  return k;
}

inline void require_hermitian(const Matrix& h, const std::string& stage) {
  require_square(h, stage);
  const double asym = op_norm(h - h.adjoint());
  if (asym > 1e-10 * (1.0 + op_norm(h))) throw PreconditionError(stage, "input is not Hermitian", asym);
}

}  // namespace detail

/// Y' = sum_n rho_n(X) Y rho_n(X) for a partition bump family.
inline Matrix pinch(const Matrix& x, const Matrix& y, const BumpFamily& bump) {
  detail::require_hermitian(x, "pinch");
  detail::require_hermitian(y, "pinch");
  if (x.rows() != y.rows()) throw DimensionMismatch("pinch", "X and Y differ in size");
  if (!bump.partition()) throw PreconditionError("pinch", "bump family is not a partition of unity");
  const NormalDecomposition d = eig_hermitian(x);
  const Matrix& q = d.eigenvectors;
  const Matrix yt = q.adjoint() * y * q;
  const Eigen::MatrixXd k = detail::pinch_kernel(bump, d.eigenvalues);
  const Matrix pinched = yt.cwiseProduct(k.cast<Complex>());
  return hermitian_part(q * pinched * q.adjoint());
}

/// One band projection Pi_n evaluated at a single eigenvalue x of X:
/// [[rho_n^2, psi_n], [psi_n, e_{n-1} + e_n - rho_n^2]].
struct BandBlock {
  std::array<double, 4> entries{};  // row-major 2x2, real symmetric

  double operator()(int r, int c) const { return entries[static_cast<size_t>(2 * r + c)]; }
};

inline BandBlock band_block(const BumpFamily& unit, long n, double x) {
  const double rn = unit.translate(n, x);
  const double psi = ((n % 2 == 0) ? 1.0 : -1.0) * rn * (unit.translate(n - 1, x) + unit.translate(n + 1, x));
  const long f = static_cast<long>(std::floor(x));
  const double e = (f == n - 1 || f == n) ? 1.0 : 0.0;
  return {{rn * rn, psi, psi, e - rn * rn}};
}

struct ExtensionDiagnostics {
  double scale = 0.0;                 ///< s = ||[A,A*]||^{1/2}
  double norm_A = 0.0;
  double norm_N = 0.0;
  double distance = 0.0;              ///< ||A (+) N - T||
  double constant_K = 0.0;            ///< distance / s
  double commutator_P = 0.0;          ///< ||[P,T]||
  double normality_T = 0.0;           ///< ||[T,T*]||
  double normality_N = 0.0;           ///< ||[N,N*]||
  double pinch_shift = 0.0;           ///< ||Y - Y'|| in normalized units
  double pinch_constant = 0.0;        ///< ||Y - Y'|| / ||[X,Y]|| (normalized)
  double band_residual = 0.0;         ///< ||Y' - Y''|| in normalized units
  double projection_orthogonality = 0.0;  ///< max_{n != m} ||Pi_n Pi_m|| (per eigenvalue)
  double projection_sum = 0.0;            ///< ||sum Pi_n - I|| (per eigenvalue)
  long band_min = 0;
  long band_max = 0;
};

struct ExtensionResult {
  Matrix N;
  DoubledMatrix T;
  ExtensionDiagnostics diagnostics;
};

namespace detail {

// The construction with an explicit normalization scale s > 0.
inline ExtensionResult extend_scaled(const Matrix& a, double s) {
  const Index m = a.rows();
  const Matrix b = a / s;
  const Matrix x = hermitian_part(b);
  const Matrix y = skew_hermitian_part_as_hermitian(b);
  const BumpFamily unit = make_partition_bump(0.0, 1.0, 1.0);

  const NormalDecomposition d = eig_hermitian(x);
  const Matrix& q = d.eigenvectors;
  std::vector<double> xs(static_cast<size_t>(m));
  std::vector<long> fl(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    xs[static_cast<size_t>(i)] = d.eigenvalues[i].real();
    fl[static_cast<size_t>(i)] = static_cast<long>(std::floor(xs[static_cast<size_t>(i)]));
  }

  const Matrix yt = hermitian_part(q.adjoint() * y * q);
  const Eigen::MatrixXd k = pinch_kernel(unit, d.eigenvalues);
  const Matrix y1 = yt.cwiseProduct(k.cast<Complex>());  // Y' in the eigenbasis
  Matrix y2 = y1;                                        // Y'' = sum_m E_m Y' E_m
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      if (fl[static_cast<size_t>(i)] != fl[static_cast<size_t>(j)]) y2(i, j) = 0.0;

  // Relevant bands per eigenvalue: n with floor(x) in {n-1, n}.
  auto bands_of = [&](Index i) {
    const long f = fl[static_cast<size_t>(i)];
    return std::array<long, 2>{f, f + 1};
  };
  std::vector<std::array<BandBlock, 2>> blocks(static_cast<size_t>(m));
  ExtensionDiagnostics diag;
  diag.band_min = m > 0 ? fl.front() : 0;
  diag.band_max = m > 0 ? fl.front() + 1 : 0;
  for (Index i = 0; i < m; ++i) {
    const auto ns = bands_of(i);
    for (int t = 0; t < 2; ++t) blocks[static_cast<size_t>(i)][static_cast<size_t>(t)] = band_block(unit, ns[static_cast<size_t>(t)], xs[static_cast<size_t>(i)]);
    diag.band_min = std::min(diag.band_min, ns[0]);
    diag.band_max = std::max(diag.band_max, ns[1]);
    // Projection identities at this eigenvalue. Bands outside {f, f+1} vanish here.
    const BandBlock& p0 = blocks[static_cast<size_t>(i)][0];
    const BandBlock& p1 = blocks[static_cast<size_t>(i)][1];
    Eigen::Matrix2d a0, a1;
    a0 << p0(0, 0), p0(0, 1), p0(1, 0), p0(1, 1);
    a1 << p1(0, 0), p1(0, 1), p1(1, 0), p1(1, 1);
    diag.projection_orthogonality = std::max(diag.projection_orthogonality, (a0 * a1).norm());
    diag.projection_orthogonality = std::max(diag.projection_orthogonality, (a0 * a0 - a0).norm());
    diag.projection_orthogonality = std::max(diag.projection_orthogonality, (a1 * a1 - a1).norm());
    diag.projection_sum = std::max(diag.projection_sum, (a0 + a1 - Eigen::Matrix2d::Identity()).norm());
  }

  // T^ = sum_n Pi^_n (nI + iY' (+) nI + iY'') Pi^_n in the basis Q (+) Q.
  const Complex iu(0.0, 1.0);
  Matrix th = Matrix::Zero(2 * m, 2 * m);
  for (Index a = 0; a < m; ++a) {
    const auto na = bands_of(a);
    for (Index b = 0; b < m; ++b) {
      const auto nb = bands_of(b);
      for (int ta = 0; ta < 2; ++ta)
        for (int tb = 0; tb < 2; ++tb) {
          const long n = na[static_cast<size_t>(ta)];
          if (n != nb[static_cast<size_t>(tb)]) continue;
          const BandBlock& pa = blocks[static_cast<size_t>(a)][static_cast<size_t>(ta)];
          const BandBlock& pb = blocks[static_cast<size_t>(b)][static_cast<size_t>(tb)];
          const double delta = a == b ? static_cast<double>(n) : 0.0;
          const Complex mid[2] = {delta + iu * y1(a, b), delta + iu * y2(a, b)};
          for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
              Complex acc = 0.0;
              for (int g = 0; g < 2; ++g) acc += pa(r, g) * mid[g] * pb(g, c);
              th(r * m + a, c * m + b) += acc;
            }
        }
    }
  }

  Matrix nh = iu * y2;
  for (Index i = 0; i < m; ++i) nh(i, i) += static_cast<double>(fl[static_cast<size_t>(i)]);

  Matrix qq = Matrix::Zero(2 * m, 2 * m);
  qq.topLeftCorner(m, m) = q;
  qq.bottomRightCorner(m, m) = q;

  ExtensionResult out;
  out.N = s * (q * nh * q.adjoint());
  out.T = DoubledMatrix(s * (qq * th * qq.adjoint()));

  const Matrix y_pinched = q * y1 * q.adjoint();
  const double comm_xy = op_norm(commutator(x, y));
  diag.scale = s;
  diag.norm_A = op_norm(a);
  diag.norm_N = op_norm(out.N);
  diag.distance = op_norm(embed_diag(a, out.N).matrix() - out.T.matrix());
  diag.constant_K = diag.distance / s;
  diag.commutator_P = compute_d2(out.T);
  diag.normality_T = self_commutator_norm(out.T.matrix());
  diag.normality_N = self_commutator_norm(out.N);
  diag.pinch_shift = op_norm(y - y_pinched);
  diag.pinch_constant = comm_xy > 0.0 ? diag.pinch_shift / comm_xy : 0.0;
  diag.band_residual = op_norm(y1 - y2);
  out.diagnostics = diag;
  return out;
}

}  // namespace detail

/// Normal N and normal doubled T with A (+) N close to T, built after
/// normalizing ||[A,A*]|| to one. Throws when A is exactly normal.
inline ExtensionResult extend(const Matrix& a) {
  require_square(a, "extend");
  const double comm = self_commutator_norm(a);
  if (!(comm > 0.0)) throw PreconditionError("extend", "zero self-commutator: normalization undefined", comm);
  return detail::extend_scaled(a, std::sqrt(comm));
}

/// Same construction with a caller-chosen normalization scale (s = 1 reproduces
/// the unnormalized formulas; useful for normal inputs).
inline ExtensionResult extend_with_scale(const Matrix& a, double s) {
  require_square(a, "extend");
  if (!(s > 0.0)) throw PreconditionError("extend", "scale must be positive", s);
  return detail::extend_scaled(a, s);
}

/// Band projection Pi_n as a full 2m x 2m matrix for X Hermitian (test aid).
inline Matrix band_projection(const Matrix& x, long n) {
  detail::require_hermitian(x, "band_projection");
  const BumpFamily unit = make_partition_bump(0.0, 1.0, 1.0);
  const NormalDecomposition d = eig_hermitian(x);
  const Index m = x.rows();
  Matrix ph = Matrix::Zero(2 * m, 2 * m);
  for (Index i = 0; i < m; ++i) {
    const BandBlock p = band_block(unit, n, d.eigenvalues[i].real());
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) ph(r * m + i, c * m + i) = p(r, c);
  }
  Matrix qq = Matrix::Zero(2 * m, 2 * m);
  qq.topLeftCorner(m, m) = d.eigenvectors;
  qq.bottomRightCorner(m, m) = d.eigenvectors;
  return qq * ph * qq.adjoint();
}

}  // namespace nearnormal
