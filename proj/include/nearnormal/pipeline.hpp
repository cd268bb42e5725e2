#pragma once

// End-to-end nearby normal matrix: normalize, extend to a normal doubled
// matrix, move its spectrum onto Z + iZ, compress back to the first block and
// pinch the Hermitian parts into a commuting pair.

#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nearnormal/extension.hpp"
#include "nearnormal/lattice.hpp"
#include "nearnormal/linalg.hpp"
#include "nearnormal/smoothkit.hpp"

namespace nearnormal {

struct PipelineConfig {
  double epsilon_target = 0.5;
  double gate = 4.0;  ///< surgery gate, see LatticeOptions
  bool force = false;
  double bypass_tol = 1e-12;
  double dispersion_tol = 1e-6;
};

struct CommutingPair {
  Matrix X;
  Matrix Y;
  double dispersion = 0.0;   ///< max distance of sigma(X) to Z
  double commutator = 0.0;   ///< ||[X',Y']||
  double shift_X = 0.0;      ///< ||X - X'||
  bool fallback = false;     ///< nearest-integer clusters used beyond the 1/3 window
  std::vector<std::string> warnings;
};

struct Report {
  Index n = 0;
  double norm_A = 0.0;
  double comm_norm = 0.0;     ///< ||[A,A*]||
  double d1 = 0.0;            ///< index obstruction, zero for matrices
  double lower_bound = 0.0;
  double distance = 0.0;      ///< ||A - A'|| (pair form: ||X-X'|| + ||Y-Y'||)
  double complex_distance = 0.0;
  double frobenius_distance = 0.0;
  double ratio = 0.0;         ///< distance / ||[A,A*]||^{1/2} (pair form: / ||[X,Y]||^{1/2})
  double input_pair_commutator = 0.0;  ///< pair form: ||[X,Y]|| = ||[A,A*]|| / 2
  double normality_residual = 0.0;
  double pair_commutator = 0.0;   ///< ||[X',Y']|| of the output
  double lattice_spacing = 0.0;   ///< s / epsilon
  double lattice_residual = 0.0;  ///< max distance of sigma(X') to spacing * Z
  double dispersion = 0.0;
  double epsilon = 0.0;
  bool bypassed = false;
  bool fallback = false;
  ExtensionDiagnostics extension;
  LatticeRunTrace lattice;
  double wall_ms = 0.0;
  std::vector<std::string> warnings;
};

/// ||[A,A*]|| / (5 ||A||), the lower bound for the distance to the normal matrices.
inline double lower_bound(const Matrix& a) {
  require_square(a, "lower_bound");
  const double norm = op_norm(a);
  if (norm == 0.0) return 0.0;
  return self_commutator_norm(a) / (5.0 * norm);
}

/// Rounds sigma(X) to Z and pinches Y along the resulting clusters with the
/// (1/3, 2/3) partition bump. The bump is 0/1 on clustered spectra, so the
/// pinching is exactly block diagonal and [X', Y'] = 0 in the eigenbasis.
inline CommutingPair final_commuting_pair(const Matrix& x, const Matrix& y, bool force = false,
                                          double dispersion_tol = 1e-6) {
  detail::require_hermitian(x, "final_commuting_pair");
  detail::require_hermitian(y, "final_commuting_pair");
  if (x.rows() != y.rows()) throw DimensionMismatch("final_commuting_pair", "X and Y differ in size");
  CommutingPair out;
  const NormalDecomposition d = eig_hermitian(x);
  const Index m = d.size();
  ComplexVector rounded(m);
  for (Index i = 0; i < m; ++i) {
    const double v = d.eigenvalues[i].real();
    rounded[i] = std::round(v);
    out.dispersion = std::max(out.dispersion, std::abs(v - std::round(v)));
  }
  const Matrix& q = d.eigenvectors;
  const Matrix yt = hermitian_part(q.adjoint() * y * q);
  Eigen::MatrixXd k;
  if (out.dispersion <= 1.0 / 3.0 + dispersion_tol) {
    k = detail::pinch_kernel(make_partition_bump(1.0 / 3.0, 2.0 / 3.0, 1.0), d.eigenvalues);
    // Clustered spectrum: the bump only takes the values 0 and 1 here.
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) k(a, b) = std::round(k(a, b));
  } else {
    if (!force)
      throw SpectrumDispersion("final_commuting_pair", "sigma(X) is not within 1/3 of the integers",
                               out.dispersion);
    out.fallback = true;
    out.warnings.push_back("final_commuting_pair: spectrum dispersed (" + std::to_string(out.dispersion) +
                           "), nearest-integer clusters used (forced)");
    k = Eigen::MatrixXd::Zero(m, m);
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) k(a, b) = rounded[a] == rounded[b] ? 1.0 : 0.0;
  }
  const Matrix yp = yt.cwiseProduct(k.cast<Complex>());
  out.X = hermitian_part(q * rounded.asDiagonal() * q.adjoint());
  out.Y = hermitian_part(q * yp * q.adjoint());
  out.commutator = op_norm(commutator(out.X, out.Y));
  out.shift_X = op_norm(x - out.X);
  return out;
}

namespace detail {

inline void finish_report(Report& rep, const Matrix& a, const Matrix& ap) {
  rep.complex_distance = op_norm(a - ap);
  rep.distance = rep.complex_distance;
  rep.frobenius_distance = (a - ap).norm();
  rep.normality_residual = self_commutator_norm(ap);
  const Matrix xp = hermitian_part(ap), yp = skew_hermitian_part_as_hermitian(ap);
  rep.pair_commutator = op_norm(commutator(xp, yp));
  rep.ratio = rep.comm_norm > 0.0 ? rep.distance / std::sqrt(rep.comm_norm) : 0.0;
}

}  // namespace detail

/// A normal A' close to A, with the measured distance and every stage trace.
inline std::pair<Matrix, Report> approximate_normal(const Matrix& a, const PipelineConfig& cfg = {}) {
  require_square(a, "approximate_normal");
  if (!(cfg.epsilon_target > 0.0))
    throw PreconditionError("approximate_normal", "epsilon_target must be positive", cfg.epsilon_target);
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.n = a.rows();
  rep.norm_A = op_norm(a);
  rep.comm_norm = self_commutator_norm(a);
  rep.lower_bound = rep.norm_A > 0.0 ? rep.comm_norm / (5.0 * rep.norm_A) : 0.0;
  rep.epsilon = cfg.epsilon_target;

  Matrix ap;
  if (rep.comm_norm <= cfg.bypass_tol * (1.0 + rep.norm_A * rep.norm_A)) {
    rep.bypassed = true;
    ap = a.rows() == 0 ? a : eig_normal(a).reconstruct();
  } else {
    const double s = std::sqrt(rep.comm_norm);
    const double eps = cfg.epsilon_target;
    rep.lattice_spacing = s / eps;
    const Matrix b = (eps / s) * a;
    const ExtensionResult ext = staged("extension", [&] { return extend(b); });
    rep.extension = ext.diagnostics;
    const LatticeOptions lopt{cfg.gate, cfg.force, 1e-6};
    const LatticeResult lat = staged("lattice", [&] { return lattice_approximate(ext.T, lopt); });
    rep.lattice = lat.trace;
    for (const auto& w : lat.trace.warnings) rep.warnings.push_back("lattice: " + w);

    const Matrix c = lat.T0.block(0, 0);
    const CommutingPair pair = staged("final pair", [&] {
      return final_commuting_pair(hermitian_part(c), skew_hermitian_part_as_hermitian(c), cfg.force,
                                  cfg.dispersion_tol);
    });
    rep.dispersion = pair.dispersion;
    rep.fallback = pair.fallback;
    for (const auto& w : pair.warnings) rep.warnings.push_back(w);
    ap = (s / eps) * (pair.X + kI * pair.Y);

    // sigma(X') on the scaled lattice spacing * Z.
    const NormalDecomposition dx = eig_hermitian(hermitian_part(ap));
    for (Index i = 0; i < dx.size(); ++i)
      rep.lattice_residual =
          std::max(rep.lattice_residual, detail::lattice_distance(Complex(dx.eigenvalues[i].real(), 0.0),
                                                                  rep.lattice_spacing));
  }
  detail::finish_report(rep, a, ap);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {std::move(ap), std::move(rep)};
}

struct PairResult {
  Matrix X;
  Matrix Y;
  Report report;
};

/// Commuting Hermitian X', Y' near a Hermitian pair; distance is ||X-X'|| + ||Y-Y'||.
inline PairResult hermitian_pair_form(const Matrix& x, const Matrix& y, const PipelineConfig& cfg = {}) {
  detail::require_hermitian(x, "hermitian_pair_form");
  detail::require_hermitian(y, "hermitian_pair_form");
  if (x.rows() != y.rows()) throw DimensionMismatch("hermitian_pair_form", "X and Y differ in size");
  auto [ap, rep] = approximate_normal(x + kI * y, cfg);
  PairResult out;
  out.X = hermitian_part(ap);
  out.Y = skew_hermitian_part_as_hermitian(ap);
  rep.distance = op_norm(x - out.X) + op_norm(y - out.Y);
  rep.input_pair_commutator = op_norm(commutator(x, y));
  rep.ratio = rep.input_pair_commutator > 0.0 ? rep.distance / std::sqrt(rep.input_pair_commutator) : 0.0;
  rep.pair_commutator = op_norm(commutator(out.X, out.Y));
  out.report = std::move(rep);
  return out;
}

}  // namespace nearnormal
