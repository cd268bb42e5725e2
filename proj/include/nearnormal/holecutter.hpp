#pragma once

// Spectrum surgery on normal doubled matrices: removing a point from a
// spectrum on a star-shaped curve, cutting a unit disc out of the spectrum
// (generic and line-spectrum variants), and cutting many well separated discs
// at once. All functional calculus is done on one unitary diagonalization of
// the input, which the internal entry points accept precomputed.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nearnormal/linalg.hpp"
#include "nearnormal/smoothkit.hpp"

namespace nearnormal {

enum class HoleMode { generic, line };

struct HoleSpec {
  Complex center;
  HoleMode mode = HoleMode::generic;
  double theta = 0.0;  ///< line direction e^{i theta}, line mode only
};

struct CutOptions {
  double gate = 4.0;  ///< upper bound on ||[P,T]||, calibrated on the standard ensemble
  bool force = false;  ///< downgrade gate and margin failures to warnings
  double line_tol = 1e-6;
  double curve_tol = 1e-6;
};

struct CurveCut {
  DoubledMatrix T0;
  std::array<NormalDecomposition, 2> blocks;  ///< diagonal blocks of T0
  double input_commutator = 0.0;
  double distance = 0.0;         ///< ||T - T0||
  double constant = 0.0;         ///< distance / ||[P,T]|| (0 when [P,T] = 0)
  double eps_p = 0.0;
  double retract_eps = 0.0;      ///< worst polar-retraction eps over both blocks
  double center_margin = 0.0;    ///< sigma_min of diag_P(T - c)
  double avoidance = 0.0;        ///< min |sigma(T0) - z0|
  std::vector<std::string> warnings;
};

struct DiscCutReport {
  double input_commutator = 0.0;   ///< ||[P,T]||
  double output_commutator = 0.0;  ///< ||[P,U]||
  double constant = 0.0;           ///< output / input (0 when input is 0)
  double diag_sigma_min = 0.0;     ///< sigma_min(diag_P U)
  double retract_eps = 0.0;
  double retract_shift = 0.0;      ///< ||S - U||
  double unitarity = 0.0;          ///< ||U*U - I||
  double block_residual = 0.0;     ///< max_r ||[U, Pi_r]||
  double polar_agreement = 0.0;    ///< agreement with the polar part of T off the cut disc
  double approximant_distance = 0.0;
  double singular_floor = 0.0;
  double line_condition = 0.0;     ///< max distance of sigma(T) in O_3 to the line
  double line_residual = 0.0;      ///< max distance of sigma(U|ran Pi_2) to {+-e^{i theta}}
  double plus_margin = 0.0;        ///< sigma_min diag_P(T + i e^{i theta})
  double minus_margin = 0.0;       ///< sigma_min diag_P(T - i e^{i theta})
  std::vector<std::string> warnings;
};

struct DiscCut {
  Matrix unitary;
  DiscCutReport report;
};

struct HoleRecord {
  HoleSpec spec;
  bool active = false;
  double commutator_U = 0.0;    ///< ||[P,U_j]||
  double avoidance = 0.0;       ///< min |sigma(T') - lambda_j| - 1 (>= 0 when O_1 is clear)
  double block_residual = 0.0;  ///< max_{r in {1,2}} ||[T', Pi_r^j]||
  double line_residual = 0.0;   ///< line mode: max distance of sigma(T') in O_2 to the line
  DiscCutReport cut;
};

struct SurgeryReport {
  double input_commutator = 0.0;
  double output_commutator = 0.0;
  double amplification = 0.0;  ///< output / input (0 when input is 0)
  double distance = 0.0;       ///< ||T - T'||
  double normality = 0.0;      ///< ||[T',T'*]||
  double outside_residual = 0.0;  ///< ||(T' - T)(I - sum Pi_2^j)||
  double min_avoidance = 0.0;
  double max_block_residual = 0.0;
  double max_line_residual = 0.0;
  int active_holes = 0;
  std::vector<HoleRecord> holes;
  std::vector<std::string> warnings;
};

struct HoleCutResult {
  DoubledMatrix T;
  NormalDecomposition decomposition;  ///< of T
  SurgeryReport report;
};

/// The eigenvalue map of one hole on its annulus:
/// z -> lambda + (z - lambda)(1 + (|z - lambda|^{-1} - 1) chi^2(|z - lambda|)).
inline Complex annulus_map(Complex z, Complex lambda) {
  const DiscCutoff chi;
  const Complex d = z - lambda;
  const double r = std::abs(d);
  if (r == 0.0) return lambda;
  return lambda + d * (1.0 + (1.0 / r - 1.0) * chi.squared(r));
}

namespace detail {

using IndexList = std::vector<Index>;

inline IndexList select(const ComplexVector& values, const std::function<bool(Complex)>& pred) {
  IndexList out;
  for (Index i = 0; i < values.size(); ++i)
    if (pred(values[i])) out.push_back(i);
  return out;
}

inline IndexList complement(const IndexList& s, Index n) {
  std::vector<bool> in(static_cast<size_t>(n), false);
  for (Index i : s) in[static_cast<size_t>(i)] = true;
  IndexList out;
  for (Index i = 0; i < n; ++i)
    if (!in[static_cast<size_t>(i)]) out.push_back(i);
  return out;
}

inline Matrix columns(const Matrix& m, const IndexList& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = m.col(idx[k]);
  return out;
}

inline Matrix sub(const Matrix& m, const IndexList& r, const IndexList& c) {
  Matrix out(static_cast<Index>(r.size()), static_cast<Index>(c.size()));
  for (size_t a = 0; a < r.size(); ++a)
    for (size_t b = 0; b < c.size(); ++b) out(static_cast<Index>(a), static_cast<Index>(b)) = m(r[a], c[b]);
  return out;
}

// ||[M, Pi_S]|| for the coordinate projection onto S.
inline double cross_norm(const Matrix& m, const IndexList& s) {
  const IndexList c = complement(s, m.rows());
  if (s.empty() || c.empty()) return 0.0;
  return std::max(op_norm(sub(m, s, c)), op_norm(sub(m, c, s)));
}

// U = Q Ue Q*, where Ue is a dense unitary block on `inside` and a unimodular
// diagonal elsewhere.
struct EigenUnitary {
  IndexList inside;
  Matrix block;
  ComplexVector diagonal;

  Matrix dense() const {
    Matrix m = diagonal.asDiagonal();
    for (size_t a = 0; a < inside.size(); ++a)
      for (size_t b = 0; b < inside.size(); ++b)
        m(inside[a], inside[b]) = block(static_cast<Index>(a), static_cast<Index>(b));
    return m;
  }

  Matrix full(const Matrix& q) const {
    ComplexVector outer = diagonal;
    for (Index i : inside) outer[i] = 0.0;
    Matrix u = (q * outer.asDiagonal()) * q.adjoint();
    if (!inside.empty()) {
      const Matrix qin = columns(q, inside);
      u += (qin * block) * qin.adjoint();
    }
    return u;
  }
};

struct DiscCutInternal {
  EigenUnitary eigen;
  Matrix unitary;
  DiscCutReport report;
};

inline void gate_check(double value, const CutOptions& opt, const std::string& stage,
                       std::vector<std::string>& warnings) {
  if (value < opt.gate) return;
  if (!opt.force) throw GateViolation(stage, "||[P,T]|| exceeds the gate", value);
  warnings.push_back(stage + ": ||[P,T]|| = " + std::to_string(value) + " exceeds gate (forced)");
}

/// min over both diagonal blocks of sigma_min(T_kk - shift).
inline double block_sigma_min(const DoubledMatrix& t, Complex shift) {
  const Index n = t.half_n();
  const Matrix id = Matrix::Identity(n, n);
  return std::min(sigma_min(Matrix(t.block(0, 0)) - shift * id), sigma_min(Matrix(t.block(1, 1)) - shift * id));
}

inline Complex unit_phase(Complex z) { return z == Complex(0.0) ? Complex(1.0) : z / std::abs(z); }

// Block-diagonal V0 (as a 2n x 2n matrix) applied to columns of Q: V0 * qin.
inline Matrix block_apply(const std::array<Matrix, 2>& v0, const Matrix& qin) {
  const Index n = v0[0].rows();
  Matrix out(qin.rows(), qin.cols());
  out.topRows(n) = v0[0] * qin.topRows(n);
  out.bottomRows(n) = v0[1] * qin.bottomRows(n);
  return out;
}

// Polar retraction of S = diag(r1) V diag(r1) + diag(vr) restricted to `inside`,
// where S is exactly block diagonal in the eigenbasis.
inline PolarRetraction inside_retraction(const Matrix& v_in, const RealVector& r1, const ComplexVector& vr,
                                         bool allow_far, Matrix& s_in) {
  s_in = r1.cast<Complex>().asDiagonal() * v_in * r1.cast<Complex>().asDiagonal();
  s_in.diagonal() += vr;
  if (s_in.rows() == 0) return PolarRetraction{Matrix(0, 0), 0.0, 1.0, 1.0};
  PolarRetraction pr = polar_retract(s_in, allow_far);
  // Outside the block S is unimodular diagonal, singular values exactly 1.
  pr.sigma_min = std::min(pr.sigma_min, 1.0);
  pr.sigma_max = std::max(pr.sigma_max, 1.0);
  return pr;
}

// Shared report entries measured on the assembled unitary.
inline Matrix finish_disc_report(DiscCutReport& rep, const Matrix& u, const Matrix& q, const PolarRetraction& pr,
                                 const Matrix& s_in, const Matrix& block) {
  const DoubledMatrix ud(u);
  rep.output_commutator = compute_d2(ud);
  rep.constant = rep.input_commutator > 0.0 ? rep.output_commutator / rep.input_commutator : 0.0;
  rep.diag_sigma_min = ud.half_n() > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (int k = 0; k < 2 && ud.half_n() > 0; ++k) {
    const Matrix b = ud.block(k, k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(b.adjoint() * b), Eigen::EigenvaluesOnly);
    rep.diag_sigma_min = std::min(rep.diag_sigma_min, std::sqrt(std::max(0.0, es.eigenvalues().minCoeff())));
  }
  rep.retract_eps = pr.eps_meas;
  rep.retract_shift = block.size() > 0 ? op_norm(s_in - block) : 0.0;
  const Matrix uh = q.adjoint() * u * q;
  // Off the block U is a diagonal of unit phases.
  if (block.size() > 0)
    rep.unitarity = op_norm(block.adjoint() * block - Matrix::Identity(block.rows(), block.cols()));
  return uh;
}

inline double max_cross_norm(const Matrix& mh, const ComplexVector& lambda, const std::vector<double>& radii) {
  double worst = 0.0;
  for (double r : radii)
    worst = std::max(worst, cross_norm(mh, select(lambda, [&](Complex z) { return std::abs(z) < r; })));
  return worst;
}

// Curve cut on T with eigenbasis q and eigenvalues lambda.
inline CurveCut cut_point_on_curve(const DoubledMatrix& t, const Matrix& q, const ComplexVector& lambda,
                                   const StarCurve& curve, Complex z0, const CutOptions& opt) {
  CurveCut out;
  double off = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) off = std::max(off, curve.radial_residual(lambda[i]));
  if (off > opt.curve_tol) throw PreconditionError("cut_point_on_curve", "spectrum is off the curve", off);
  if (curve.radial_residual(z0) > opt.curve_tol)
    throw PreconditionError("cut_point_on_curve", "z0 is not on the curve", curve.radial_residual(z0));

  out.input_commutator = compute_d2(t);
  out.center_margin = block_sigma_min(t, curve.center);
  if (out.center_margin <= 1e-12 * (1.0 + op_norm(t.matrix()))) {
    if (!opt.force)
      throw MarginFailure("cut_point_on_curve", "diag_P(T - c) is singular", out.center_margin);
    out.warnings.push_back("cut_point_on_curve: diag_P(T - c) numerically singular (forced)");
  }

  const CircleMap cm = circle_map(curve);
  const Complex u0 = unit_phase(cm.forward(z0));
  ComplexVector wv(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) wv[i] = (-1.0 / u0) * cm.forward(lambda[i]);
  const Matrix w = (q * wv.asDiagonal()) * q.adjoint();
  out.eps_p = std::max(out.input_commutator, 1e-10);

  const Index n = t.half_n();
  Matrix t0 = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < 2; ++k) {
    const PolarRetraction pr = polar_retract(w.block(k * n, k * n, n, n), opt.force);
    out.retract_eps = std::max(out.retract_eps, pr.eps_meas);
    NormalDecomposition dk = eig_normal(pr.unitary);
    ComplexVector nu = dk.eigenvalues;
    push_off_point(nu, -1.0, out.eps_p);
    for (Index i = 0; i < nu.size(); ++i) dk.eigenvalues[i] = cm.inverse(-u0 * unit_phase(nu[i]));
    dk.source_residual = 0.0;
    t0.block(k * n, k * n, n, n) = dk.reconstruct();
    out.blocks[static_cast<size_t>(k)] = std::move(dk);
  }
  out.T0 = DoubledMatrix(std::move(t0));
  out.distance = op_norm(t.matrix() - out.T0.matrix());
  out.constant = out.input_commutator > 0.0 ? out.distance / out.input_commutator : 0.0;
  out.avoidance = std::numeric_limits<double>::infinity();
  for (const auto& b : out.blocks)
    for (Index i = 0; i < b.size(); ++i) out.avoidance = std::min(out.avoidance, std::abs(b.eigenvalues[i] - z0));
  return out;
}

// Disc cut for T - shift, whose eigenvalues are lambda in the eigenbasis q.
inline DiscCutInternal cut_disc_u1(const DoubledMatrix& t, double d2, Complex shift, const Matrix& q,
                                   const ComplexVector& lambda, const CutOptions& opt) {
  DiscCutInternal out;
  DiscCutReport& rep = out.report;
  rep.input_commutator = d2;
  gate_check(rep.input_commutator, opt, "cut_disc_u1", rep.warnings);

  // Block-diagonal invertible approximant: floor the singular values of each block.
  const Index n = t.half_n();
  rep.singular_floor = std::max(rep.input_commutator, 1e-12);
  std::array<Matrix, 2> v0;
  double floor_gap = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Matrix m = Matrix(t.block(k, k)) - shift * Matrix::Identity(n, n);
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    floor_gap = std::max(floor_gap, std::max(0.0, rep.singular_floor - sv.minCoeff()));
    v0[static_cast<size_t>(k)] = svd.matrixU() * svd.matrixV().adjoint();
  }
  // ||T - T0|| <= ||T - diag_P T|| + floor gap.
  rep.approximant_distance = rep.input_commutator + floor_gap;

  const Rho12 rho;
  const IndexList inside = select(lambda, [](Complex z) { return std::norm(z) < 1.0; });
  const Matrix qin = columns(q, inside);
  RealVector r1(static_cast<Index>(inside.size()));
  ComplexVector vr(static_cast<Index>(inside.size()));
  for (size_t k = 0; k < inside.size(); ++k) {
    const Complex z = lambda[inside[k]];
    r1[static_cast<Index>(k)] = rho.rho1(std::norm(z));
    vr[static_cast<Index>(k)] = unit_phase(z) * rho.rho2_sq(std::norm(z));
  }
  const Matrix v_in = qin.adjoint() * block_apply(v0, qin);
  Matrix s_in;
  const PolarRetraction pr =
      staged("cut_disc_u1", [&] { return inside_retraction(v_in, r1, vr, opt.force, s_in); });

  out.eigen.inside = inside;
  out.eigen.block = pr.unitary;
  out.eigen.diagonal.resize(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) out.eigen.diagonal[i] = unit_phase(lambda[i]);
  out.unitary = out.eigen.full(q);

  const Matrix uh = finish_disc_report(rep, out.unitary, q, pr, s_in, out.eigen.block);
  rep.block_residual = max_cross_norm(uh, lambda, {1.0, 1.5, 2.0, 3.0});
  const IndexList outside = select(lambda, [](Complex z) { return std::abs(z) >= 1.0; });
  Matrix diff = uh;
  diff.diagonal() -= out.eigen.diagonal;
  rep.polar_agreement = outside.empty() ? 0.0 : op_norm(columns(diff, outside));
  return out;
}

inline DiscCutInternal cut_disc_u2(const DoubledMatrix& t, double d2, Complex shift, double theta, const Matrix& q,
                                   const ComplexVector& lambda, const CutOptions& opt) {
  DiscCutInternal out;
  DiscCutReport& rep = out.report;
  rep.input_commutator = d2;
  gate_check(rep.input_commutator, opt, "cut_disc_u2", rep.warnings);

  const Complex dir = std::polar(1.0, theta);
  const Complex rot = std::conj(dir);
  for (Index i = 0; i < lambda.size(); ++i)
    if (std::abs(lambda[i]) < 3.0)
      rep.line_condition = std::max(rep.line_condition, std::abs((rot * lambda[i]).imag()));
  if (rep.line_condition > opt.line_tol) {
    if (!opt.force) throw PreconditionError("cut_disc_u2", "spectrum in O_3 is off the line", rep.line_condition);
    rep.warnings.push_back("cut_disc_u2: line condition violated (forced)");
  }

  rep.plus_margin = block_sigma_min(t, shift - kI * dir);
  rep.minus_margin = block_sigma_min(t, shift + kI * dir);
  const double margin = std::min(rep.plus_margin, rep.minus_margin);
  if (margin <= 1e-12 * (1.0 + op_norm(t.matrix()))) {
    if (!opt.force) throw MarginFailure("cut_disc_u2", "diag_P(T +- i e^{i theta}) is singular", margin);
    rep.warnings.push_back("cut_disc_u2: invertibility margin collapsed (forced)");
  }

  // T5 = g(e^{-i theta} T): fixes the line part of sigma in O_2, pushes the rest onto the curve.
  const StarCurve gamma = make_gamma_curve();
  const RayProjection g = ray_projection(gamma);
  ComplexVector mu(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) mu[i] = g(rot * lambda[i]);
  const DoubledMatrix t5((q * mu.asDiagonal()) * q.adjoint());
  const CurveCut cc = staged("cut_disc_u2", [&] { return cut_point_on_curve(t5, q, mu, gamma, 0.0, opt); });
  rep.approximant_distance = cc.distance;
  for (const auto& w : cc.warnings) rep.warnings.push_back(w);

  std::array<Matrix, 2> v0;
  for (int k = 0; k < 2; ++k) v0[static_cast<size_t>(k)] = cc.blocks[static_cast<size_t>(k)].mapped(unit_phase).reconstruct();

  const Rho12 rho;
  const IndexList inside = select(mu, [](Complex z) { return std::norm(z) < 1.0; });
  const Matrix qin = columns(q, inside);
  RealVector r1(static_cast<Index>(inside.size()));
  ComplexVector vr(static_cast<Index>(inside.size()));
  for (size_t k = 0; k < inside.size(); ++k) {
    const Complex z = mu[inside[k]];
    r1[static_cast<Index>(k)] = rho.rho1(std::norm(z));
    vr[static_cast<Index>(k)] = unit_phase(z) * rho.rho2_sq(std::norm(z));
  }
  const Matrix v_in = hermitian_part(qin.adjoint() * block_apply(v0, qin));
  Matrix s_in;
  const PolarRetraction pr =
      staged("cut_disc_u2", [&] { return inside_retraction(v_in, r1, vr, opt.force, s_in); });

  out.eigen.inside = inside;
  out.eigen.block = dir * pr.unitary;
  out.eigen.diagonal.resize(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) out.eigen.diagonal[i] = dir * unit_phase(mu[i]);
  out.unitary = out.eigen.full(q);

  const Matrix uh = finish_disc_report(rep, out.unitary, q, pr, s_in, pr.unitary);
  rep.block_residual = max_cross_norm(uh, lambda, {1.0, 1.5, 2.0});
  const IndexList annulus = select(lambda, [](Complex z) { return std::abs(z) >= 1.0 && std::abs(z) < 2.0; });
  Matrix diff = uh;
  for (Index i = 0; i < lambda.size(); ++i) diff(i, i) -= unit_phase(lambda[i]);
  rep.polar_agreement = annulus.empty() ? 0.0 : op_norm(columns(diff, annulus));

  // Spectrum of U compressed to ran Pi_2.
  const IndexList o2 = select(lambda, [](Complex z) { return std::abs(z) < 2.0; });
  if (!o2.empty()) {
    Eigen::ComplexEigenSolver<Matrix> es(sub(uh, o2, o2), false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex z = es.eigenvalues()[i];
      rep.line_residual = std::max(rep.line_residual, std::min(std::abs(z - dir), std::abs(z + dir)));
    }
  }
  return out;
}

inline HoleCutResult cut_many_holes(const DoubledMatrix& t, const NormalDecomposition& d,
                                    const std::vector<HoleSpec>& holes, const CutOptions& opt) {
  const DiscCutoff chi;
  const Matrix& q = d.eigenvectors;
  const ComplexVector& lambda = d.eigenvalues;
  // Only holes meeting the spectrum matter, the rest are identity operations.
  std::vector<RealVector> weights(holes.size());
  std::vector<size_t> active;
  for (size_t j = 0; j < holes.size(); ++j) {
    RealVector& w = weights[j];
    w.resize(lambda.size());
    for (Index i = 0; i < lambda.size(); ++i) w[i] = chi.squared(std::abs(lambda[i] - holes[j].center));
    if (lambda.size() > 0 && w.maxCoeff() > 0.0) active.push_back(j);
  }
  for (size_t a = 0; a < active.size(); ++a)
    for (size_t b = a + 1; b < active.size(); ++b) {
      const double sep = std::abs(holes[active[a]].center - holes[active[b]].center);
      if (sep < 4.0 - 1e-12) throw PreconditionError("cut_many_holes", "hole centers closer than 4", sep);
    }

  HoleCutResult out;
  SurgeryReport& rep = out.report;
  rep.input_commutator = compute_d2(t);
  const Index dim = t.dim();

  // T' in the eigenbasis of T: sum_j (lambda_j + Ue_j) chi_j^2 + diag(lambda)(1 - sum_j chi_j^2).
  Matrix th = Matrix::Zero(dim, dim);
  ComplexVector diag_part = lambda;
  for (size_t j = 0; j < holes.size(); ++j) {
    const HoleSpec& h = holes[j];
    HoleRecord rec;
    rec.spec = h;
    const RealVector& w = weights[j];
    rec.active = std::find(active.begin(), active.end(), j) != active.end();
    if (rec.active) {
      const std::string label = "hole " + std::to_string(j);
      const ComplexVector shifted = lambda - ComplexVector::Constant(lambda.size(), h.center);
      const DiscCutInternal cut = staged(label, [&] {
        return h.mode == HoleMode::generic ? cut_disc_u1(t, rep.input_commutator, h.center, q, shifted, opt)
                                           : cut_disc_u2(t, rep.input_commutator, h.center, h.theta, q, shifted, opt);
      });
      rec.cut = cut.report;
      rec.commutator_U = cut.report.output_commutator;
      for (const auto& msg : cut.report.warnings) rep.warnings.push_back(label + ": " + msg);
      for (Index i = 0; i < lambda.size(); ++i) diag_part[i] += (h.center - lambda[i]) * w[i];
      th += cut.eigen.dense() * w.cast<Complex>().asDiagonal();
      ++rep.active_holes;
    }
    rep.holes.push_back(rec);
  }
  th.diagonal() += diag_part;

  out.T = DoubledMatrix((q * th) * q.adjoint());
  const Matrix& tm = out.T.matrix();
  rep.output_commutator = compute_d2(out.T);
  rep.amplification = rep.input_commutator > 0.0 ? rep.output_commutator / rep.input_commutator : 0.0;
  rep.distance = op_norm(t.matrix() - tm);
  rep.normality = self_commutator_norm(tm);
  const NormalDecomposition dh = staged("cut_many_holes", [&] { return eig_normal(th); });
  out.decomposition.eigenvalues = dh.eigenvalues;
  out.decomposition.eigenvectors = q * dh.eigenvectors;
  out.decomposition.source_residual = rep.normality;

  // Block structure of the assembled T' measured back in the eigenbasis of T.
  const Matrix thm = q.adjoint() * tm * q;
  IndexList covered;
  rep.min_avoidance = std::numeric_limits<double>::infinity();
  for (auto& rec : rep.holes) {
    if (!rec.active) continue;
    const Complex c = rec.spec.center;
    double nearest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < dh.size(); ++i) {
      const double dist = std::abs(dh.eigenvalues[i] - c);
      nearest = std::min(nearest, dist);
      if (rec.spec.mode == HoleMode::line && dist < 2.0) {
        const Complex rel = std::polar(1.0, -rec.spec.theta) * (dh.eigenvalues[i] - c);
        rec.line_residual = std::max(rec.line_residual, std::abs(rel.imag()));
      }
    }
    rec.avoidance = nearest - 1.0;
    for (double r : {1.0, 2.0}) {
      const IndexList s = select(lambda, [&](Complex z) { return std::abs(z - c) < r; });
      rec.block_residual = std::max(rec.block_residual, cross_norm(thm, s));
      if (r == 2.0) covered.insert(covered.end(), s.begin(), s.end());
    }
    rep.min_avoidance = std::min(rep.min_avoidance, rec.avoidance);
    rep.max_block_residual = std::max(rep.max_block_residual, rec.block_residual);
    rep.max_line_residual = std::max(rep.max_line_residual, rec.line_residual);
  }
  if (rep.active_holes == 0) rep.min_avoidance = 0.0;
  const IndexList rest = complement(covered, dim);
  if (!rest.empty()) {
    Matrix diff = thm;
    diff.diagonal() -= lambda;
    rep.outside_residual = op_norm(columns(diff, rest));
  }
  return out;
}

}  // namespace detail

/// Normal T0, block diagonal against P, with spectrum on the curve but away from z0.
inline CurveCut cut_point_on_curve(const DoubledMatrix& t, const StarCurve& curve, Complex z0,
                                   const CutOptions& opt = {}) {
  const NormalDecomposition d = eig_normal(t.matrix());
  return detail::cut_point_on_curve(t, d.eigenvectors, d.eigenvalues, curve, z0, opt);
}

/// Unitary U commuting with the spectral projections of T for radii >= 1,
/// equal to the polar part of T outside the unit disc, with small [P,U].
inline DiscCut cut_disc_u1(const DoubledMatrix& t, const CutOptions& opt = {}) {
  const NormalDecomposition d = eig_normal(t.matrix());
  auto cut = detail::cut_disc_u1(t, compute_d2(t), 0.0, d.eigenvectors, d.eigenvalues, opt);
  return {std::move(cut.unitary), std::move(cut.report)};
}

/// Line-spectrum variant: spectrum of T in O_3 lies on e^{i theta} R and U
/// restricted to ran Pi_2 has spectrum in {+-e^{i theta}}.
inline DiscCut cut_disc_u2(const DoubledMatrix& t, double theta, const CutOptions& opt = {}) {
  const NormalDecomposition d = eig_normal(t.matrix());
  auto cut = detail::cut_disc_u2(t, compute_d2(t), 0.0, theta, d.eigenvectors, d.eigenvalues, opt);
  return {std::move(cut.unitary), std::move(cut.report)};
}

inline HoleCutResult cut_many_holes(const DoubledMatrix& t, const std::vector<HoleSpec>& holes,
                                    const CutOptions& opt = {}) {
  const NormalDecomposition d = eig_normal(t.matrix());
  return detail::cut_many_holes(t, d, holes, opt);
}

}  // namespace nearnormal
