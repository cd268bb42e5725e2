#pragma once

// Approximation of a normal doubled matrix with small [P,T] by a normal one
// with spectrum in Z + iZ. The spectrum is scaled by 6, holes are cut at the
// centres of the 6x6 grid cells, the grid snap pushes what is left onto the
// grid lines, holes are cut at the edge midpoints and a final snap lands
// every eigenvalue on a grid vertex.

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nearnormal/holecutter.hpp"
#include "nearnormal/linalg.hpp"
#include "nearnormal/smoothkit.hpp"

namespace nearnormal {

struct LatticeOptions {
  double gate = 4.0;  ///< applied to 6 ||[P,T]||
  bool force = false;
  double line_tol = 1e-6;
};

struct LatticeRunTrace {
  Complex omega_corner;  ///< lower-left vertex of the square, in 6Z + i6Z (scaled units)
  double omega_side = 0.0;
  std::vector<Complex> round1_centers;
  std::vector<HoleSpec> round2_holes;

  double comm_T = 0.0;    ///< ||[P,T]||
  double comm_T1 = 0.0;   ///< ||[P,6T]||
  double comm_T1c = 0.0;  ///< after round 1
  double comm_T2 = 0.0;   ///< after the first snap
  double comm_T2c = 0.0;  ///< after round 2
  double comm_T0 = 0.0;   ///< ||[P,T0]||

  double move_round1 = 0.0;  ///< ||T1 - T1'|| (scaled units)
  double move_snap1 = 0.0;   ///< ||T1' - g(T1')||
  double move_round2 = 0.0;  ///< ||T2 - T2'||
  double move_snap2 = 0.0;   ///< ||T2' - g(T2')||

  double distance = 0.0;           ///< ||T - T0||
  double constant = 0.0;           ///< ||[P,T0]|| / ||[P,T]|| (0 when [P,T] = 0)
  double lattice_residual = 0.0;   ///< max distance of sigma(T0) to Z + iZ
  double normality = 0.0;          ///< ||[T0,T0*]||
  double center_margin = 0.0;      ///< min sigma_min diag_P(T2 - z_j) over active holes (0 when none)
  double line_condition = 0.0;     ///< worst round-2 line residual of sigma(T2)
  SurgeryReport round1;
  SurgeryReport round2;
  double wall_ms = 0.0;
  std::vector<std::string> warnings;
};

struct LatticeResult {
  DoubledMatrix T0;
  NormalDecomposition decomposition;  ///< of T0, eigenvalues exactly on Z + iZ
  LatticeRunTrace trace;
};

namespace detail {

inline double lattice_distance(Complex z, double spacing = 1.0) {
  const double x = z.real() / spacing, y = z.imag() / spacing;
  return spacing * std::hypot(x - std::round(x), y - std::round(y));
}

inline LatticeResult lattice_approximate(const DoubledMatrix& t, const NormalDecomposition& d,
                                         const LatticeOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  LatticeResult out;
  LatticeRunTrace& tr = out.trace;
  tr.comm_T = compute_d2(t);
  if (6.0 * tr.comm_T >= opt.gate) {
    if (!opt.force) throw GateViolation("lattice_approximate", "6 ||[P,T]|| exceeds the gate", 6.0 * tr.comm_T);
    tr.warnings.push_back("lattice_approximate: 6||[P,T]|| = " + std::to_string(6.0 * tr.comm_T) +
                          " exceeds gate (forced)");
  }
  // The surgery gates see the 6x scaled matrix directly.
  const CutOptions cut{opt.gate, opt.force, opt.line_tol, 1e-6};

  const DoubledMatrix t1(6.0 * t.matrix());
  const NormalDecomposition d1 = d.mapped([](Complex z) { return 6.0 * z; });
  tr.comm_T1 = 6.0 * tr.comm_T;

  // Bounding square with vertices in 6Z + i6Z around sigma(T1) inflated by 3.
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  for (Index i = 0; i < d1.size(); ++i) {
    const Complex z = d1.eigenvalues[i];
    if (i == 0) {
      xmin = xmax = z.real();
      ymin = ymax = z.imag();
    }
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  }
  const double x0 = 6.0 * std::floor((xmin - 3.0) / 6.0), x1 = 6.0 * std::ceil((xmax + 3.0) / 6.0);
  const double y0 = 6.0 * std::floor((ymin - 3.0) / 6.0), y1 = 6.0 * std::ceil((ymax + 3.0) / 6.0);
  tr.omega_side = std::max(x1 - x0, y1 - y0);
  tr.omega_corner = {x0, y0};
  const long cells = std::lround(tr.omega_side / 6.0);

  // Round 1: generic holes at the cell centres.
  std::vector<HoleSpec> holes1;
  for (long a = 0; a < cells; ++a)
    for (long b = 0; b < cells; ++b) {
      const Complex c{x0 + 6.0 * a + 3.0, y0 + 6.0 * b + 3.0};
      tr.round1_centers.push_back(c);
      holes1.push_back({c, HoleMode::generic, 0.0});
    }
  const HoleCutResult r1 = staged("lattice round 1", [&] { return detail::cut_many_holes(t1, d1, holes1, cut); });
  tr.round1 = r1.report;
  tr.comm_T1c = r1.report.output_commutator;
  tr.move_round1 = r1.report.distance;

  // First snap onto the grid lines; same eigenvectors.
  const GridSnap g;
  const NormalDecomposition d2 = r1.decomposition.mapped([&](Complex z) { return g(z); });
  const DoubledMatrix t2(d2.reconstruct());
  tr.comm_T2 = compute_d2(t2);
  tr.move_snap1 = op_norm(r1.T.matrix() - t2.matrix());
  double margin = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < holes1.size(); ++j)
    if (r1.report.holes[j].active) margin = std::min(margin, block_sigma_min(t2, holes1[j].center));
  tr.center_margin = std::isfinite(margin) ? margin : 0.0;

  // Round 2: line holes at the edge midpoints. Vertical edges run along i.
  std::vector<HoleSpec> holes2;
  for (long a = 0; a <= cells; ++a)
    for (long b = 0; b < cells; ++b) {
      holes2.push_back({{x0 + 6.0 * a, y0 + 6.0 * b + 3.0}, HoleMode::line, std::numbers::pi / 2.0});
      holes2.push_back({{x0 + 6.0 * b + 3.0, y0 + 6.0 * a}, HoleMode::line, 0.0});
    }
  for (const auto& h : holes2) {
    tr.round2_holes.push_back(h);
    const Complex rot = std::polar(1.0, -h.theta);
    for (Index i = 0; i < d2.size(); ++i) {
      const Complex rel = d2.eigenvalues[i] - h.center;
      if (std::abs(rel) < 3.0) tr.line_condition = std::max(tr.line_condition, std::abs((rot * rel).imag()));
    }
  }
  const HoleCutResult r2 = staged("lattice round 2", [&] { return detail::cut_many_holes(t2, d2, holes2, cut); });
  tr.round2 = r2.report;
  tr.comm_T2c = r2.report.output_commutator;
  tr.move_round2 = r2.report.distance;

  // Final snap lands on 6Z + i6Z; scale back.
  NormalDecomposition d0 = r2.decomposition.mapped([&](Complex z) { return g(z) / 6.0; });
  d0.source_residual = 0.0;
  out.T0 = DoubledMatrix(d0.reconstruct());
  tr.move_snap2 = 6.0 * op_norm(r2.T.matrix() / 6.0 - out.T0.matrix());
  for (Index i = 0; i < d0.size(); ++i)
    tr.lattice_residual = std::max(tr.lattice_residual, lattice_distance(d0.eigenvalues[i]));
  tr.comm_T0 = compute_d2(out.T0);
  tr.constant = tr.comm_T > 0.0 ? tr.comm_T0 / tr.comm_T : 0.0;
  tr.distance = op_norm(t.matrix() - out.T0.matrix());
  tr.normality = self_commutator_norm(out.T0.matrix());
  for (const auto& w : r1.report.warnings) tr.warnings.push_back("round 1: " + w);
  for (const auto& w : r2.report.warnings) tr.warnings.push_back("round 2: " + w);
  out.decomposition = std::move(d0);
  tr.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace detail

inline LatticeResult lattice_approximate(const DoubledMatrix& t, const LatticeOptions& opt = {}) {
  const NormalDecomposition d = eig_normal(t.matrix());
  return detail::lattice_approximate(t, d, opt);
}

}  // namespace nearnormal
