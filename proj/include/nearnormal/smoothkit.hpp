#pragma once

// Smooth scalar building blocks. Everything is derived from the single C^inf
// step h(x) = f(x) / (f(x) + f(1-x)), f(x) = exp(-1/x), so the partition
// identities below are algebraic consequences of h(x) + h(1-x) = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "nearnormal/errors.hpp"

namespace nearnormal {

class SmoothStep {
 public:
  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // f(x)/(f(x)+f(1-x)) = 1/(1+exp(1/x - 1/(1-x)))
    const double a = 1.0 / x - 1.0 / (1.0 - x);
    return 1.0 / (1.0 + std::exp(a));
  }
};

inline SmoothStep make_step() { return {}; }

/// Even bump rho with rho = 1 on [-a, a], rho = 0 outside (-b, b).
/// rho^2(t) = h((b - |t|) / (b - a)) on the transition, so when
/// a + b == period the squared translates sum to one.
class BumpFamily {
 public:
  BumpFamily(double plateau, double support, double period)
      : plateau_(plateau), support_(support), period_(period) {}

  double plateau() const { return plateau_; }
  double support() const { return support_; }
  double period() const { return period_; }
  bool partition() const { return std::abs(plateau_ + support_ - period_) <= 1e-12 * period_; }

  double squared(double t) const {
    const double at = std::abs(t);
    if (at <= plateau_) return 1.0;
    if (at >= support_) return 0.0;
    return step_((support_ - at) / (support_ - plateau_));
  }
  double operator()(double t) const { return std::sqrt(squared(t)); }

  /// rho_n(x) = rho(x - n * period)
  double translate(long n, double x) const { return (*this)(x - static_cast<double>(n) * period_); }

 private:
  double plateau_;
  double support_;
  double period_;
  SmoothStep step_;
};

/// Partition bump: sum_n rho^2(x - n * period) = 1. Requires 0 <= a < b and
/// a + b = period (adjacent transition zones must coincide).
inline BumpFamily make_partition_bump(double a, double b, double period = 1.0) {
  if (!(a >= 0.0) || !(b > a) || !(period > 0.0))
    throw PreconditionError("make_partition_bump", "need 0 <= a < b and period > 0");
  if (std::abs(a + b - period) > 1e-12 * period)
    throw PreconditionError("make_partition_bump", "transition zones do not tile: a + b != period",
                            a + b - period);
  return BumpFamily(a, b, period);
}

/// rho1 = 1 on [0, 1/2], 0 on [1, inf); rho2 = sqrt(1 - rho1^2).
struct Rho12 {
  SmoothStep h;

  double rho1_sq(double t) const {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    return h(2.0 * (1.0 - t));
  }
  double rho2_sq(double t) const {
    if (t <= 0.5) return 0.0;
    if (t >= 1.0) return 1.0;
    return h(2.0 * t - 1.0);
  }
  double rho1(double t) const { return std::sqrt(rho1_sq(t)); }
  double rho2(double t) const { return std::sqrt(rho2_sq(t)); }
};

inline Rho12 make_rho12() { return {}; }

/// chi(r) = 1 on [0, 1], 0 on [2, inf), chi^2(r) = h(2 - r) in between.
struct DiscCutoff {
  SmoothStep h;

  double squared(double r) const {
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    return h(2.0 - r);
  }
  double operator()(double r) const { return std::sqrt(squared(r)); }
};

inline DiscCutoff make_disc_cutoff() { return {}; }

/// psi(t) = 6k on [6k - 5/2, 6k + 5/2], rising by 6 across the unit gap;
/// g(z) = psi(re z) + i psi(im z) snaps the plane onto the grid 6Z + i6Z
/// away from the cell centres.
struct GridSnap {
  SmoothStep h;

  double psi(double t) const {
    const double m = std::floor((t + 2.5) / 6.0);
    const double s = t - 6.0 * m;
    if (s <= 2.5) return 6.0 * m;
    return 6.0 * m + 6.0 * h(s - 2.5);
  }
  std::complex<double> operator()(std::complex<double> z) const { return {psi(z.real()), psi(z.imag())}; }
};

inline GridSnap make_grid_snap() { return {}; }

/// g1(z) = m(|z|) z / |z| with m(r) = r on [0, 2] and m(r) = 3 on [3, inf).
struct RadialClamp {
  SmoothStep h;

  double modulus(double r) const {
    if (r <= 2.0) return r;
    if (r >= 3.0) return 3.0;
    return r + (3.0 - r) * h(r - 2.0);
  }
  std::complex<double> operator()(std::complex<double> z) const {
    const double r = std::abs(z);
    if (r == 0.0) return 0.0;
    return z * (modulus(r) / r);
  }
};

inline RadialClamp make_radial_clamp() { return {}; }

/// Star-shaped closed curve |z - center| = phi(arg(z - center)).
struct StarCurve {
  std::complex<double> center;
  std::function<double(double)> radius;
  std::vector<std::pair<double, double>> samples;  ///< (theta, phi(theta)) on [0, 2pi]

  std::complex<double> point(double theta) const { return center + std::polar(radius(theta), theta); }

  /// | |z - c| - phi(arg(z - c)) |
  double radial_residual(std::complex<double> z) const {
    const std::complex<double> d = z - center;
    return std::abs(std::abs(d) - radius(std::arg(d)));
  }

  double min_radius() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::min(m, s.second);
    return m;
  }
  double max_radius() const {
    double m = 0.0;
    for (const auto& s : samples) m = std::max(m, s.second);
    return m;
  }
};

/// Geometry of the curve used for line-spectrum cuts: centred at i, it
/// contains the real segment [-3 + margin, 3 - margin] and otherwise follows
/// the circle of radius sqrt(10) through +-3.
struct GammaGeometry {
  static constexpr double kMargin = 0.1;
  static constexpr double kWindow = 0.2;
  static double arc_radius() { return std::sqrt(10.0); }
  /// Direction (seen from i) of the segment end 3 - margin.
  static double segment_angle() { return std::atan2(-1.0, 3.0 - kMargin); }
};

inline StarCurve make_gamma_curve() {
  StarCurve curve;
  curve.center = {0.0, 1.0};
  curve.radius = [h = SmoothStep{}](double theta) {
    // Fold to the right half-plane; phi is symmetric about the imaginary axis.
    const double folded = std::atan2(std::sin(theta), std::abs(std::cos(theta)));
    const double start = GammaGeometry::segment_angle();
    const double arc = GammaGeometry::arc_radius();
    if (folded >= start + GammaGeometry::kWindow) return arc;
    const double to_axis = -1.0 / std::sin(folded);
    if (folded <= start) return to_axis;
    const double w = h((folded - start) / GammaGeometry::kWindow);
    return (1.0 - w) * to_axis + w * arc;
  };
  constexpr int kSamples = 4096;
  curve.samples.reserve(kSamples + 1);
  for (int k = 0; k <= kSamples; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / kSamples;
    curve.samples.emplace_back(theta, curve.radius(theta));
  }
  return curve;
}

/// phi_1(z) = (z - c) / phi(arg(z - c)) maps the curve onto the unit circle.
struct CircleMap {
  StarCurve curve;

  std::complex<double> forward(std::complex<double> z) const {
    const std::complex<double> d = z - curve.center;
    if (d == std::complex<double>(0.0))
      throw PreconditionError("circle_map", "undefined at the curve centre");
    return d / curve.radius(std::arg(d));
  }
  std::complex<double> inverse(std::complex<double> w) const {
    if (w == std::complex<double>(0.0)) return curve.center;
    return curve.center + w * curve.radius(std::arg(w));
  }
};

inline CircleMap circle_map(const StarCurve& curve) { return CircleMap{curve}; }

/// Plane map onto the curve: points are first folded into the closed upper
/// half-plane (x + iy -> x + i(sqrt(y^2 + k^2) - k)) and then projected along
/// rays from the centre. The fold keeps far lower half-plane spectrum from
/// landing on the central segment. Identity near the centre, blended by h.
struct RayProjection {
  static constexpr double kFold = 0.25;
  static constexpr double kInner = 0.5;
  static constexpr double kOuter = 0.75;

  StarCurve curve;
  SmoothStep h;

  static std::complex<double> fold(std::complex<double> z) {
    const double y = z.imag();
    return {z.real(), std::sqrt(y * y + kFold * kFold) - kFold};
  }

  std::complex<double> project(std::complex<double> z) const {
    const std::complex<double> d = z - curve.center;
    const double r = std::abs(d);
    if (r == 0.0) return curve.center;
    return curve.center + d * (curve.radius(std::arg(d)) / r);
  }

  std::complex<double> operator()(std::complex<double> z) const {
    const double r = std::abs(z - curve.center);
    if (r <= kInner) return z;
    const std::complex<double> q = project(fold(z));
    if (r >= kOuter) return q;
    const double w = h((r - kInner) / (kOuter - kInner));
    return (1.0 - w) * z + w * q;
  }
};

inline RayProjection ray_projection(const StarCurve& curve) { return RayProjection{curve, {}}; }

}  // namespace nearnormal
