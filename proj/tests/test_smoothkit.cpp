#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "nearnormal/smoothkit.hpp"

using namespace nearnormal;
using C = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference step straight from the definition f(x)/(f(x)+f(1-x)).
double ref_step(double x) {
  auto f = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  return f(x) / (f(x) + f(1.0 - x));
}

// Largest |f(z + d) - f(z)| / |d| over random pairs in a box (both ends in the domain).
template <class F, class D>
double lipschitz_estimate(const F& f, double lo, double hi, int samples, unsigned seed, const D& in_domain) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi), du(-1e-3, 1e-3);
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    const C z(u(rng), u(rng));
    const C d(du(rng), du(rng));
    if (std::abs(d) == 0.0 || !in_domain(z) || !in_domain(z + d)) continue;
    best = std::max(best, std::abs(f(z + d) - f(z)) / std::abs(d));
  }
  return best;
}

}  // namespace

TEST(SmoothStep, Examples) {
  const SmoothStep h = make_step();
  EXPECT_DOUBLE_EQ(h(0.5), 0.5);
  EXPECT_EQ(h(-1.0), 0.0);
  EXPECT_EQ(h(2.0), 1.0);
  EXPECT_NEAR(h(0.25) + h(0.75), 1.0, 1e-14);
}

TEST(SmoothStep, MatchesDefinitionAndIsMonotone) {
  const SmoothStep h = make_step();
  double prev = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double x = k / 10000.0;
    const double v = h(x);
    if (x > 0.0 && x < 1.0) EXPECT_NEAR(v, ref_step(x), 1e-14);
    EXPECT_GE(v, prev);
    EXPECT_NEAR(v + h(1.0 - x), 1.0, 1e-12);
    prev = v;
  }
}

TEST(PartitionBump, Examples) {
  const BumpFamily r = make_partition_bump(0.0, 1.0, 1.0);
  EXPECT_EQ(r(0.0), 1.0);
  EXPECT_EQ(r(1.0), 0.0);
  EXPECT_EQ(r(-1.0), 0.0);
  EXPECT_NEAR(r.squared(0.5) + r.squared(-0.5), 1.0, 1e-14);
  const BumpFamily s = make_partition_bump(1.0 / 3.0, 2.0 / 3.0, 1.0);
  EXPECT_EQ(s(0.3), 1.0);
  EXPECT_EQ(s(0.7), 0.0);
  EXPECT_TRUE(s.partition());
}

TEST(PartitionBump, PartitionIdentityDense) {
  for (const auto& [a, b, p] : {std::tuple{0.0, 1.0, 1.0}, std::tuple{1.0 / 3.0, 2.0 / 3.0, 1.0},
                                std::tuple{0.5, 2.5, 3.0}}) {
    const BumpFamily r = make_partition_bump(a, b, p);
    double worst = 0.0;
    for (int k = 0; k <= 10000; ++k) {
      const double x = -2.0 * p + 4.0 * p * k / 10000.0;
      double sum = 0.0;
      for (long n = -6; n <= 6; ++n) sum += std::pow(r.translate(n, x), 2);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    EXPECT_LT(worst, 1e-10) << "a=" << a << " b=" << b;
  }
}

TEST(PartitionBump, EvenAndNoJumps) {
  const BumpFamily r = make_partition_bump(1.0 / 3.0, 2.0 / 3.0, 1.0);
  const double step = 1e-4;
  double prev = r(-1.0);
  for (double t = -1.0 + step; t <= 1.0; t += step) {
    EXPECT_EQ(r(t), r(-t));
    EXPECT_LT(std::abs(r(t) - prev), 1e3 * step);
    prev = r(t);
  }
}

TEST(PartitionBump, RejectsInvalidRadii) {
  EXPECT_THROW(make_partition_bump(1.0, 0.5, 1.5), PreconditionError);
  EXPECT_THROW(make_partition_bump(-0.1, 1.1, 1.0), PreconditionError);
  EXPECT_THROW(make_partition_bump(0.2, 0.6, 1.0), PreconditionError);
  EXPECT_THROW(make_partition_bump(0.0, 1.0, 0.0), PreconditionError);
}

TEST(Rho12, Examples) {
  const Rho12 r = make_rho12();
  EXPECT_EQ(r.rho1(0.25), 1.0);
  EXPECT_EQ(r.rho2(0.25), 0.0);
  EXPECT_EQ(r.rho1(2.0), 0.0);
  EXPECT_EQ(r.rho2(2.0), 1.0);
  EXPECT_NEAR(r.rho1_sq(0.75) + r.rho2_sq(0.75), 1.0, 1e-14);
}

TEST(Rho12, SquaresSumToOne) {
  const Rho12 r = make_rho12();
  for (int k = 0; k <= 10000; ++k) {
    const double t = 1.5 * k / 10000.0;
    EXPECT_NEAR(r.rho1_sq(t) + r.rho2_sq(t), 1.0, 1e-15);
  }
}

TEST(DiscCutoff, Examples) {
  const DiscCutoff chi = make_disc_cutoff();
  EXPECT_EQ(chi(0.5), 1.0);
  EXPECT_EQ(chi(3.0), 0.0);
  double prev = 1.0;
  for (int k = 0; k <= 1000; ++k) {
    const double r = 3.0 * k / 1000.0;
    EXPECT_LE(chi(r), prev);
    prev = chi(r);
  }
  EXPECT_NEAR(chi.squared(1.5), 0.5, 1e-15);
}

TEST(GridSnap, Examples) {
  const GridSnap g = make_grid_snap();
  EXPECT_EQ(g.psi(0.0), 0.0);
  EXPECT_EQ(g.psi(2.4), 0.0);
  EXPECT_EQ(g.psi(6.1), 6.0);
  EXPECT_NEAR(g.psi(3.0), 3.0, 1e-14);
  const C z = g(C(2.0, 8.0));
  EXPECT_EQ(z, C(0.0, 6.0));
}

TEST(GridSnap, PeriodicDerivativeAndMonotone) {
  const GridSnap g = make_grid_snap();
  const SmoothStep h;
  double prev = g.psi(-20.0);
  for (int k = 1; k <= 10000; ++k) {
    const double t = -20.0 + 40.0 * k / 10000.0;
    EXPECT_NEAR(g.psi(t + 6.0), g.psi(t) + 6.0, 1e-12);
    EXPECT_GE(g.psi(t), prev);
    prev = g.psi(t);
    const double m = std::floor((t + 2.5) / 6.0);
    const double s = t - 6.0 * m;
    if (s > 2.5) EXPECT_NEAR(g.psi(t), 6.0 * m + 6.0 * h(s - 2.5), 1e-12);
  }
}

TEST(RadialClamp, Examples) {
  const RadialClamp g1 = make_radial_clamp();
  EXPECT_EQ(g1(C(1.0, 0.0)), C(1.0, 0.0));
  EXPECT_NEAR(std::abs(g1(C(0.0, 6.0)) - C(0.0, 3.0)), 0.0, 1e-15);
  EXPECT_EQ(g1(C(0.0, 0.0)), C(0.0, 0.0));
  double prev = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double r = 5.0 * k / 1000.0;
    EXPECT_GE(g1.modulus(r), prev);
    prev = g1.modulus(r);
  }
}

TEST(GammaCurve, Examples) {
  const StarCurve gamma = make_gamma_curve();
  EXPECT_EQ(gamma.center, C(0.0, 1.0));
  EXPECT_NEAR(gamma.radius(1.5 * kPi), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(gamma.point(1.5 * kPi)), 0.0, 1e-14);
  EXPECT_NEAR(gamma.radius(0.5 * kPi), std::sqrt(10.0), 1e-14);
  EXPECT_NEAR(std::abs(gamma.point(0.5 * kPi) - C(0.0, 1.0 + std::sqrt(10.0))), 0.0, 1e-14);
  EXPECT_GT(gamma.min_radius(), 0.9);
  EXPECT_LT(gamma.radial_residual(C(2.5, 0.0)), 1e-9);
  EXPECT_NEAR(gamma.radius(0.0), gamma.radius(2.0 * kPi), 1e-14);
}

TEST(GammaCurve, ContainsSegmentAndIsSmoothOnSamples) {
  const StarCurve gamma = make_gamma_curve();
  for (int k = 0; k <= 580; ++k) {
    const double x = -2.9 + 0.01 * k;
    EXPECT_LT(gamma.radial_residual(C(x, 0.0)), 1e-12) << x;
  }
  // Second divided differences on the table stay bounded.
  const auto& s = gamma.samples;
  const double dt = s[1].first - s[0].first;
  double worst = 0.0;
  for (size_t k = 1; k + 1 < s.size(); ++k)
    worst = std::max(worst, std::abs(s[k + 1].second - 2.0 * s[k].second + s[k - 1].second) / (dt * dt));
  EXPECT_LT(worst, 1e3);
  EXPECT_GT(gamma.min_radius(), 0.0);
}

TEST(CircleMap, Examples) {
  const CircleMap phi = circle_map(make_gamma_curve());
  const C w = phi.forward(C(0.0, 0.0));
  EXPECT_NEAR(std::abs(w - C(0.0, -1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(phi.inverse(phi.forward(C(2.5, 0.0))) - C(2.5, 0.0)), 0.0, 1e-9);
  EXPECT_THROW(phi.forward(C(0.0, 1.0)), PreconditionError);
}

TEST(CircleMap, MapsCurveToUnitCircle) {
  const StarCurve gamma = make_gamma_curve();
  const CircleMap phi = circle_map(gamma);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  for (int k = 0; k < 100; ++k) {
    const C z = gamma.point(u(rng));
    EXPECT_NEAR(std::abs(phi.forward(z)), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(phi.inverse(phi.forward(z)) - z), 0.0, 1e-9);
  }
}

TEST(RayProjection, Examples) {
  const StarCurve gamma = make_gamma_curve();
  const RayProjection g = ray_projection(gamma);
  EXPECT_NEAR(std::abs(g(C(2.0, 0.0)) - C(2.0, 0.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(g(C(0.0, 10.0)) - C(0.0, 1.0 + std::sqrt(10.0))), 0.0, 1e-12);
  EXPECT_EQ(g(C(0.0, 1.0)), C(0.0, 1.0));
  for (int k = 0; k <= 40; ++k) {
    const double x = -2.0 + 0.1 * k;
    EXPECT_NEAR(std::abs(g(C(x, 0.0)) - C(x, 0.0)), 0.0, 1e-12) << x;
  }
}

TEST(RayProjection, LandsOnCurveAwayFromCentre) {
  const StarCurve gamma = make_gamma_curve();
  const RayProjection g = ray_projection(gamma);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(-8.0, 8.0), uy(-8.0, 8.0);
  int checked = 0;
  while (checked < 500) {
    const C z(ux(rng), uy(rng));
    if (std::abs(z - gamma.center) < 0.75) continue;
    EXPECT_LT(gamma.radial_residual(g(z)), 1e-8);
    ++checked;
  }
}

TEST(Lipschitz, RadialClampBounded) {
  const RadialClamp clamp = make_radial_clamp();
  EXPECT_LE(lipschitz_estimate(clamp, -5.0, 5.0, 20000, 22, [](C) { return true; }), 4.0);
}

// psi climbs 6 across a unit gap, so its slope is at least 6 somewhere; the
// construction gives exactly 6 max h' = 12 (h'(1/2) = 2).
TEST(Lipschitz, GridSnapAtConstructionBound) {
  const GridSnap snap = make_grid_snap();
  const SmoothStep h;
  double max_dh = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double x = k / 100000.0, dx = 1e-7;
    max_dh = std::max(max_dh, (h(x + dx) - h(x - dx)) / (2.0 * dx));
  }
  EXPECT_NEAR(max_dh, 2.0, 1e-6);
  const double est = lipschitz_estimate(snap, -15.0, 15.0, 20000, 21, [](C) { return true; });
  EXPECT_LE(est, 6.0 * max_dh * (1.0 + 1e-3));
  EXPECT_GE(est, 6.0);
}

// On the spectra it is applied to: the real segment inside |z| < 3 and
// anything with |z| >= 3.
TEST(Lipschitz, RayProjectionOnOperatingDomain) {
  const RayProjection ray = ray_projection(make_gamma_curve());
  auto domain = [](C z) { return std::abs(z) >= 3.0; };
  EXPECT_LE(lipschitz_estimate(ray, -8.0, 8.0, 20000, 23, domain), 4.0);
  double worst = 0.0;
  for (int k = 0; k < 6000; ++k) {
    const double x = -3.0 + k * 1e-3, dx = 1e-4;
    worst = std::max(worst, std::abs(ray(C(x + dx, 0.0)) - ray(C(x, 0.0))) / dx);
  }
  EXPECT_LE(worst, 4.0);
}
