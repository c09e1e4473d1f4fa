#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "barrier/error.hpp"
#include "barrier/quasimode.hpp"

using namespace barrier;

namespace {

using C = std::complex<double>;

double step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

// One-dimensional factor e^{iλx²/2h}φ(x/h^α)χ(h^β/|x|^{1/2}), built here from scratch.
C factor(double x, double lambda, double h) {
  const double alpha = 5.0 / 12.0, beta = 11.0 / 48.0;
  const double phi = 1.0 - step(std::abs(x) / std::pow(h, alpha) - 1.0);
  double chi = 2.0;
  if (x != 0.0) {
    const double s = std::pow(h, beta) / std::sqrt(std::abs(x));
    chi = s * (1.0 - step(s - 1.0)) + 2.0 * step(s - 1.0);
  }
  return std::exp(C(0.0, lambda * x * x / (2.0 * h))) * phi * chi;
}

struct Norms {
  double u, residual;
};

// ‖u‖ and ‖(−h²/2 ∂² − λ²x²/2)u‖ by sixth-order central differences and the trapezoid rule.
Norms finite_difference_norms(double lambda, double h) {
  const double R = 2.0 * std::pow(h, 5.0 / 12.0) * 1.01;
  const double d = 2e-5, dx = 1e-6;
  double su = 0.0, sr = 0.0;
  for (double x = 0.0; x <= R; x += dx) {
    auto u = [&](double y) { return factor(y, lambda, h); };
    const C d2 = (2.0 * (u(x + 3 * d) + u(x - 3 * d)) - 27.0 * (u(x + 2 * d) + u(x - 2 * d)) +
                  270.0 * (u(x + d) + u(x - d)) - 490.0 * u(x)) /
                 (180.0 * d * d);
    const C r = -0.5 * h * h * d2 - 0.5 * lambda * lambda * x * x * u(x);
    const double w = x == 0.0 ? 0.5 : 1.0;
    su += w * std::norm(u(x));
    sr += w * std::norm(r);
  }
  return {std::sqrt(2.0 * su * dx), std::sqrt(2.0 * sr * dx)};
}

std::vector<double> h_grid() {
  std::vector<double> h;
  for (int k = 0; k <= 8; ++k) h.push_back(std::pow(10.0, -2.0 - 0.25 * k));
  return h;
}

}  // namespace

TEST(Quasimode, CutoffRanges) {
  for (double t = -4.0; t <= 4.0; t += 1e-3) {
    EXPECT_GE(quasimode_phi(t), 0.0);
    EXPECT_LE(quasimode_phi(t), 1.0);
  }
  for (double x = 0.0; x <= 10.0; x += 1e-3) {
    EXPECT_GE(quasimode_chi(x), 0.0);
    EXPECT_LE(quasimode_chi(x), 2.0);
    if (x <= 1.0) {
      EXPECT_EQ(quasimode_chi(x), x);
    }
  }
  EXPECT_EQ(quasimode_phi(0.5), 1.0);
  EXPECT_EQ(quasimode_phi(2.5), 0.0);
  EXPECT_EQ(quasimode_chi(3.0), 2.0);
}

TEST(Quasimode, PointwiseBound) {
  for (double h : {1e-2, 1e-3})
    for (double x = -0.4; x <= 0.4; x += 1e-4) EXPECT_LE(std::abs(factor(x, 1.0, h)), 2.0);
}

TEST(Quasimode, FiniteDifferenceOracle) {
  for (double lambda : {1.0, 1.7})
    for (double h : {1e-2, 3e-3}) {
      const auto fd = finite_difference_norms(lambda, h);
      const auto q = quasimode_norms({lambda}, h);
      EXPECT_NEAR(q.norm_u, fd.u, 1e-6 * fd.u) << "lambda=" << lambda << " h=" << h;
      EXPECT_NEAR(q.norm_residual, fd.residual, 1e-5 * fd.residual) << "lambda=" << lambda << " h=" << h;
    }
}

TEST(Quasimode, ProductStructure) {
  for (double h : {1e-2, 1e-3}) {
    const auto a = quasimode_norms({1.0}, h);
    const auto b = quasimode_norms({1.0, 1.0}, h);
    EXPECT_NEAR(b.norm_u, a.norm_u * a.norm_u, 1e-8 * b.norm_u);
    // (P−E₀)u is a sum of two tensor terms, each of norm ‖(P−E₀)u₁‖‖u₁‖.
    EXPECT_LE(b.norm_residual, 2.0 * a.norm_residual * a.norm_u * (1.0 + 1e-12));
  }
}

TEST(Quasimode, SingleStepDiagnostic) {
  const auto q = quasimode_norms({1.0}, 1e-3);
  EXPECT_GT(q.norm_u / q.norm_residual, 0.0);
  EXPECT_TRUE(std::isfinite(q.norm_u / q.norm_residual));
  EXPECT_THROW(quasimode_norms({1.0}, 0.5), Error);
}

TEST(Quasimode, GridPreconditions) {
  EXPECT_THROW(resolvent_lower_bound_check({1.0}, {1e-2, 1e-3}), Error);
  EXPECT_THROW(resolvent_lower_bound_check({1.0}, {1e-4, 1e-3, 1e-2}), Error);
  EXPECT_THROW(resolvent_lower_bound_check({1.0}, {1e-2, 5e-3, 1e-3}), Error);
}

TEST(Quasimode, NormalizedNormBounded) {
  // ‖u‖/(h^β|ln h|^{1/2}) stays inside [1/2, 2] across two decades of h.
  const auto r = resolvent_lower_bound_check({1.0}, h_grid());
  for (double v : r.normalized) {
    EXPECT_GE(v, 0.5);
    EXPECT_LE(v, 2.0);
  }
  EXPECT_GT(r.log_trend, 0.0);
}

TEST(Quasimode, ResolventSlopeOneDimensional) {
  const auto r = resolvent_lower_bound_check({1.0}, h_grid());
  EXPECT_NEAR(r.slope, 1.0, 0.05);
}

TEST(Quasimode, ResolventSlopeTwoDimensional) {
  const auto r = resolvent_lower_bound_check({1.0, 1.0}, h_grid());
  EXPECT_NEAR(r.slope, 1.0, 0.05);
}
