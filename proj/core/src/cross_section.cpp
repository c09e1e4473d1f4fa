#include "barrier/cross_section.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "barrier/error.hpp"
#include "barrier/io.hpp"
#include "barrier/scattering.hpp"

namespace barrier {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr double kQuadTol = 1e-12;
constexpr unsigned kMaxDepth = 18;
// Above this many half-periods of sin² across the box the quadrature is refused.
constexpr double kMaxOscillations = 2e4;

}  // namespace

double line_integral(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& y,
                     InnerMethod method, InnerMethod* used) {
  if (!model.decaying()) throw PreconditionError("line integral needs a decaying potential");
  const double inf = std::numeric_limits<double>::infinity();
  if (method != InnerMethod::Numeric) {
    if (auto v = line_integral_closed_form(model, y, omega, -inf, inf)) {
      if (used) *used = InnerMethod::Analytic;
      return *v;
    }
    if (method == InnerMethod::Analytic)
      throw PreconditionError("no closed-form line integral for potential kind " + kind_name(model.kind()));
  }
  if (used) *used = InnerMethod::Numeric;
  return line_integral_numeric(model, y, omega, -inf, inf);
}

CrossSectionResult total_cross_section(const PotentialModel& model, const Eigen::VectorXd& omega, double E, double h,
                                       InnerMethod method) {
  const int n = model.dim();
  if (n != 2 && n != 3) throw PreconditionError("total cross-section is implemented for n = 2 and n = 3");
  if (!(E > 0.0) || !(h > 0.0)) throw PreconditionError("cross-section needs E > 0 and h > 0");
  if (std::abs(omega.norm() - 1.0) > 1e-12) throw PreconditionError("direction must be a unit vector");
  if (!model.decaying() || !(model.decay_exponent() > 0.5 * (n + 1)))
    throw PreconditionError("cross-section needs decay faster than |x|^-(n+1)/2");

  CrossSectionResult res;
  res.omega = omega;
  res.E = E;
  res.h = h;
  const Eigen::MatrixXd B = perp_basis(omega);
  const double scale = 0.5 / (std::sqrt(2.0 * E) * h);
  InnerMethod used = method == InnerMethod::Numeric ? InnerMethod::Numeric : InnerMethod::Analytic;
  auto phase = [&](const Eigen::VectorXd& y) {
    InnerMethod u;
    const double v = scale * line_integral(model, omega, y, method, &u);
    if (u == InnerMethod::Numeric) used = InnerMethod::Numeric;
    return v;
  };

  // Box half-width: beyond Y the phase is below 1e-9 along every probed ray.
  const int rays = n == 2 ? 2 : 16;
  auto ray_max = [&](double r) {
    double m = 0.0;
    for (int k = 0; k < rays; ++k) {
      const double a = 2.0 * std::numbers::pi * k / rays;
      Eigen::VectorXd y = n == 2 ? Eigen::VectorXd(r * (k == 0 ? 1.0 : -1.0) * B.col(0))
                                 : Eigen::VectorXd(r * (std::cos(a) * B.col(0) + std::sin(a) * B.col(1)));
      m = std::max(m, std::abs(phase(y)));
    }
    return m;
  };
  double peak = std::abs(phase(Eigen::VectorXd::Zero(n)));
  double Y = 1.0;
  for (;;) {
    const double m = ray_max(Y);
    peak = std::max(peak, m);
    if (m < 1e-9 && Y > 1.0) break;
    Y *= 1.5;
    if (Y > 1e6) throw NumericalError("line integral does not decay inside |y| < 1e6");
  }
  res.box_radius = Y;
  const double oscillations = peak / std::numbers::pi;
  if (oscillations > kMaxOscillations)
    throw NumericalError("oscillation too fast for the requested accuracy at h = " + format_double(h) +
                         "; about " + std::to_string(static_cast<long>(40 * oscillations)) + " subintervals needed");

  double err = 0.0;
  if (n == 2) {
    auto f = [&](double s) {
      const double u = std::sin(phase(s * B.col(0)));
      return 4.0 * u * u;
    };
    res.sigma = GK::integrate(f, -Y, Y, kMaxDepth, kQuadTol, &err);
  } else {
    double inner_err = 0.0;
    auto outer = [&](double s1) {
      auto inner = [&](double s2) {
        const double u = std::sin(phase(s1 * B.col(0) + s2 * B.col(1)));
        return 4.0 * u * u;
      };
      double e = 0.0;
      const double v = GK::integrate(inner, -Y, Y, kMaxDepth, kQuadTol, &e);
      inner_err = std::max(inner_err, e);
      return v;
    };
    res.sigma = GK::integrate(outer, -Y, Y, kMaxDepth, kQuadTol, &err);
    err += 2.0 * Y * inner_err;
  }
  // sin² ≤ u² < 1e-18 outside the box; the tail is bounded by that times the decay length.
  res.error = err + 4.0 * 1e-18 * (n == 2 ? 2.0 * Y : std::numbers::pi * Y * Y);
  res.sigma = std::max(res.sigma, 0.0);
  res.method = used;
  return res;
}

}  // namespace barrier
