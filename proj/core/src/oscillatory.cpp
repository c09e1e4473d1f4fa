#include "barrier/oscillatory.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "barrier/error.hpp"
#include "barrier/io.hpp"
#include "barrier/parallel.hpp"

namespace barrier {

namespace {

const cplx I(0.0, 1.0);

// exp_sinh on a complex integrand, one real part at a time.
cplx half_line(const std::function<cplx(double)>& g, double* err) {
  boost::math::quadrature::exp_sinh<double> q;
  double e1 = 0.0, e2 = 0.0;
  const double re = q.integrate([&](double s) { return g(s).real(); }, 1e-14, &e1);
  const double im = q.integrate([&](double s) { return g(s).imag(); }, 1e-14, &e2);
  *err += e1 + e2;
  return {re, im};
}

}  // namespace

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double p = std::exp(-1.0 / x), q = std::exp(-1.0 / (1.0 - x));
  return p / (p + q);
}

double Cutoff::operator()(double t) const { return 1.0 - smooth_step((t - a) / (b - a)); }

OscillatoryValue oscillatory_integral(double lambda, cplx alpha, double beta, const Cutoff& chi,
                                      const std::function<cplx(cplx)>& f, double rel_tol) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  if (!(alpha.real() > 0.0)) throw PreconditionError("Re alpha must be positive");
  if (!(chi.a > 0.0 && chi.a < chi.b && chi.b < 0.5)) throw PreconditionError("cutoff needs 0 < a < b < 1/2");
  // Principal branches; on the imaginary axis ln(is) = ln s + iπ/2 exactly.
  auto amp = [&](cplx t) -> cplx {
    if (f) return f(t) / t;
    return std::exp((alpha - 1.0) * std::log(t)) * (beta == 0.0 ? cplx(1.0) : std::pow(-std::log(t), beta));
  };
  double err = 0.0;
  // ∫₀^a = ∫ along t = is minus ∫ along t = a + is, both damped like e^{−λs}.
  const cplx on_axis = half_line([&](double u) { return std::exp(-u) * amp(cplx(0.0, u / lambda)); }, &err);
  const cplx offset = half_line([&](double u) { return std::exp(-u) * amp(cplx(chi.a, u / lambda)); }, &err);
  cplx v = I / lambda * on_axis - I / lambda * std::exp(I * lambda * chi.a) * offset;
  err /= lambda;

  // Cutoff band [a, b] in panels of exactly one period, so e^{iλt} = e^{iλa}e^{iλx} with x the
  // offset inside the panel; this keeps the phase accurate where λt is large.
  const double period = 2.0 * std::numbers::pi / lambda;
  const long full = static_cast<long>(std::floor((chi.b - chi.a) / period));
  const double rest = (chi.b - chi.a) - full * period;
  cplx band = 0.0;
  double band_abs = 0.0;
  using G = boost::math::quadrature::gauss<double, 30>;
  auto panel = [&](double lo, double width) {
    auto g = [&](double x) { return std::exp(I * lambda * x) * amp(cplx(lo + x, 0.0)) * chi(lo + x); };
    band += cplx(G::integrate([&](double x) { return g(x).real(); }, 0.0, width),
                 G::integrate([&](double x) { return g(x).imag(); }, 0.0, width));
    band_abs += G::integrate([&](double x) { return std::abs(g(x)); }, 0.0, width);
  };
  for (long p = 0; p < full; ++p) panel(chi.a + p * period, period);
  if (rest > 0.0) panel(chi.a + full * period, rest);
  band *= std::exp(I * lambda * chi.a);
  v += band;
  err += 4.0 * std::numeric_limits<double>::epsilon() * band_abs;
  if (!(err <= rel_tol * std::abs(v)))
    throw NumericalError("oscillatory integral reached only an absolute error of " + format_double(err) +
                         " at lambda = " + format_double(lambda));
  return {v, err};
}

cplx asymptotic_full(double lambda, cplx alpha, int beta) {
  if (beta < 0) throw PreconditionError("the full expansion needs a non-negative integer beta");
  const cplx L(std::log(lambda), -std::numbers::pi / 2);
  cplx s = 0.0;
  for (int j = 0; j <= beta; ++j)
    s += boost::math::binomial_coefficient<double>(beta, j) * gamma_derivative(j, alpha) * (j % 2 ? -1.0 : 1.0) *
         std::pow(L, beta - j);
  return std::exp(I * alpha * (std::numbers::pi / 2)) * std::exp(-alpha * std::log(lambda)) * s;
}

cplx asymptotic_leading(double lambda, cplx alpha, double beta) {
  return gamma(alpha) * std::pow(std::log(lambda), beta) * std::exp(I * alpha * (std::numbers::pi / 2)) *
         std::exp(-alpha * std::log(lambda));
}

AsymptoticCheck asymptotic_sweep(cplx alpha, double beta, const std::vector<double>& lambdas, const Cutoff& chi,
                                 double noise_floor, int threads) {
  if (lambdas.empty()) throw PreconditionError("lambda grid is empty");
  for (std::size_t k = 1; k < lambdas.size(); ++k)
    if (!(lambdas[k] > lambdas[k - 1])) throw PreconditionError("lambda grid must be increasing");
  AsymptoticCheck c;
  c.alpha = alpha;
  c.beta = beta;
  c.full_expansion = beta >= 0.0 && beta == std::floor(beta);
  c.lambdas = lambdas;
  c.noise_floor = noise_floor;
  const std::size_t m = lambdas.size();
  c.numeric.resize(m);
  c.predicted.resize(m);
  c.rel_errors.resize(m);
  parallel_for(m, threads, [&](std::size_t k) {
    c.numeric[k] = oscillatory_integral(lambdas[k], alpha, beta, chi).value;
    c.predicted[k] = c.full_expansion ? asymptotic_full(lambdas[k], alpha, static_cast<int>(beta))
                                      : asymptotic_leading(lambdas[k], alpha, beta);
    c.rel_errors[k] = std::abs(c.numeric[k] - c.predicted[k]) / std::abs(c.predicted[k]);
  });
  c.monotonicity_claimed = m > 1;
  c.decreasing = c.monotonicity_claimed;
  for (std::size_t k = 1; k < m; ++k)
    if (!(c.rel_errors[k] < c.rel_errors[k - 1] || c.rel_errors[k] <= noise_floor)) c.decreasing = false;
  return c;
}

}  // namespace barrier
