#include "barrier/special.hpp"

#include <cmath>
#include <vector>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_psi.h>

#include "barrier/error.hpp"

namespace barrier {

namespace {

struct GslQuiet {
  gsl_error_handler_t* prev;
  GslQuiet() : prev(gsl_set_error_handler_off()) {}
  ~GslQuiet() { gsl_set_error_handler(prev); }
};

bool at_pole(cplx z) { return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()); }

}  // namespace

cplx lgamma(cplx z) {
  if (at_pole(z)) throw PreconditionError("gamma function pole at a non-positive integer");
  GslQuiet q;
  gsl_sf_result lnr, arg;
  if (gsl_sf_lngamma_complex_e(z.real(), z.imag(), &lnr, &arg) != GSL_SUCCESS)
    throw NumericalError("complex log-gamma evaluation failed");
  return {lnr.val, arg.val};
}

cplx gamma(cplx z) { return std::exp(lgamma(z)); }

cplx polygamma(int m, cplx z) {
  if (m < 0) throw PreconditionError("polygamma order must be non-negative");
  if (at_pole(z)) throw PreconditionError("polygamma pole at a non-positive integer");
  if (m == 0) {
    GslQuiet q;
    gsl_sf_result re, im;
    if (gsl_sf_complex_psi_e(z.real(), z.imag(), &re, &im) != GSL_SUCCESS)
      throw NumericalError("complex digamma evaluation failed");
    return {re.val, im.val};
  }
  // Recurrence to |w| ≥ 20, then the Bernoulli asymptotic series.
  const double sign = (m % 2 == 1) ? 1.0 : -1.0;
  const double mf = boost::math::factorial<double>(m);
  cplx w(z.real(), z.imag());
  cplx acc(0.0, 0.0);
  while (std::abs(w) < 20.0 || w.real() < 10.0) {
    acc += 1.0 / std::pow(w, m + 1);
    w += 1.0;
  }
  cplx tail = boost::math::factorial<double>(m - 1) / std::pow(w, m) + 0.5 * mf / std::pow(w, m + 1);
  for (int k = 1; k <= 12; ++k) {
    const double c = boost::math::bernoulli_b2n<double>(k) * boost::math::factorial<double>(2 * k + m - 1) /
                     boost::math::factorial<double>(2 * k);
    tail += c / std::pow(w, 2 * k + m);
  }
  return sign * (mf * acc + tail);
}

cplx gamma_derivative(int k, cplx z) {
  if (k < 0) throw PreconditionError("derivative order must be non-negative");
  std::vector<cplx> d{gamma(z)};
  std::vector<cplx> psi;
  for (int j = 0; j < k; ++j) psi.push_back(polygamma(j, z));
  for (int j = 0; j < k; ++j) {
    cplx s = 0.0;
    for (int i = 0; i <= j; ++i) s += boost::math::binomial_coefficient<double>(j, i) * d[j - i] * psi[i];
    d.push_back(s);
  }
  return d[k];
}

cplx principal_pow(cplx z, cplx a) {
  if (z == cplx(0.0) || (z.imag() == 0.0 && z.real() < 0.0))
    throw PreconditionError("power argument lies on the branch cut ]-inf,0]");
  return std::exp(a * std::log(z));
}

}  // namespace barrier
