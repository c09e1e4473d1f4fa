#include "barrier/amplitude.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "barrier/error.hpp"

namespace barrier {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

cplx maslov_phase(int nu) { return std::exp(-I * (pi / 2.0) * static_cast<double>(nu % 4)); }

}  // namespace

SigmaE sigma_E(const BarrierSpectrum& spec, double z) { return {cplx(0.5 * spec.sum(), -z), z}; }

cplx c_constant(double E, int n) {
  if (!(E > 0.0)) throw PreconditionError("c(E) needs E > 0");
  const double m = n - 1;
  return -2.0 * pi * std::pow(2.0 * E, -m / 4.0) * std::pow(2.0 * pi, m / 2.0) *
         std::exp(-I * ((n - 3) * pi / 4.0));
}

const char* term_kind_name(TermKind k) {
  switch (k) {
    case TermKind::Regular: return "regular";
    case TermKind::SingularA: return "singular-a";
    case TermKind::SingularB: return "singular-b";
    case TermKind::SingularC: return "singular-c";
  }
  return "?";
}

cplx AmplitudeResult::value_at(double h) const {
  if (!(h > 0.0)) throw PreconditionError("h must be positive");
  cplx v = std::exp(I * phase_action / h) * coefficient * std::exp(h_exponent * std::log(h));
  if (log_h_power != cplx(0.0)) {
    const double L = std::abs(std::log(h));
    if (!(L > 0.0)) throw PreconditionError("|ln h| vanishes at h = 1");
    v *= std::exp(log_h_power * std::log(L));
  }
  return v;
}

AmplitudeResult leading_regular_coefficient(double sigma_hat, int nu_inf, double S_inf) {
  if (!(sigma_hat > 0.0)) throw PreconditionError("angular density must be positive for a regular term");
  AmplitudeResult r;
  r.kind = TermKind::Regular;
  r.phase_action = S_inf;
  r.coefficient = maslov_phase(nu_inf) / std::sqrt(sigma_hat);
  return r;
}

AmplitudeResult leading_singular_coefficient(const BarrierSpectrum& spec, const SingularInput& in) {
  const int n = spec.dim();
  if (!(in.D_minus > 0.0) || !(in.D_plus > 0.0) || !std::isfinite(in.D_minus) || !std::isfinite(in.D_plus))
    throw PreconditionError("Maslov determinants must be positive and finite");
  if (in.ll < 1 || in.ll > static_cast<int>(spec.mu_seq.size())) throw PreconditionError("outgoing rate index out of range");
  const cplx S = in.sigma.value;
  const double l1 = spec.lambda1();
  const double lll = spec.mu_seq[in.ll - 1];
  const double prod = std::accumulate(spec.lambdas.begin(), spec.lambdas.end(), 1.0, std::multiplies<>());

  // Factors shared by all three cases.
  const cplx common = c_constant(in.E, n) * std::sqrt(in.E) / std::pow(pi, 1.0 - n / 2.0) *
                      std::exp(I * (n * pi / 4.0 - pi / 2.0)) / std::sqrt(prod) *
                      std::pow(2.0 * l1 * lll, 1.5) * maslov_phase(in.nu_plus) * maslov_phase(in.nu_minus) /
                      std::sqrt(in.D_minus * in.D_plus) * in.g1_minus * in.gll_plus;

  AmplitudeResult r;
  r.phase_action = in.S_minus + in.S_plus;
  switch (in.coupling.case_label) {
    case 'a': {
      const int k = in.coupling.k_min;
      if (k < 1 || k > static_cast<int>(in.coupling.inner_products.size()))
        throw PreconditionError("case a needs the index of the first non-vanishing inner product");
      const double mu = spec.mu_seq[k - 1];
      const double ip = in.coupling.inner_products[k - 1];
      if (ip == 0.0) throw PreconditionError("case a needs a non-zero inner product");
      r.kind = TermKind::SingularA;
      r.coefficient = common / mu * gamma(S / mu) * principal_pow(2.0 * I * mu * ip, -S / mu);
      r.h_exponent = S / mu - 0.5;
      r.log_h_power = 0.0;
      // For a positive inner product the formula is the complex conjugate branch, which for the
      // purely imaginary argument here coincides with the principal power at arg = +π/2.
      r.convention = ip < 0.0 ? "principal" : "conjugate";
      break;
    }
    case 'b': {
      if (in.coupling.M2 == 0.0) throw PreconditionError("case b needs a non-zero M2");
      r.kind = TermKind::SingularB;
      r.coefficient = common * gamma(S / (2.0 * l1)) * principal_pow(2.0 * l1, S / l1 - 1.0) *
                      principal_pow(-I * in.coupling.M2, -S / (2.0 * l1));
      r.h_exponent = S / (2.0 * l1) - 0.5;
      r.log_h_power = -S / l1;
      break;
    }
    case 'c': {
      if (in.coupling.M1 == 0.0) throw PreconditionError("case c needs a non-zero M1");
      r.kind = TermKind::SingularC;
      r.coefficient = common * gamma(S / (2.0 * l1)) * principal_pow(2.0 * l1, S / (2.0 * l1) - 1.0) *
                      principal_pow(-I * in.coupling.M1, -S / (2.0 * l1));
      r.h_exponent = S / (2.0 * l1) - 0.5;
      r.log_h_power = -S / (2.0 * l1);
      break;
    }
    default: throw PreconditionError("unknown coupling case");
  }
  return r;
}

GammaIdentityReport gamma_factor_identity_check(double lambda1, const std::vector<double>& z) {
  if (!(lambda1 > 0.0)) throw PreconditionError("lambda1 must be positive");
  GammaIdentityReport rep;
  for (double zz : z) {
    const double lhs = std::norm(gamma(cplx(0.5, -zz / lambda1)));
    const double rhs = pi / std::cosh(pi * zz / lambda1);
    rep.z.push_back(zz);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    rep.max_rel_error = std::max(rep.max_rel_error, std::abs(lhs - rhs) / rhs);
  }
  return rep;
}

AmplitudeSum assemble_amplitude(const std::vector<AmplitudeResult>& terms, double h) {
  if (terms.empty()) throw PreconditionError("amplitude needs at least one term");
  AmplitudeSum s;
  s.A = 0.0;
  for (const auto& t : terms) {
    s.terms.push_back(t.value_at(h));
    s.A += s.terms.back();
  }
  return s;
}

}  // namespace barrier
