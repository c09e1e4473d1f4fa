#pragma once

#include <string>
#include <vector>

#include "barrier/coupling.hpp"
#include "barrier/special.hpp"
#include "barrier/spectrum.hpp"

namespace barrier {

/// Σ(E, h) = Σλ_j/2 − i z with E = E₀ + z h.
struct SigmaE {
  cplx value;
  double z = 0.0;
};

SigmaE sigma_E(const BarrierSpectrum& spec, double z);

/// c(E) = −2π (2E)^{−(n−1)/4} (2π)^{(n−1)/2} e^{−i(n−3)π/4}.
cplx c_constant(double E, int n);

enum class TermKind { Regular, SingularA, SingularB, SingularC };

const char* term_kind_name(TermKind k);

/// One leading-order term e^{iS/h}·coefficient·h^{h_exponent}·|ln h|^{log_h_power}.
struct AmplitudeResult {
  TermKind kind = TermKind::Regular;
  double phase_action = 0.0;
  cplx coefficient;
  cplx h_exponent;
  cplx log_h_power;
  /// Branch convention used for the power of the coupling datum.
  std::string convention = "principal";

  cplx value_at(double h) const;
};

/// e^{−iν^∞π/2}/√σ̂ with phase S^∞.
AmplitudeResult leading_regular_coefficient(double sigma_hat, int nu_inf, double S_inf);

/// Data of one (incoming, outgoing) pair of trapped curves.
struct SingularInput {
  CouplingData coupling;  ///< case label, 𝐤 and ⟨g_m⁻|g_m⁺⟩, ℳ₂, ℳ₁
  SigmaE sigma;
  double E = 0.0;
  double g1_minus = 0.0;  ///< |g₁⁻|
  double gll_plus = 0.0;  ///< |g_𝓁𝓁⁺|
  int ll = 1;
  double D_minus = 0.0, D_plus = 0.0;
  int nu_minus = 0, nu_plus = 0;
  double S_minus = 0.0, S_plus = 0.0;
};

AmplitudeResult leading_singular_coefficient(const BarrierSpectrum& spec, const SingularInput& in);

struct GammaIdentityReport {
  std::vector<double> z;
  std::vector<double> lhs;  ///< |Γ(½ − i z/λ₁)|²
  std::vector<double> rhs;  ///< π / cosh(π z/λ₁)
  double max_rel_error = 0.0;
};

GammaIdentityReport gamma_factor_identity_check(double lambda1, const std::vector<double>& z);

struct AmplitudeSum {
  cplx A;
  std::vector<cplx> terms;
};

AmplitudeSum assemble_amplitude(const std::vector<AmplitudeResult>& terms, double h);

}  // namespace barrier
