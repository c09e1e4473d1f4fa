#pragma once

#include <functional>
#include <vector>

#include "barrier/special.hpp"

namespace barrier {

/// Smooth step S(x) = e^{−1/x}/(e^{−1/x} + e^{−1/(1−x)}) on [0, 1], 0 below and 1 above.
double smooth_step(double x);

/// χ(t) = 1 − S((t − a)/(b − a)): equal to 1 on [0, a], vanishing beyond b < ½.
struct Cutoff {
  double a = 0.2;
  double b = 0.45;
  double operator()(double t) const;
};

struct OscillatoryValue {
  cplx value;
  double error = 0.0;  ///< estimated absolute error
};

/// ∫₀^∞ e^{iλt} f(t) χ(t) dt/t with f(t) = t^α(−ln t)^β, or `f` when given. `f` must extend
/// analytically to the open first quadrant: the part where χ ≡ 1 is integrated along the
/// imaginary axis, the cutoff band by Gauss–Legendre panels of about one period each.
OscillatoryValue oscillatory_integral(double lambda, cplx alpha, double beta, const Cutoff& chi = {},
                                      const std::function<cplx(cplx)>& f = nullptr, double rel_tol = 1e-6);

/// (−iλ)^{−α} Σ_{j≤β} C(β,j) Γ^{(j)}(α) (−1)^j (ln(−iλ))^{β−j}, β ∈ ℕ.
cplx asymptotic_full(double lambda, cplx alpha, int beta);

/// Γ(α)(ln λ)^β(−iλ)^{−α}.
cplx asymptotic_leading(double lambda, cplx alpha, double beta);

struct AsymptoticCheck {
  cplx alpha;
  double beta = 0.0;
  bool full_expansion = false;  ///< β ∈ ℕ: compared with the complete sum
  std::vector<double> lambdas;
  std::vector<cplx> numeric;
  std::vector<cplx> predicted;
  std::vector<double> rel_errors;
  /// Errors decrease along the grid, counting values below `noise_floor` as settled.
  bool decreasing = false;
  bool monotonicity_claimed = false;  ///< false for a one-point grid
  double noise_floor = 0.0;
};

AsymptoticCheck asymptotic_sweep(cplx alpha, double beta, const std::vector<double>& lambdas, const Cutoff& chi = {},
                                 double noise_floor = 1e-9, int threads = 1);

}  // namespace barrier
