#pragma once

#include <vector>

namespace barrier {

/// Exponents of the quasimode cutoffs.
struct QuasimodeExponents {
  double alpha = 5.0 / 12.0;
  double beta = 11.0 / 48.0;
};

/// φ(t) = 1 − S(|t| − 1): even, 1 on [−1, 1], 0 outside [−2, 2].
double quasimode_phi(double t);
/// χ(x) = x(1 − S(x − 1)) + 2S(x − 1): x below 1, 2 above 2, non-decreasing.
double quasimode_chi(double x);

struct QuasimodeNorms {
  double h = 0.0;
  double norm_u = 0.0;
  double norm_residual = 0.0;  ///< ‖(P − E₀)u‖ for the exact quadratic barrier
  double norm_cubic = 0.0;     ///< ‖|x|³u‖, the remainder bound, reported but not added
};

/// u(x) = Π_j e^{iλ_j x_j²/2h} φ(x_j/h^α) χ(h^β/|x_j|^{1/2}), P = −(h²/2)Δ − Σλ_j²x_j²/2 + E₀.
/// The n-dimensional norms are assembled exactly from one-dimensional factor integrals.
QuasimodeNorms quasimode_norms(const std::vector<double>& lambdas, double h, const QuasimodeExponents& e = {});

struct QuasimodeReport {
  int n = 0;
  QuasimodeExponents exponents;
  std::vector<double> h;
  std::vector<double> norm_u;
  std::vector<double> norm_residual;
  std::vector<double> norm_cubic;
  std::vector<double> normalized;  ///< ‖u‖/(h^{βn}|ln h|^{n/2})
  std::vector<double> ratio;       ///< ‖u‖/‖(P − E₀)u‖
  double normalized_spread = 0.0;  ///< max/min of `normalized`
  double slope = 0.0;              ///< of log ratio against log(1/h)
  double fit_residual = 0.0;       ///< rms of the slope fit
  double log_trend = 0.0;          ///< slope of log(h·ratio) against log|ln h|
  bool slope_ok = false;           ///< slope ∈ [0.95, 1.05]
};

/// Requires a decreasing h grid spanning at least two decades; throws when the rms residual
/// of the log-log fit exceeds 0.05.
QuasimodeReport resolvent_lower_bound_check(const std::vector<double>& lambdas, const std::vector<double>& h_grid,
                                            const QuasimodeExponents& e = {}, int threads = 1);

}  // namespace barrier
