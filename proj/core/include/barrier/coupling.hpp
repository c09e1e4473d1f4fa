#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "barrier/series.hpp"
#include "barrier/spectrum.hpp"

namespace barrier {

// All vectors below are expressed in the diagonal frame of `frame`.

/// ℳ₂ = −(1/8λ₁) Σ_{j∈I₁(2λ₁)} Σ_{α,β∈I₂(λ₁)} ∂_j∂^βV (g₁⁻)^β/β! · ∂_j∂^αV (g₁⁺)^α/α!
double m2_coefficient(const DiagonalFrame& frame, const Eigen::VectorXd& g1_minus, const Eigen::VectorXd& g1_plus);

/// ℳ₁ with its C_{α,β} kernel, evaluated term by term.
double m1_coefficient(const DiagonalFrame& frame, const Eigen::VectorXd& g1_minus, const Eigen::VectorXd& g1_plus,
                      const Eigen::VectorXd& ghat0_minus, const Eigen::VectorXd& ghat0_plus);

/// C_{α,β} for α, β ∈ I₂(λ₁).
double c_kernel(const DiagonalFrame& frame, const MultiIndex& alpha, const MultiIndex& beta);

/// Coefficients of t·e^{−2λ₁t} and e^{−2λ₁t} in x(t) along a trajectory on Λ₋.
struct GhatCoefficients {
  Eigen::VectorXd g1;               ///< g_{ĵ,1}, supported on I₁(2λ₁)
  Eigen::VectorXd g0;               ///< g_{ĵ,0} off I₁(2λ₁); 0 on I₁(2λ₁)
  std::vector<bool> g0_determined;  ///< false on I₁(2λ₁)
};

/// From the equation of motion at order e^{−2λ₁t}:
///   g_{ĵ,1}^β = Q_β/(4λ₁) on I₁(2λ₁),
///   g_{ĵ,0}^β = −Q_β/((2λ₁−λ_β)(2λ₁+λ_β)) elsewhere,
/// with Q_β = Σ_{|α|=2} ∂^{α+β}V(0)/α! (g₁)^α.
GhatCoefficients ghat_j_coeffs(const DiagonalFrame& frame, const Eigen::VectorXd& g1_minus);

/// Quadratic form φ_{ĵ,2} (coefficients on I₂(λ₁)) from derivatives of V.
TruncatedSeries phi_jhat2(const DiagonalFrame& frame, const Eigen::VectorXd& g1_minus);

/// Same form assembled from the Taylor data of φ₊ and φ₁.
TruncatedSeries phi_jhat2_from_series(const BarrierSpectrum& spec, const TruncatedSeries& phi_plus,
                                      const TruncatedSeries& phi1);

/// c_{1,α}, α ∈ I₂(λ₁), from φ₊, φ₁ and the trajectory coefficients (g₁, g_{ĵ,0}, g_{ĵ,1}).
std::map<MultiIndex, double> c1_from_series(const BarrierSpectrum& spec, const TruncatedSeries& phi_plus,
                                            const TruncatedSeries& phi1, const Eigen::VectorXd& g1,
                                            const Eigen::VectorXd& ghat0, const Eigen::VectorXd& ghat1);

/// c_{1,α}, α ∈ I₂(λ₁), written directly in derivatives of V.
std::map<MultiIndex, double> c1_closed_form(const DiagonalFrame& frame, const Eigen::VectorXd& g1,
                                            const Eigen::VectorXd& ghat0);

struct CouplingData {
  std::vector<double> inner_products;  ///< ⟨g_m⁻|g_m⁺⟩, m = 1 … ĵ−1
  double M2 = 0.0;
  double M1 = 0.0;
  char case_label = '?';  ///< 'a', 'b' or 'c'
  int k_min = 0;          ///< 1-based, case a only
};

/// Case a if some |⟨g_m⁻|g_m⁺⟩| > tol_ip·|g_m⁻||g_m⁺| (first such m is 𝐤), else b if
/// |ℳ₂| > tol_m, else c if |ℳ₁| > tol_m. Throws when all vanish.
CouplingData classify_case(const std::vector<Eigen::VectorXd>& g_minus, const std::vector<Eigen::VectorXd>& g_plus,
                           double M2, double M1, const BarrierSpectrum& spec, double tol_ip = 1e-8,
                           double tol_m = 1e-10);

}  // namespace barrier
