#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barrier/potential.hpp"
#include "barrier/series.hpp"
#include "barrier/spectrum.hpp"

namespace barrier {

/// L f = ∇φ₊·∇f, truncated at deg(f).
TruncatedSeries apply_L(const TruncatedSeries& phi_plus, const TruncatedSeries& f);

/// Outcome of the solvability test for (L − μ)E = g.
struct ImageReport {
  bool satisfied = true;
  /// "linear obstruction" or "Im Psi membership" when violated, empty otherwise.
  std::string condition;
  /// Offending coefficient (linear obstruction only).
  MultiIndex where;
  /// Size of the unmatched residual.
  double residual = 0.0;
};

struct FreeChoice {
  MultiIndex alpha;
  std::complex<double> value;
};

struct TransportSolution {
  std::optional<TruncatedSeries> particular;
  std::vector<TruncatedSeries> kernel_basis;
  ImageReport image_report;
  std::vector<FreeChoice> free_choices;
};

/// Ψ_{α,β} = ∂^{α+β}φ₊(0)/α!, α ∈ I₂(λ₁) (rows), β ∈ I₁(2λ₁) (columns).
struct PsiMap {
  Eigen::MatrixXd matrix;
  std::vector<MultiIndex> rows;
  std::vector<MultiIndex> cols;
  int nullity = 0;  ///< dim Ker Ψ
};

PsiMap psi_map(const TruncatedSeries& phi_plus, const BarrierSpectrum& spec);

/// Solves (L − μ)E = g degree by degree for 0 < μ ≤ 2λ₁.
///
/// Resonant coefficients (λ·α = μ at |α| = 1, and α ∈ I₂(λ₁) when μ = 2λ₁) are free;
/// they take the value in `free_values` or 0. At μ = 2λ₁ the free linear coefficients on
/// I₁(2λ₁) additionally absorb the minimum-norm correction that makes the quadratic
/// compatibility condition hold. The result is exact through degree
/// min(N, deg φ₊ − 1).
TransportSolution solve_transport(const TruncatedSeries& phi_plus, const BarrierSpectrum& spec, double mu,
                                  const TruncatedSeries& g, int N,
                                  const std::map<MultiIndex, std::complex<double>>& free_values = {});

/// φ₊ with ½|∇φ₊|² + V − E₀ = 0 and quadratic part Σλ_j x_j²/2, in the diagonal frame.
/// `V` is the diagonal-frame Taylor series of V − E₀. Throws when its quadratic part
/// does not match the rates.
TruncatedSeries eikonal_taylor(const BarrierSpectrum& spec, const TruncatedSeries& V, int N);
TruncatedSeries eikonal_taylor(const DiagonalFrame& frame, int N);

/// φ₁ with (L − λ₁)φ₁ = 0 and linear part −2λ₁ g₁·x (g₁ in the λ₁-eigenspace).
TruncatedSeries phi1_taylor(const TruncatedSeries& phi_plus, const BarrierSpectrum& spec,
                            const Eigen::VectorXd& g1, int N);

/// Matrix of E ↦ (L − μ)E on the coefficients of degree ≤ N.
Eigen::MatrixXd transport_matrix(const TruncatedSeries& phi_plus, double mu, int N);

/// Dimensions read off the truncated operator by singular value decomposition.
struct TransportStructure {
  int dim_kernel = 0;
  int dim_kernel_cap_image = 0;   ///< dim(Ker T ∩ Im T)
  int dim_kernel_cap_image2 = 0;  ///< dim(Ker T ∩ Im T²)
};

TransportStructure analyze_transport(const TruncatedSeries& phi_plus, double mu, int N);

/// Closed forms for ∂^αφ₊(0), |α| ∈ {3, 4}, from the potential's derivatives.
double phi_plus_closed_form(const DiagonalFrame& frame, const MultiIndex& alpha);

/// Closed forms for ∂^αφ₁(0), |α| ∈ {2, 3}.
double phi1_closed_form(const DiagonalFrame& frame, const Eigen::VectorXd& g1, const MultiIndex& alpha);

}  // namespace barrier
