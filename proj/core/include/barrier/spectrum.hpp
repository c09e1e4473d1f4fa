#pragma once

#include <vector>

#include <Eigen/Dense>

#include "barrier/multi_index.hpp"
#include "barrier/potential.hpp"
#include "barrier/series.hpp"

namespace barrier {

/// Relative tolerance on the λ values used by every rate-equality test.
inline constexpr double kRateTolerance = 1e-12;

/// Eigen-rates of the barrier top and the exponent sequences built from them.
struct BarrierSpectrum {
  std::vector<double> lambdas;   ///< λ_1 ≤ … ≤ λ_n
  double E0 = 0.0;
  std::vector<double> mu_seq;    ///< μ_1 < μ_2 < …, ℕ-combinations of the λ_j
  int jhat = 0;                  ///< 1-based: mu_seq[jhat-1] = 2λ_1
  std::vector<double> muhat_seq; ///< μ̂_0 = 0 < μ̂_1 < …, ℕ-combinations of λ_k and λ_k − λ_1

  int dim() const { return static_cast<int>(lambdas.size()); }
  double lambda1() const { return lambdas.front(); }
  double sum() const;
  /// Rate equality with tolerance kRateTolerance·λ_n.
  bool equal(double a, double b) const;
  /// I_m(μ) for m ∈ {1, 2}, in graded reverse-lex order.
  std::vector<MultiIndex> index_set(int m, double mu) const;
  int count(int m, double mu) const { return static_cast<int>(index_set(m, mu).size()); }
  /// 1-based position of μ in mu_seq, or 0 if absent.
  int mu_position(double mu) const;
};

/// Builds the spectrum from sorted positive rates; M entries of mu_seq (at least up to 2λ₁).
BarrierSpectrum spectrum_from_rates(std::vector<double> lambdas, double E0, int M = 12);

/// λ_j = sqrt(eig(−∇²V(0))). Throws naming the offending eigenvalue if the Hessian is
/// not negative definite.
BarrierSpectrum barrier_spectrum(const PotentialModel& model, int M = 12);

/// The model seen in the diagonal frame x = R y, where ∇²V(0) = −R diag(λ²) Rᵀ.
struct DiagonalFrame {
  BarrierSpectrum spec;
  Eigen::MatrixXd R;       ///< columns: eigenvectors, ordered as spec.lambdas
  TruncatedSeries V;       ///< Taylor series of V(R y) − E₀ to the frame degree

  int dim() const { return spec.dim(); }
  /// ∂^αV(0) in the diagonal frame (0 beyond the stored degree).
  double d(const MultiIndex& a) const;
  Eigen::VectorXd to_diagonal(const Eigen::VectorXd& x) const { return R.transpose() * x; }
  Eigen::VectorXd from_diagonal(const Eigen::VectorXd& y) const { return R * y; }
};

DiagonalFrame diagonal_frame(const PotentialModel& model, int N = 6, int M = 12);

}  // namespace barrier
