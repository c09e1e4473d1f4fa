#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barrier/multi_index.hpp"
#include "barrier/series.hpp"

namespace barrier {

enum class PotentialKind {
  QuadraticLocal,
  Gaussian,
  AnisotropicGaussian,
  GaussianPlusCubic,
  UserTabulated,
  Free,
};

std::string kind_name(PotentialKind k);
/// Throws PreconditionError for an unknown name.
PotentialKind parse_kind(const std::string& name);

/// One monomial c·x^α of the cubic perturbation.
struct CubicTerm {
  MultiIndex alpha;
  double coeff = 0.0;
};

/// Analytic barrier potential.
///
/// The Gaussian family is V(x) = e^{-xᵀQx/2}(E₀ + P(x)) with P a cubic polynomial;
/// `gaussian` and `anisotropic-gaussian` have P = 0. `quadratic-local` is
/// E₀ − ½Σλ_j²x_j², `user-tabulated-derivatives` is the degree-4 Taylor polynomial of
/// the supplied ∂^αV(0), and `free` is V ≡ 0 (diagnostics only).
class PotentialModel {
 public:
  static PotentialModel quadratic_local(double E0, std::vector<double> lambdas);
  static PotentialModel gaussian(double E0, int n);
  static PotentialModel anisotropic_gaussian(double E0, const Eigen::MatrixXd& Q);
  static PotentialModel gaussian_plus_cubic(double E0, const Eigen::MatrixXd& Q,
                                            std::vector<CubicTerm> cubic);
  /// `derivs` maps α (2 ≤ |α| ≤ 4) to ∂^αV(0); missing entries are 0.
  static PotentialModel user_tabulated(double E0, int n, const std::map<MultiIndex, double>& derivs);
  static PotentialModel free(int n);

  /// Same model with V replaced by εV.
  PotentialModel scaled(double eps) const;

  PotentialKind kind() const { return kind_; }
  int dim() const { return n_; }
  double E0() const { return E0_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const std::vector<CubicTerm>& cubic() const { return cubic_; }
  const std::vector<double>& quadratic_rates() const { return rates_; }
  /// Decay exponent ρ in |∂^αV| ≲ ⟨x⟩^{-ρ-|α|} (infinity for Gaussian kinds).
  double decay_exponent() const;
  bool decaying() const;

  double eval(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

  /// Exact Taylor series of V at 0 to degree N in the model's own coordinates.
  TruncatedSeries taylor(int N) const;

  /// All ∂^αV(0) with |α| = order, computed from the exact Taylor series.
  std::map<MultiIndex, double> derivative_tensor(int order) const;

 private:
  PotentialModel() = default;
  bool gaussian_family() const;
  double poly(const Eigen::VectorXd& x) const;
  Eigen::VectorXd poly_grad(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd poly_hess(const Eigen::VectorXd& x) const;

  PotentialKind kind_ = PotentialKind::Free;
  int n_ = 1;
  double E0_ = 0.0;
  double scale_ = 1.0;
  Eigen::MatrixXd Q_;
  std::vector<CubicTerm> cubic_;
  std::vector<double> rates_;
  TruncatedSeries tab_;  // user-tabulated Taylor polynomial (unscaled)
};

/// Decay spot-check: the smallest C with |V| ≤ C⟨x⟩^{-ρ}, |∇V| ≤ C⟨x⟩^{-ρ-1},
/// |∇²V| ≤ C⟨x⟩^{-ρ-2} on radial samples up to radius r_max.
double decay_constant(const PotentialModel& model, double rho, double r_max = 30.0, int samples = 301);

/// ∫_a^b V(p + s·d) ds in closed form (erf), available for `gaussian` and
/// `anisotropic-gaussian` and for V ≡ 0; nullopt otherwise. a, b may be infinite.
std::optional<double> line_integral_closed_form(const PotentialModel& model, const Eigen::VectorXd& p,
                                                const Eigen::VectorXd& d, double a, double b);

/// Same integral by double-exponential quadrature, split at the point of the line
/// closest to the origin. `error` receives the quadrature error estimate.
double line_integral_numeric(const PotentialModel& model, const Eigen::VectorXd& p, const Eigen::VectorXd& d,
                             double a, double b, double* error = nullptr);

}  // namespace barrier
