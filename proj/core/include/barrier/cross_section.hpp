#pragma once

#include <string>

#include <Eigen/Dense>

#include "barrier/potential.hpp"

namespace barrier {

enum class InnerMethod { Auto, Analytic, Numeric };

/// ∫_ℝ V(y + sω) ds, in closed form when the model has one (unless `method` forces quadrature).
/// `used` receives the method actually applied.
double line_integral(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& y,
                     InnerMethod method = InnerMethod::Auto, InnerMethod* used = nullptr);

struct CrossSectionResult {
  Eigen::VectorXd omega;
  double E = 0.0;
  double h = 0.0;
  double sigma = 0.0;         ///< main term only; the remainder is an error bound, not a value
  double error = 0.0;         ///< quadrature estimate plus the truncated tail
  double box_radius = 0.0;    ///< half-width of the integration box in ω^⊥
  InnerMethod method = InnerMethod::Analytic;
};

/// σ = 4∫_{ω^⊥} sin²((2E)^{−1/2} h^{−1} ½ ∫V(y+sω)ds) dy for n ∈ {2, 3}.
CrossSectionResult total_cross_section(const PotentialModel& model, const Eigen::VectorXd& omega, double E, double h,
                                       InnerMethod method = InnerMethod::Auto);

}  // namespace barrier
