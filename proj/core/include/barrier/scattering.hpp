#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barrier/dynamics.hpp"
#include "barrier/potential.hpp"

namespace barrier {

struct ScatterOptions {
  double launch_radius = 20.0;
  /// Escape is declared at this radius with outward radial momentum; 0 means the launch radius.
  double escape_radius = 0.0;
  /// Longest integration after launch before the run counts as trapped.
  double t_max = 200.0;
  /// Largest |V| tolerated at the launch point.
  double eps_v = 1e-10;
  /// |x| + |ξ| below this counts as convergence to the fixed point.
  double converge_radius = 1e-8;
  Tolerances tol;
  int threads = 1;
};

struct Launch {
  PhasePoint point;
  double t0 = 0.0;
};

/// Phase point at t₀ = −R/√(2E) on the curve with x ≈ √(2E)ωt + z, ξ ≈ √(2E)ω as t → −∞,
/// including the first-order correction from the potential on (−∞, t₀].
Launch incoming_initialize(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z,
                           double E, double R, double eps_v = 1e-10);

enum class Outcome { Escaped, Trapped };

struct ScatterRun {
  Outcome outcome = Outcome::Trapped;
  bool converged = false;  ///< trapped by reaching the fixed point
  double t0 = 0.0;
  double t_end = 0.0;
  PhasePoint end;
  Eigen::VectorXd xi_inf;   ///< escaped runs only
  double action = 0.0;      ///< ∫(|ξ|² − 2E)dt with both far-field tails, escaped runs only
  double closest_time = 0.0;
  PhasePoint closest;       ///< state of least |x|
  Trajectory path;          ///< every accepted step when recorded
};

/// Integrates the incoming curve (ω, z, E) until escape, convergence or t_max.
ScatterRun scatter(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z, double E,
                   const ScatterOptions& opts = {}, bool variational = false, bool record = false);

/// ξ_∞, or nullopt when the run is trapped.
std::optional<Eigen::VectorXd> asymptotic_momentum(const PotentialModel& model, const Eigen::VectorXd& omega,
                                                   const Eigen::VectorXd& z, double E, const ScatterOptions& opts = {});

/// Orthonormal basis of ω^⊥ (n × (n−1)); for n = 2 the first column is ω rotated by +π/2.
Eigen::MatrixXd perp_basis(const Eigen::VectorXd& omega);

/// σ̂(z) = |det(ξ_∞, ∂_{z_1}ξ_∞, …)| with central differences of the given step along perp_basis(ω).
double angular_density(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z, double E,
                       double step, const ScatterOptions& opts = {});

struct ScatteringData {
  Eigen::VectorXd omega;
  Eigen::VectorXd z;
  double E = 0.0;
  Eigen::VectorXd xi_inf;
  double sigma_hat = 0.0;
  double S_inf = 0.0;
  int nu_inf = 0;
  bool degenerate = false;  ///< σ̂ below tolerance
  std::string note;
};

struct SearchBox {
  double half_width = 6.0;
  int points = 121;  ///< per axis of ω^⊥
};

/// Roots z of ξ_∞(z) = √(2E)θ in the box, refined by Newton's method and deduplicated.
std::vector<ScatteringData> find_regular_trajectories(const PotentialModel& model, const Eigen::VectorXd& omega,
                                                      const Eigen::VectorXd& theta, double E, const SearchBox& box = {},
                                                      const ScatterOptions& opts = {});

/// Residual |ξ_∞(z_k)/√(2E) − θ| after each Newton step from z0 (entry 0 is the start).
std::vector<double> regular_newton_history(const PotentialModel& model, const Eigen::VectorXd& omega,
                                           const Eigen::VectorXd& theta, double E, const Eigen::VectorXd& z0,
                                           int steps, const ScatterOptions& opts = {});

/// S^∞ of the escaping curve (ω, z, E).
double action_regular(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z, double E,
                      const ScatterOptions& opts = {});

/// Number of sign changes of det(ξ, ∂x/∂z) along a recorded variational path; `B` holds
/// the initial z-directions as columns. With `free_tail` the straight-line continuation after
/// the last sample is included, which catches caustics beyond the escape radius. Throws on a
/// determinant that vanishes on an interval.
int maslov_index(const Trajectory& traj, const Eigen::MatrixXd& B, bool free_tail = false);

}  // namespace barrier
