#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "barrier/potential.hpp"

namespace barrier {

struct PhasePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd xi;
};

/// Error-control tolerances of the adaptive integrator.
struct Tolerances {
  double abs = 1e-16;
  double rel = 1e-13;
  /// Steps below min_step·max(1, |t|) count as a step-size collapse.
  double min_step = 1e-13;
  /// Upper bound on |dt|; keeps the controller from stepping across a bump from a region where V underflows.
  double max_step = 0.25;
  long max_steps = 5'000'000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<Eigen::MatrixXd> jacobians;  ///< empty unless variational
  double energy = 0.0;                     ///< p at the first sample

  bool has_jacobians() const { return !jacobians.empty(); }
  std::size_t size() const { return times.size(); }
};

/// p(x, ξ) = ½|ξ|² + V(x)
double hamiltonian(const PotentialModel& model, const PhasePoint& p);

/// Max over entries of |JᵀΩJ − Ω|, divided by max(1, max|J|²).
double symplectic_defect(const Eigen::MatrixXd& J);

/// Adaptive Runge–Kutta–Fehlberg 7(8) integrator of H_p, optionally with the
/// variational flow M′ = dH_p(γ(t)) M and an accumulator of ∫(|ξ|² − c) dt.
class FlowIntegrator {
 public:
  FlowIntegrator(const PotentialModel& model, bool variational, const Tolerances& tol = {});
  ~FlowIntegrator();
  FlowIntegrator(FlowIntegrator&&) noexcept;
  FlowIntegrator& operator=(FlowIntegrator&&) noexcept;

  /// Restarts at (t, p) with M = I and a zero accumulator.
  void reset(double t, const PhasePoint& p);
  void reset(double t, const PhasePoint& p, const Eigen::MatrixXd& M);

  /// Sets c in the accumulated integrand |ξ|² − c.
  void set_action_offset(double c);
  /// Adds a constant to the accumulator.
  void add_to_action(double a);

  double time() const;
  PhasePoint state() const;
  Eigen::MatrixXd jacobian() const;
  double action() const;
  double energy() const;
  bool variational() const;

  /// One accepted adaptive step toward t_limit, never beyond it.
  void step(double t_limit);
  /// Integrates exactly to t.
  void advance_to(double t);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Samples at the given times (or at every accepted step when `sample_times` is empty).
Trajectory flow(const PotentialModel& model, const PhasePoint& start, double t0, double t1,
                const Tolerances& tol = {}, const std::vector<double>& sample_times = {});

/// As `flow`, with the 2n×2n Jacobian of the flow map at each sample.
Trajectory variational_flow(const PotentialModel& model, const PhasePoint& start, double t0, double t1,
                            const Tolerances& tol = {}, const std::vector<double>& sample_times = {});

/// CSV rows: t, x_1..x_n, xi_1..xi_n, energy.
void write_trajectory_csv(std::ostream& os, const PotentialModel& model, const Trajectory& traj);

}  // namespace barrier
