#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "barrier/dynamics.hpp"
#include "barrier/scattering.hpp"
#include "barrier/spectrum.hpp"

namespace barrier {

enum class Side { Incoming, Outgoing };

/// g_{j,m}, keyed by (j, m) with j 1-based in mu_seq; vectors in the diagonal frame.
using GCoeffs = std::map<std::pair<int, int>, Eigen::VectorXd>;

struct TrappedOptions {
  ScatterOptions scatter;
  SearchBox box{3.0, 61};
  /// Escape time in excess of free transit that marks a run as trapped.
  double t_trap = 15.0;
  /// |x| range of the expansion fit.
  double fit_hi = 1e-2;
  double fit_lo = 1e-8;
  /// Number of rates fitted; 0 selects every μ_j ≤ max(4λ₁, 3λ_n).
  int J = 0;
  double sample_dt = 0.02;
  /// Radius at which the defect from the stable manifold is driven to zero; inside it the
  /// curve is continued by the reduced flow ẋ = −∇φ₊(x).
  double reference_radius = 1e-2;
  int series_degree = 6;
  /// |x| at which the tangent-plane Hessian is read.
  double hessian_radius = 1e-4;
};

/// Incoming impact parameters z* ∈ direction^⊥ whose curves at E₀ converge to the fixed point.
/// For the outgoing side `direction` is θ and the search runs on the time-reversed problem.
std::vector<Eigen::VectorXd> find_trapped_impact(const PotentialModel& model, const Eigen::VectorXd& direction,
                                                 Side side, const TrappedOptions& opts = {});

/// Dense samples of a curve converging to the fixed point.
struct TrappedPath {
  Eigen::VectorXd omega;          ///< incoming direction of the integrated curve
  Eigen::VectorXd z;              ///< polished impact parameter
  double momentum_nudge = 0.0;    ///< launch momentum correction absorbing integrator drift
  double stable_defect = 0.0;     ///< |ξ + ∇φ₊(x)| at the reference radius after polishing
  double t0 = 0.0;
  Trajectory samples;             ///< with Jacobians of the flow from launch
  std::vector<double> action;     ///< ∫(|ξ|² − 2E₀·1_{t<0})dt from −∞ to each sample
  std::size_t departure = 0;      ///< index of the least |x|
};

TrappedPath trace_trapped(const PotentialModel& model, const DiagonalFrame& frame, const Eigen::VectorXd& omega,
                          const Eigen::VectorXd& z, const TrappedOptions& opts = {});

struct ExpandibleFit {
  GCoeffs g;
  std::vector<double> stage_residuals;  ///< rms residual after fitting the first k rates, k = 1 … J
  double condition = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  std::size_t samples = 0;
};

/// Joint least-squares fit of x(t) (diagonal frame) against t^m·e^{−μ_j t}, m ≤ fit_powers(spec, J)[j−1],
/// and the growing e^{λ_i t} left by any departure from the stable manifold.
ExpandibleFit extract_expandible_coeffs(const std::vector<double>& t, const std::vector<Eigen::VectorXd>& y,
                                        const BarrierSpectrum& spec, int J, double lo, double hi);

/// Highest t-power fitted at each of the first J rates: 1 at 2λ₁ and at every rate at or above a
/// resonant one (an eigen-rate that is also a combination of two or more rates), 0 otherwise.
std::vector<int> fit_powers(const BarrierSpectrum& spec, int J);

/// Number of rates with μ_j ≤ max(4λ₁, 3λ_n).
int default_fit_rates(const BarrierSpectrum& spec);

/// min{m : |g_m| > 10⁻⁶·max_j|g_j|}; checks that μ_𝓁𝓁 is one of the λ_j and that no t-term sits at 𝓁𝓁.
int ll_index(const GCoeffs& g, const BarrierSpectrum& spec);

/// Limit of |det ∂x/∂(t,z)|·e^{−(Σλ − 2μ_r)t} inside the fit window, read on the decade of |x|
/// with the smallest relative spread (written to `spread`; the call fails above 1%).
double maslov_determinant(const TrappedPath& path, const BarrierSpectrum& spec, double mu_r, double lo, double hi,
                          double* spread = nullptr);

/// ∂ξ/∂x of the transported tangent plane at the sample nearest |x| = radius, in the diagonal frame.
Eigen::MatrixXd tangent_hessian(const PotentialModel& model, const TrappedPath& path, const DiagonalFrame& frame,
                                double radius);

struct TrappedTrajectory {
  Side side = Side::Incoming;
  Eigen::VectorXd direction;
  Eigen::VectorXd z_star;
  double momentum_nudge = 0.0;
  double stable_defect = 0.0;
  GCoeffs g_coeffs;
  std::vector<double> stage_residuals;
  double fit_condition = 0.0;
  double action = 0.0;
  double D = 0.0;
  double D_spread = 0.0;
  int nu = 0;
  int ll = 1;
  bool g1_nonzero = false;
  Eigen::MatrixXd hessian;           ///< incoming side only
  Eigen::MatrixXd hessian_expected;  ///< incoming side only
};

/// Full trapped-curve record for one z* (as returned by find_trapped_impact).
TrappedTrajectory analyze_trapped(const PotentialModel& model, const DiagonalFrame& frame,
                                  const Eigen::VectorXd& direction, Side side, const Eigen::VectorXd& z_star,
                                  const TrappedOptions& opts = {});

/// S^± of a traced path: the accumulated action plus the fixed-point tail from the leading fitted term.
double trapped_action(const TrappedPath& path, const ExpandibleFit& fit, const BarrierSpectrum& spec);

}  // namespace barrier
