#include "barrier/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/numeric/odeint.hpp>

#include "barrier/error.hpp"
#include "barrier/io.hpp"

namespace barrier {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;
using Stepper = odeint::runge_kutta_fehlberg78<State>;
using Checker = odeint::default_error_checker<double, odeint::range_algebra, odeint::default_operations>;
using Controlled = odeint::controlled_runge_kutta<Stepper, Checker>;

// State layout: x (n), ξ (n), accumulator (1), M column-major (4n², variational only).
struct System {
  const PotentialModel* model;
  int n;
  bool variational;
  double offset;

  void operator()(const State& s, State& ds, double /*t*/) const {
    Eigen::Map<const Eigen::VectorXd> x(s.data(), n), xi(s.data() + n, n);
    const Eigen::VectorXd g = model->gradient(x);
    for (int i = 0; i < n; ++i) {
      ds[i] = xi[i];
      ds[n + i] = -g[i];
    }
    ds[2 * n] = xi.squaredNorm() - offset;
    if (!variational) return;
    const int m = 2 * n;
    const Eigen::MatrixXd H = model->hessian(x);
    Eigen::Map<const Eigen::MatrixXd> M(s.data() + m + 1, m, m);
    Eigen::Map<Eigen::MatrixXd> dM(ds.data() + m + 1, m, m);
    dM.topRows(n) = M.bottomRows(n);
    dM.bottomRows(n).noalias() = -H * M.topRows(n);
  }
};

}  // namespace

double hamiltonian(const PotentialModel& model, const PhasePoint& p) {
  return 0.5 * p.xi.squaredNorm() + model.eval(p.x);
}

double symplectic_defect(const Eigen::MatrixXd& J) {
  const int m = static_cast<int>(J.rows());
  const int n = m / 2;
  Eigen::MatrixXd Om = Eigen::MatrixXd::Zero(m, m);
  Om.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  Om.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  const double d = (J.transpose() * Om * J - Om).cwiseAbs().maxCoeff();
  const double s = J.cwiseAbs().maxCoeff();
  return d / std::max(1.0, s * s);
}

struct FlowIntegrator::Impl {
  const PotentialModel* model;
  System sys;
  Tolerances tol;
  Controlled ctrl;
  State s;
  double t = 0.0;
  double dt = 0.0;  // last proposed step magnitude, 0 before the first step
  long steps = 0;

  Impl(const PotentialModel& m, bool variational, const Tolerances& tl)
      : model(&m),
        sys{&m, m.dim(), variational, 0.0},
        tol(tl),
        ctrl(Checker(tl.abs, tl.rel, 1.0, 0.0)) {}
};

FlowIntegrator::FlowIntegrator(const PotentialModel& model, bool variational, const Tolerances& tol)
    : impl_(std::make_unique<Impl>(model, variational, tol)) {
  if (!(tol.abs > 0.0) || !(tol.rel > 0.0) || !(tol.max_step > 0.0)) throw PreconditionError("integrator tolerances must be positive");
}

FlowIntegrator::~FlowIntegrator() = default;
FlowIntegrator::FlowIntegrator(FlowIntegrator&&) noexcept = default;
FlowIntegrator& FlowIntegrator::operator=(FlowIntegrator&&) noexcept = default;

void FlowIntegrator::reset(double t, const PhasePoint& p) {
  const int m = 2 * impl_->sys.n;
  reset(t, p, Eigen::MatrixXd::Identity(m, m));
}

void FlowIntegrator::reset(double t, const PhasePoint& p, const Eigen::MatrixXd& M) {
  const int n = impl_->sys.n;
  if (p.x.size() != n || p.xi.size() != n) throw PreconditionError("phase point has the wrong dimension");
  if (!p.x.allFinite() || !p.xi.allFinite()) throw PreconditionError("phase point has non-finite components");
  const int m = 2 * n;
  auto& s = impl_->s;
  s.assign(m + 1 + (impl_->sys.variational ? m * m : 0), 0.0);
  for (int i = 0; i < n; ++i) {
    s[i] = p.x[i];
    s[n + i] = p.xi[i];
  }
  if (impl_->sys.variational) {
    if (M.rows() != m || M.cols() != m) throw PreconditionError("initial Jacobian has the wrong shape");
    Eigen::Map<Eigen::MatrixXd>(s.data() + m + 1, m, m) = M;
  }
  impl_->t = t;
  impl_->dt = 0.0;
  impl_->steps = 0;
  impl_->ctrl = Controlled(Checker(impl_->tol.abs, impl_->tol.rel, 1.0, 0.0));
}

void FlowIntegrator::set_action_offset(double c) { impl_->sys.offset = c; }
void FlowIntegrator::add_to_action(double a) { impl_->s[2 * impl_->sys.n] += a; }

double FlowIntegrator::time() const { return impl_->t; }

PhasePoint FlowIntegrator::state() const {
  const int n = impl_->sys.n;
  const auto& s = impl_->s;
  return {Eigen::Map<const Eigen::VectorXd>(s.data(), n), Eigen::Map<const Eigen::VectorXd>(s.data() + n, n)};
}

Eigen::MatrixXd FlowIntegrator::jacobian() const {
  if (!impl_->sys.variational) throw PreconditionError("jacobian requested from a non-variational integrator");
  const int m = 2 * impl_->sys.n;
  return Eigen::Map<const Eigen::MatrixXd>(impl_->s.data() + m + 1, m, m);
}

double FlowIntegrator::action() const { return impl_->s[2 * impl_->sys.n]; }
double FlowIntegrator::energy() const { return hamiltonian(*impl_->model, state()); }
bool FlowIntegrator::variational() const { return impl_->sys.variational; }

void FlowIntegrator::step(double t_limit) {
  auto& I = *impl_;
  const double span = t_limit - I.t;
  if (span == 0.0) return;
  const double dir = span > 0 ? 1.0 : -1.0;
  if (I.dt == 0.0) I.dt = std::min(std::abs(span), 0.01);
  for (;;) {
    if (++I.steps > I.tol.max_steps)
      throw NumericalError("integrator exceeded the step budget; last good time " + format_double(I.t));
    I.dt = std::min(I.dt, I.tol.max_step);
    const double remaining = std::abs(t_limit - I.t);
    const bool clamped = I.dt >= remaining;
    double h = dir * std::min(I.dt, remaining);
    double t = I.t;
    const auto r = I.ctrl.try_step(I.sys, I.s, t, h);
    if (r == odeint::success) {
      I.t = clamped ? t_limit : t;
      if (!clamped || std::abs(h) > I.dt) I.dt = std::abs(h);
      return;
    }
    I.dt = std::abs(h);
    if (I.dt < I.tol.min_step * std::max(1.0, std::abs(I.t)))
      throw NumericalError("step-size collapse; last good time " + format_double(I.t));
  }
}

void FlowIntegrator::advance_to(double t) {
  while (impl_->t != t) step(t);
}

namespace {

Trajectory run_flow(const PotentialModel& model, const PhasePoint& start, double t0, double t1, const Tolerances& tol,
                    const std::vector<double>& samples, bool variational) {
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw PreconditionError("time span must be finite");
  FlowIntegrator integ(model, variational, tol);
  integ.reset(t0, start);
  Trajectory tr;
  tr.energy = hamiltonian(model, start);
  auto record = [&] {
    tr.times.push_back(integ.time());
    tr.states.push_back(integ.state());
    if (variational) tr.jacobians.push_back(integ.jacobian());
  };
  if (samples.empty()) {
    record();
    while (integ.time() != t1) {
      integ.step(t1);
      record();
    }
    return tr;
  }
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double prev = t0;
  for (double ts : samples) {
    if (dir * (ts - prev) < 0.0 || dir * (ts - t1) > 0.0 || dir * (ts - t0) < 0.0)
      throw PreconditionError("sample times must be monotone and inside the time span");
    integ.advance_to(ts);
    record();
    prev = ts;
  }
  return tr;
}

}  // namespace

Trajectory flow(const PotentialModel& model, const PhasePoint& start, double t0, double t1, const Tolerances& tol,
                const std::vector<double>& sample_times) {
  return run_flow(model, start, t0, t1, tol, sample_times, false);
}

Trajectory variational_flow(const PotentialModel& model, const PhasePoint& start, double t0, double t1,
                            const Tolerances& tol, const std::vector<double>& sample_times) {
  return run_flow(model, start, t0, t1, tol, sample_times, true);
}

void write_trajectory_csv(std::ostream& os, const PotentialModel& model, const Trajectory& traj) {
  const int n = model.dim();
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",xi" << i;
  os << ",energy\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& p = traj.states[k];
    os << format_double(traj.times[k]);
    for (int i = 0; i < n; ++i) os << ',' << format_double(p.x[i]);
    for (int i = 0; i < n; ++i) os << ',' << format_double(p.xi[i]);
    os << ',' << format_double(hamiltonian(model, p)) << '\n';
  }
}

}  // namespace barrier
