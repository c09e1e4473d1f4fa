#include "barrier/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "barrier/error.hpp"
#include "barrier/io.hpp"
#include "barrier/parallel.hpp"

namespace barrier {

namespace {

void check_direction(const Eigen::VectorXd& w, int n, const char* name) {
  if (w.size() != n) throw PreconditionError(std::string(name) + " has the wrong dimension");
  if (std::abs(w.norm() - 1.0) > 1e-12) throw PreconditionError(std::string(name) + " must be a unit vector");
}

double line_integral(const PotentialModel& model, const Eigen::VectorXd& p, const Eigen::VectorXd& d, double a,
                     double b) {
  if (auto v = line_integral_closed_form(model, p, d, a, b)) return *v;
  return line_integral_numeric(model, p, d, a, b);
}

// ∫_a^b w(s)∇V(p + s d) ds, one component at a time; a or b infinite.
Eigen::VectorXd gradient_tail(const PotentialModel& model, const Eigen::VectorXd& p, const Eigen::VectorXd& d,
                              double a, double b, double weight_anchor, bool weighted) {
  const int n = model.dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (model.kind() == PotentialKind::Free) return out;
  boost::math::quadrature::exp_sinh<double> q;
  for (int i = 0; i < n; ++i) {
    auto f = [&](double s) {
      const double w = weighted ? std::abs(weight_anchor - s) : 1.0;
      return w * model.gradient(p + s * d)[i];
    };
    out[i] = q.integrate(f, a, b, 1e-12);
  }
  return out;
}

}  // namespace

Launch incoming_initialize(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z,
                           double E, double R, double eps_v) {
  const int n = model.dim();
  if (!(E > 0.0)) throw PreconditionError("scattering energy must be positive");
  if (!(R > 0.0)) throw PreconditionError("launch radius must be positive");
  check_direction(omega, n, "direction omega");
  if (z.size() != n) throw PreconditionError("impact parameter has the wrong dimension");
  if (std::abs(z.dot(omega)) > 1e-12 * std::max(1.0, z.norm()))
    throw PreconditionError("impact parameter must be orthogonal to the incoming direction");
  const double v = std::sqrt(2.0 * E);
  const double t0 = -R / v;
  const Eigen::VectorXd d = v * omega;
  const Eigen::VectorXd x_free = z + t0 * d;
  const double v_launch = std::abs(model.eval(x_free));
  if (v_launch > eps_v)
    throw PreconditionError("launch radius too small: |V| = " + format_double(v_launch) + " at R = " +
                            format_double(R) + "; use a larger launch radius");
  Launch L;
  L.t0 = t0;
  const double inf = std::numeric_limits<double>::infinity();
  L.point.xi = d - gradient_tail(model, z, d, -inf, t0, t0, false);
  L.point.x = x_free - gradient_tail(model, z, d, -inf, t0, t0, true);
  return L;
}

ScatterRun scatter(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z, double E,
                   const ScatterOptions& opts, bool variational, bool record) {
  const Launch L = incoming_initialize(model, omega, z, E, opts.launch_radius, opts.eps_v);
  const double r_esc = opts.escape_radius > 0.0 ? opts.escape_radius : opts.launch_radius;
  const double v = std::sqrt(2.0 * E);
  const double inf = std::numeric_limits<double>::infinity();

  FlowIntegrator integ(model, variational, opts.tol);
  integ.reset(L.t0, L.point);
  integ.set_action_offset(2.0 * E);
  if (model.kind() != PotentialKind::Free)
    integ.add_to_action(-2.0 * line_integral(model, z, v * omega, -inf, L.t0));

  ScatterRun run;
  run.t0 = L.t0;
  run.path.energy = hamiltonian(model, L.point);
  auto push = [&] {
    run.path.times.push_back(integ.time());
    run.path.states.push_back(integ.state());
    if (variational) run.path.jacobians.push_back(integ.jacobian());
  };
  if (record) push();
  run.closest = L.point;
  run.closest_time = L.t0;
  double closest_r = L.point.x.norm();
  const double t_stop = L.t0 + opts.t_max;
  for (;;) {
    integ.step(t_stop);
    const PhasePoint p = integ.state();
    if (record) push();
    const double r = p.x.norm();
    if (r < closest_r) {
      closest_r = r;
      run.closest = p;
      run.closest_time = integ.time();
    }
    if (r + p.xi.norm() < opts.converge_radius) {
      run.converged = true;
      break;
    }
    if (r >= r_esc && p.x.dot(p.xi) > 0.0) {
      run.outcome = Outcome::Escaped;
      break;
    }
    if (integ.time() == t_stop) break;
  }
  run.t_end = integ.time();
  run.end = integ.state();
  if (run.outcome == Outcome::Escaped) {
    const PhasePoint& e = run.end;
    run.xi_inf = e.xi - gradient_tail(model, e.x, e.xi, 0.0, inf, 0.0, false);
    run.action = integ.action();
    if (model.kind() != PotentialKind::Free) run.action -= 2.0 * line_integral(model, e.x, e.xi, 0.0, inf);
  }
  return run;
}

std::optional<Eigen::VectorXd> asymptotic_momentum(const PotentialModel& model, const Eigen::VectorXd& omega,
                                                   const Eigen::VectorXd& z, double E, const ScatterOptions& opts) {
  ScatterRun run = scatter(model, omega, z, E, opts);
  if (run.outcome != Outcome::Escaped) return std::nullopt;
  return run.xi_inf;
}

Eigen::MatrixXd perp_basis(const Eigen::VectorXd& omega) {
  const int n = static_cast<int>(omega.size());
  if (n == 2) {
    Eigen::MatrixXd B(2, 1);
    B << -omega[1], omega[0];
    return B;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(omega);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return Q.rightCols(n - 1);
}

double angular_density(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z, double E,
                       double step, const ScatterOptions& opts) {
  const int n = model.dim();
  if (!(step > 0.0)) throw PreconditionError("angular density step must be positive");
  const Eigen::MatrixXd B = perp_basis(omega);
  std::vector<Eigen::VectorXd> zs{z};
  for (int k = 0; k < n - 1; ++k) {
    zs.push_back(z + step * B.col(k));
    zs.push_back(z - step * B.col(k));
  }
  std::vector<std::optional<Eigen::VectorXd>> xs(zs.size());
  parallel_for(zs.size(), opts.threads, [&](std::size_t i) { xs[i] = asymptotic_momentum(model, omega, zs[i], E, opts); });
  for (const auto& x : xs)
    if (!x) throw NumericalError("angular density: a neighbouring trajectory is trapped");
  Eigen::MatrixXd D(n, n);
  D.col(0) = *xs[0];
  for (int k = 0; k < n - 1; ++k) D.col(k + 1) = (*xs[1 + 2 * k] - *xs[2 + 2 * k]) / (2.0 * step);
  return std::abs(D.determinant());
}

namespace {

struct Probe {
  bool escaped = false;
  Eigen::VectorXd F;  // components of ξ_∞/|ξ_∞| along θ^⊥
  double cosine = -1.0;
  Eigen::VectorXd xi;
};

struct RegularProblem {
  const PotentialModel& model;
  Eigen::VectorXd omega, theta;
  double E;
  ScatterOptions opts;
  Eigen::MatrixXd B, T;

  Probe probe(const Eigen::VectorXd& u) const {
    Probe p;
    auto xi = asymptotic_momentum(model, omega, B * u, E, opts);
    if (!xi) return p;
    p.escaped = true;
    p.xi = *xi;
    const Eigen::VectorXd unit = xi->normalized();
    p.F = T.transpose() * unit;
    p.cosine = unit.dot(theta);
    return p;
  }

  double residual(const Probe& p) const { return (p.xi.normalized() - theta).norm(); }

  // One Newton step with a central-difference Jacobian; returns false on a trapped probe.
  bool newton(Eigen::VectorXd& u, Probe& at) const {
    const int m = static_cast<int>(u.size());
    const double h = 1e-6 * std::max(1.0, u.norm());
    Eigen::MatrixXd J(m, m);
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(m, k) * h;
      const Probe a = probe(u + e), b = probe(u - e);
      if (!a.escaped || !b.escaped) return false;
      J.col(k) = (a.F - b.F) / (2.0 * h);
    }
    u -= J.fullPivLu().solve(at.F);
    at = probe(u);
    return at.escaped;
  }
};

}  // namespace

std::vector<double> regular_newton_history(const PotentialModel& model, const Eigen::VectorXd& omega,
                                           const Eigen::VectorXd& theta, double E, const Eigen::VectorXd& z0,
                                           int steps, const ScatterOptions& opts) {
  const int n = model.dim();
  check_direction(omega, n, "direction omega");
  check_direction(theta, n, "direction theta");
  RegularProblem P{model, omega, theta, E, opts, perp_basis(omega), perp_basis(theta)};
  Eigen::VectorXd u = P.B.transpose() * z0;
  Probe at = P.probe(u);
  if (!at.escaped) throw NumericalError("Newton start point is trapped");
  std::vector<double> hist{P.residual(at)};
  for (int s = 0; s < steps; ++s) {
    if (!P.newton(u, at)) throw NumericalError("Newton iterate reached a trapped trajectory");
    hist.push_back(P.residual(at));
  }
  return hist;
}

std::vector<ScatteringData> find_regular_trajectories(const PotentialModel& model, const Eigen::VectorXd& omega,
                                                      const Eigen::VectorXd& theta, double E, const SearchBox& box,
                                                      const ScatterOptions& opts) {
  const int n = model.dim();
  if (n < 2) throw PreconditionError("regular trajectory search needs n >= 2");
  check_direction(omega, n, "direction omega");
  check_direction(theta, n, "direction theta");
  if ((theta - omega).norm() <= 1e-12) throw PreconditionError("outgoing direction theta must differ from omega");
  if (box.points < 3 || !(box.half_width > 0.0)) throw PreconditionError("search box needs >= 3 points and a positive width");

  RegularProblem P{model, omega, theta, E, opts, perp_basis(omega), perp_basis(theta)};
  const int m = n - 1;
  const int G = m == 1 ? box.points : std::min(box.points, 41);
  std::size_t total = 1;
  for (int k = 0; k < m; ++k) total *= static_cast<std::size_t>(G);
  auto coord = [&](std::size_t idx) {
    Eigen::VectorXd u(m);
    for (int k = 0; k < m; ++k) {
      const int i = static_cast<int>(idx % G);
      idx /= G;
      u[k] = -box.half_width + 2.0 * box.half_width * i / (G - 1);
    }
    return u;
  };
  std::vector<Probe> grid(total);
  parallel_for(total, opts.threads, [&](std::size_t i) { grid[i] = P.probe(coord(i)); });

  std::vector<Eigen::VectorXd> roots;
  auto accept = [&](const Eigen::VectorXd& u) {
    for (const auto& r : roots)
      if ((r - u).norm() <= 1e-6 * std::max(1.0, u.norm())) return;
    roots.push_back(u);
  };

  if (m == 1) {
    for (int i = 0; i + 1 < G; ++i) {
      const Probe &a = grid[i], &b = grid[i + 1];
      if (!a.escaped || !b.escaped || a.cosine <= 0.0 || b.cosine <= 0.0) continue;
      if ((a.F[0] > 0.0) == (b.F[0] > 0.0)) continue;
      auto f = [&](double s) {
        Eigen::VectorXd u(1);
        u << s;
        const Probe p = P.probe(u);
        if (!p.escaped) throw NumericalError("trapped trajectory inside a regular bracket");
        return p.F[0];
      };
      std::uintmax_t iters = 200;
      const auto br = boost::math::tools::toms748_solve(f, coord(i)[0], coord(i + 1)[0], a.F[0], b.F[0],
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
      Eigen::VectorXd u(1);
      u << 0.5 * (br.first + br.second);
      Probe at = P.probe(u);
      if (at.escaped && P.newton(u, at) && at.escaped && at.cosine > 0.0 && at.F.norm() <= 1e-10) accept(u);
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) {
      const Probe& c = grid[i];
      if (!c.escaped || c.cosine <= 0.0 || c.F.norm() > 0.5) continue;
      bool local_min = true;
      std::size_t stride = 1;
      for (int k = 0; k < m && local_min; ++k, stride *= G) {
        const int ik = static_cast<int>((i / stride) % G);
        for (int s : {-1, 1}) {
          if (ik + s < 0 || ik + s >= G) continue;
          const Probe& nb = grid[i + s * static_cast<long>(stride)];
          if (nb.escaped && nb.F.norm() < c.F.norm()) local_min = false;
        }
      }
      if (!local_min) continue;
      Eigen::VectorXd u = coord(i);
      Probe at = c;
      for (int it = 0; it < 40 && at.escaped && at.F.norm() > 1e-12; ++it)
        if (!P.newton(u, at)) break;
      if (at.escaped && at.cosine > 0.0 && at.F.norm() <= 1e-10) accept(u);
    }
  }

  std::vector<ScatteringData> out;
  for (const auto& u : roots) {
    ScatteringData d;
    d.omega = omega;
    d.z = P.B * u;
    d.E = E;
    ScatterRun run = scatter(model, omega, d.z, E, opts, true, true);
    if (run.outcome != Outcome::Escaped) continue;
    d.xi_inf = run.xi_inf;
    d.S_inf = run.action;
    d.nu_inf = maslov_index(run.path, P.B, true);
    d.sigma_hat = angular_density(model, omega, d.z, E, 1e-4 * std::max(1.0, d.z.norm()), opts);
    if (d.sigma_hat <= 1e-8) {
      d.degenerate = true;
      d.note = "degenerate direction: angular density vanishes";
    }
    out.push_back(d);
  }
  std::sort(out.begin(), out.end(), [&](const ScatteringData& a, const ScatteringData& b) {
    return (P.B.transpose() * a.z)[0] < (P.B.transpose() * b.z)[0];
  });
  return out;
}

double action_regular(const PotentialModel& model, const Eigen::VectorXd& omega, const Eigen::VectorXd& z, double E,
                      const ScatterOptions& opts) {
  ScatterRun run = scatter(model, omega, z, E, opts);
  if (run.outcome != Outcome::Escaped) throw NumericalError("action of a trapped trajectory is not defined");
  if (!std::isfinite(run.action)) throw NumericalError("far-field tail of the action did not converge");
  return run.action;
}

int maslov_index(const Trajectory& traj, const Eigen::MatrixXd& B, bool free_tail) {
  if (!traj.has_jacobians()) throw PreconditionError("Maslov index needs variational data");
  const int n = static_cast<int>(traj.states.front().x.size());
  int count = 0, last = 0, zero_run = 0;
  auto visit = [&](const Eigen::VectorXd& xi, const Eigen::MatrixXd& Xz) {
    Eigen::MatrixXd D(n, n);
    D.col(0) = xi;
    if (n > 1) D.rightCols(n - 1) = Xz;
    double scale = 1.0;
    for (int c = 0; c < n; ++c) scale *= std::max(D.col(c).norm(), 1e-300);
    const double det = D.determinant();
    if (std::abs(det) <= 1e-12 * scale) {
      if (++zero_run >= 3) throw NumericalError("degenerate family: det dx/d(t,z) vanishes on an interval");
      return;
    }
    zero_run = 0;
    const int s = det > 0 ? 1 : -1;
    if (last != 0 && s != last) ++count;
    last = s;
  };
  for (std::size_t k = 0; k < traj.size(); ++k)
    visit(traj.states[k].xi, traj.jacobians[k].topLeftCorner(n, n) * B);
  if (free_tail && n > 1) {
    const Eigen::VectorXd& xi = traj.states.back().xi;
    const Eigen::MatrixXd X = traj.jacobians.back().topLeftCorner(n, n) * B;
    const Eigen::MatrixXd P = traj.jacobians.back().bottomLeftCorner(n, n) * B;
    for (double s = 1e-3; s < 1e12; s *= 1.02) visit(xi, X + s * P);
  }
  return count;
}

}  // namespace barrier
