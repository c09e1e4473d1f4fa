#include "barrier/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "barrier/error.hpp"
#include "barrier/parallel.hpp"
#include "barrier/transport.hpp"

namespace barrier {

namespace {

struct ProbeResult {
  double excess = 0.0;  // escape time beyond free transit, infinite when trapped
  bool converged = false;
  Eigen::VectorXd eta;  // unstable coordinates at closest approach, diagonal frame
};

ProbeResult probe(const PotentialModel& model, const DiagonalFrame& frame, const Eigen::VectorXd& omega,
                  const Eigen::VectorXd& z, const ScatterOptions& opts) {
  const double E0 = model.E0();
  const ScatterRun run = scatter(model, omega, z, E0, opts);
  ProbeResult p;
  p.converged = run.converged;
  const double v = std::sqrt(2.0 * E0);
  const double free_time = 2.0 * std::sqrt(std::max(0.0, opts.launch_radius * opts.launch_radius - z.squaredNorm())) / v;
  p.excess = run.outcome == Outcome::Escaped ? run.t_end - run.t0 - free_time : std::numeric_limits<double>::infinity();
  const Eigen::VectorXd y = frame.to_diagonal(run.closest.x);
  const Eigen::VectorXd eta_xi = frame.to_diagonal(run.closest.xi);
  p.eta.resize(y.size());
  for (int j = 0; j < y.size(); ++j) p.eta[j] = 0.5 * (y[j] + eta_xi[j] / frame.spec.lambdas[j]);
  return p;
}

bool decaying_with_top(const PotentialModel& model) {
  if (model.kind() == PotentialKind::Free) return false;
  if (!model.decaying()) throw PreconditionError("trapped curves need a decaying potential (no escape end otherwise)");
  if (!(model.E0() > 0.0)) throw PreconditionError("trapped curves need a positive barrier energy E0");
  return true;
}

// Bisection on the exit-side indicator between s_lo and s_hi along the line z = s·b.
std::optional<double> bisect_line(const PotentialModel& model, const DiagonalFrame& frame, const Eigen::VectorXd& omega,
                                  const Eigen::VectorXd& b, double lo, double hi, const ProbeResult& plo,
                                  const ScatterOptions& opts) {
  const Eigen::VectorXd ref = plo.eta;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) return mid;
    const ProbeResult pm = probe(model, frame, omega, mid * b, opts);
    if (pm.converged) return mid;
    if (pm.eta.dot(ref) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Eigen::VectorXd> find_trapped_impact(const PotentialModel& model, const Eigen::VectorXd& direction,
                                                 Side side, const TrappedOptions& opts) {
  const int n = model.dim();
  if (direction.size() != n || std::abs(direction.norm() - 1.0) > 1e-12)
    throw PreconditionError("trapped search direction must be a unit vector of the model dimension");
  if (!decaying_with_top(model)) return {};
  const DiagonalFrame frame = diagonal_frame(model, 2);
  const Eigen::VectorXd omega = side == Side::Incoming ? Eigen::VectorXd(direction) : Eigen::VectorXd(-direction);
  const ScatterOptions& so = opts.scatter;

  std::vector<Eigen::VectorXd> found;
  auto accept = [&](const Eigen::VectorXd& z) {
    const ProbeResult p = probe(model, frame, omega, z, so);
    if (!(p.converged || p.excess > opts.t_trap)) return;
    for (const auto& f : found)
      if ((f - z).norm() <= 1e-6) return;
    found.push_back(z);
  };

  if (n == 1) {
    accept(Eigen::VectorXd::Zero(1));
    return found;
  }
  const Eigen::MatrixXd B = perp_basis(omega);
  const int G = std::max(3, opts.box.points | 1);
  const double L = opts.box.half_width;
  auto coord = [&](int i) { return -L + 2.0 * L * i / (G - 1); };

  double best_excess = -1.0;
  Eigen::VectorXd best_z;
  for (int k = 0; k < n - 1; ++k) {
    const Eigen::VectorXd b = B.col(k);
    std::vector<ProbeResult> line(G);
    parallel_for(G, so.threads, [&](std::size_t i) { line[i] = probe(model, frame, omega, coord(i) * b, so); });
    std::vector<double> ex(G);
    for (int i = 0; i < G; ++i) ex[i] = line[i].excess;
    std::vector<double> sorted = ex;
    std::nth_element(sorted.begin(), sorted.begin() + G / 2, sorted.end());
    const double median = sorted[G / 2];
    for (int i = 1; i + 1 < G; ++i) {
      if (!(ex[i] >= ex[i - 1] && ex[i] >= ex[i + 1] && ex[i] > median + 1.0)) continue;
      if (ex[i] > best_excess) {
        best_excess = ex[i];
        best_z = coord(i) * b;
      }
      if (line[i].converged) {
        accept(coord(i) * b);
        continue;
      }
      std::optional<double> s;
      const std::pair<int, int> brackets[] = {{i - 1, i + 1}, {i - 1, i}, {i, i + 1}};
      for (auto [a, c] : brackets)
        if (line[a].eta.dot(line[c].eta) < 0.0) {
          s = bisect_line(model, frame, omega, b, coord(a), coord(c), line[a], so);
          break;
        }
      if (s) accept(*s * b);
    }
  }
  if (found.empty() && n >= 3) {
    const int Gc = 21;
    std::size_t total = 1;
    for (int k = 0; k < n - 1; ++k) total *= Gc;
    std::vector<ProbeResult> grid(total);
    auto zc = [&](std::size_t idx) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < n - 1; ++k) {
        z += (-L + 2.0 * L * static_cast<double>(idx % Gc) / (Gc - 1)) * B.col(k);
        idx /= Gc;
      }
      return z;
    };
    parallel_for(total, so.threads, [&](std::size_t i) { grid[i] = probe(model, frame, omega, zc(i), so); });
    for (std::size_t i = 0; i < total; ++i)
      if (grid[i].excess > best_excess) {
        best_excess = grid[i].excess;
        best_z = zc(i);
      }
    if (best_excess > opts.t_trap) found.push_back(best_z);
  }
  return found;
}

TrappedPath trace_trapped(const PotentialModel& model, const DiagonalFrame& frame, const Eigen::VectorXd& omega,
                          const Eigen::VectorXd& z, const TrappedOptions& opts) {
  if (!decaying_with_top(model)) throw PreconditionError("the free model has no trapped curves");
  const int n = model.dim();
  const double E0 = model.E0();
  const ScatterOptions& so = opts.scatter;
  const TruncatedSeries phi = eikonal_taylor(frame, opts.series_degree);
  const Eigen::MatrixXd& R = frame.R;
  std::vector<TruncatedSeries> dphi;
  for (int j = 0; j < n; ++j) dphi.push_back(phi.partial(j));

  // ∇φ₊ and ∇²φ₊ in the model's coordinates.
  auto grad_phi = [&](const Eigen::VectorXd& x, Eigen::MatrixXd* hess) {
    const Eigen::VectorXd y = R.transpose() * x;
    const std::vector<double> yv(y.data(), y.data() + n);
    Eigen::VectorXd gy(n);
    Eigen::MatrixXd Hy(n, n);
    for (int j = 0; j < n; ++j) {
      gy[j] = dphi[j].eval(yv).real();
      if (hess) {
        const auto row = dphi[j].gradient(yv);
        for (int k = 0; k < n; ++k) Hy(j, k) = row[k].real();
      }
    }
    if (hess) *hess = R * Hy * R.transpose();
    return Eigen::VectorXd(R * gy);
  };

  const Eigen::MatrixXd B = n > 1 ? perp_basis(omega) : Eigen::MatrixXd(n, 0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * n, n);
  if (n > 1) P.topLeftCorner(n, n - 1) = B;
  P.bottomRightCorner(n, 1) = omega;

  auto launch = [&](const Eigen::VectorXd& u, double delta) {
    Launch L = incoming_initialize(model, omega, z + B * u, E0, so.launch_radius, so.eps_v);
    L.point.xi += delta * omega;
    return L;
  };

  // Newton on (u, δ) for ξ + ∇φ₊(x) = 0 where the curve first reaches the reference radius.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n - 1);
  double delta = 0.0;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_u = u;
  double best_delta = 0.0;
  for (int it = 0; it < 12; ++it) {
    const Launch L = launch(u, delta);
    FlowIntegrator integ(model, true, so.tol);
    integ.reset(L.t0, L.point);
    const double t_stop = L.t0 + so.t_max;
    PhasePoint at = L.point;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    double closest = std::numeric_limits<double>::infinity();
    while (integ.time() < t_stop) {
      integ.step(t_stop);
      const PhasePoint p = integ.state();
      const double r = p.x.norm();
      if (r < closest) {
        closest = r;
        at = p;
        M = integ.jacobian();
      } else if (r > 2.0 * closest && closest < 0.5) {
        break;
      }
      if (r <= opts.reference_radius) break;
    }
    Eigen::MatrixXd H;
    const Eigen::VectorXd d = at.xi + grad_phi(at.x, &H);
    const double dn = d.norm();
    if (dn < best) {
      best = dn;
      best_u = u;
      best_delta = delta;
    } else if (it > 0 && dn > 0.5 * best) {
      break;
    }
    Eigen::MatrixXd Dd(n, 2 * n);
    Dd << H, Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd Jd = Dd * M * P;
    const Eigen::VectorXd step = Jd.colPivHouseholderQr().solve(-d);
    if (n > 1) u += step.head(n - 1);
    delta += step[n - 1];
  }

  TrappedPath path;
  path.omega = omega;
  path.z = z + B * best_u;
  path.momentum_nudge = best_delta;
  path.stable_defect = best;

  const Launch L = launch(best_u, best_delta);
  path.t0 = L.t0;
  FlowIntegrator integ(model, true, so.tol);
  integ.reset(L.t0, L.point);
  integ.set_action_offset(2.0 * E0);
  {
    const double v = std::sqrt(2.0 * E0);
    const double inf = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd zz = path.z;
    double tail = 0.0;
    if (auto c = line_integral_closed_form(model, zz, v * omega, -inf, L.t0))
      tail = *c;
    else
      tail = line_integral_numeric(model, zz, v * omega, -inf, L.t0);
    integ.add_to_action(-2.0 * tail);
  }
  path.samples.energy = hamiltonian(model, L.point);
  auto record = [&] {
    path.samples.times.push_back(integ.time());
    path.samples.states.push_back(integ.state());
    path.samples.jacobians.push_back(integ.jacobian());
    path.action.push_back(integ.action());
  };
  record();
  double least = std::numeric_limits<double>::infinity();
  const double t_stop = L.t0 + so.t_max;
  auto note = [&] {
    const double r = path.samples.states.back().x.norm();
    if (r < least) {
      least = r;
      path.departure = path.samples.size() - 1;
    }
    return r;
  };
  long k = 1;
  bool on_manifold = false;
  for (;; ++k) {
    const double t_next = L.t0 + k * opts.sample_dt;
    if (integ.time() < 0.0 && t_next >= 0.0) {
      integ.advance_to(0.0);
      integ.set_action_offset(0.0);
    }
    if (t_next > t_stop) break;
    integ.advance_to(t_next);
    record();
    const double r = note();
    if (r <= opts.reference_radius) {
      on_manifold = true;
      ++k;
      break;
    }
  }

  if (on_manifold) {
    // Inside the reference radius the curve is followed on Λ₋ itself, ξ = −∇φ₊(x). Off-manifold
    // errors grow like |x|^{−λₙ/λ₁} under the full flow, while the reduced flow contracts them.
    const int m = 2 * n;
    using State = std::vector<double>;
    namespace odeint = boost::numeric::odeint;
    using Checker = odeint::default_error_checker<double, odeint::range_algebra, odeint::default_operations>;
    odeint::controlled_runge_kutta<odeint::runge_kutta_fehlberg78<State>, Checker> ctrl(
        Checker(so.tol.abs, so.tol.rel, 1.0, 0.0));
    double offset = integ.time() < 0.0 ? 2.0 * E0 : 0.0;
    auto rhs = [&](const State& s, State& ds, double) {
      Eigen::Map<const Eigen::VectorXd> x(s.data(), n);
      const Eigen::VectorXd xi = -grad_phi(x, nullptr);
      for (int i = 0; i < n; ++i) ds[i] = xi[i];
      ds[n] = xi.squaredNorm() - offset;
      const Eigen::MatrixXd H = model.hessian(x);
      Eigen::Map<const Eigen::MatrixXd> M(s.data() + n + 1, m, m);
      Eigen::Map<Eigen::MatrixXd> dM(ds.data() + n + 1, m, m);
      dM.topRows(n) = M.bottomRows(n);
      dM.bottomRows(n).noalias() = -H * M.topRows(n);
    };
    State s(n + 1 + m * m);
    const PhasePoint p0 = integ.state();
    for (int i = 0; i < n; ++i) s[i] = p0.x[i];
    s[n] = integ.action();
    Eigen::Map<Eigen::MatrixXd>(s.data() + n + 1, m, m) = integ.jacobian();
    double t = integ.time();
    // Slowest contraction is λ₁; run until |x| is a decade below the fit window.
    const double t_end = std::min(t_stop, t + std::log(opts.reference_radius / (0.1 * opts.fit_lo)) /
                                                  frame.spec.lambda1() + 5.0);
    double h = std::min(opts.sample_dt, 0.01);
    auto advance = [&](double to) {
      if (to > t) odeint::integrate_adaptive(ctrl, rhs, s, t, to, h);
      t = to;
    };
    for (;; ++k) {
      const double t_next = L.t0 + k * opts.sample_dt;
      if (t_next > t_end) break;
      if (t < 0.0 && t_next >= 0.0) {
        advance(0.0);
        offset = 0.0;
      }
      advance(t_next);
      const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(s.data(), n);
      path.samples.times.push_back(t);
      path.samples.states.push_back({x, -grad_phi(x, nullptr)});
      path.samples.jacobians.push_back(Eigen::Map<const Eigen::MatrixXd>(s.data() + n + 1, m, m));
      path.action.push_back(s[n]);
      note();
      if (x.norm() < 0.1 * opts.fit_lo) break;
    }
  }
  if (!(least < opts.fit_hi))
    throw NumericalError("trapped curve never entered the fit window; |x| stayed above " + std::to_string(least));
  return path;
}

std::vector<int> fit_powers(const BarrierSpectrum& spec, int J) {
  // A resonant rate r = λ_k = λ_i + μ (μ a combination) feeds t-terms into every rate ≥ r. Higher
  // powers of t are products of these small terms and stay below the fit noise.
  std::vector<double> resonant;
  for (double lk : spec.lambdas)
    for (double li : spec.lambdas)
      if (lk > li && spec.mu_position(lk - li) > 0) {
        resonant.push_back(lk);
        break;
      }
  std::vector<int> powers(J, 0);
  for (int j = 0; j < J; ++j) {
    const double mu = spec.mu_seq[j];
    for (double r : resonant)
      if (mu >= r * (1.0 - kRateTolerance) && mu <= (r + spec.lambda1()) * (1.0 + kRateTolerance))
        powers[j] = 1;
  }
  if (spec.jhat >= 1 && spec.jhat <= J) powers[spec.jhat - 1] = std::max(powers[spec.jhat - 1], 1);
  return powers;
}

int default_fit_rates(const BarrierSpectrum& spec) {
  const double cap = std::max(4.0 * spec.lambda1(), 3.0 * spec.lambdas.back()) * (1.0 + kRateTolerance);
  int J = 0;
  for (double mu : spec.mu_seq)
    if (mu <= cap) ++J;
  return J;
}

ExpandibleFit extract_expandible_coeffs(const std::vector<double>& t, const std::vector<Eigen::VectorXd>& y,
                                        const BarrierSpectrum& spec, int J, double lo, double hi) {
  if (t.size() != y.size() || t.empty()) throw PreconditionError("fit needs matching, non-empty samples");
  if (J < 1) throw PreconditionError("fit needs at least one rate");
  if (static_cast<int>(spec.mu_seq.size()) < J) throw PreconditionError("fit asks for more rates than the spectrum holds");
  const int n = spec.dim();
  const std::vector<int> powers = fit_powers(spec, J);
  int max_cols = 1;
  for (int p : powers) max_cols += 1 + p;

  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double r = y[k].norm();
    if (r >= lo && r <= hi) rows.push_back(k);
  }
  ExpandibleFit fit;
  fit.samples = rows.size();
  if (static_cast<int>(rows.size()) < max_cols + 5) throw NumericalError("too few samples in the fit window");
  fit.window_lo = std::numeric_limits<double>::infinity();
  for (std::size_t k : rows) {
    fit.window_lo = std::min(fit.window_lo, y[k].norm());
    fit.window_hi = std::max(fit.window_hi, y[k].norm());
  }
  const double t_ref = t[rows.back()];

  // Solves one component with the first `rates` rates and their t-powers; the coefficients
  // come back in column order (rate by rate, powers ascending), the contamination column last.
  auto solve = [&](int comp, int rates, double* cond, double* sq_res) {
    std::vector<std::function<double(double)>> cols;
    for (int j = 0; j < rates; ++j) {
      const double mu = spec.mu_seq[j];
      for (int p = 0; p <= powers[j]; ++p)
        cols.push_back([mu, p](double s) { return std::pow(s, p) * std::exp(-mu * s); });
    }
    const double lg = spec.lambdas[comp];
    cols.push_back([lg, t_ref](double s) { return std::exp(lg * (s - t_ref)); });
    const int m = static_cast<int>(cols.size());
    Eigen::MatrixXd A(rows.size(), m);
    Eigen::VectorXd b(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (int c = 0; c < m; ++c) A(r, c) = cols[c](t[rows[r]]);
      b[r] = y[rows[r]][comp];
    }
    Eigen::VectorXd scale(m);
    for (int c = 0; c < m; ++c) {
      scale[c] = A.col(c).cwiseAbs().maxCoeff();
      if (scale[c] > 0.0) A.col(c) /= scale[c];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (cond) *cond = sv[0] / sv[m - 1];
    Eigen::VectorXd x = svd.solve(b);
    if (sq_res) *sq_res = (A * x - b).squaredNorm();
    for (int c = 0; c < m; ++c) x[c] = scale[c] > 0.0 ? x[c] / scale[c] : 0.0;
    return x;
  };

  double norm_sq = 0.0;
  for (std::size_t k : rows) norm_sq += y[k].squaredNorm();
  for (int rates = 1; rates <= J; ++rates) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = 0.0;
      solve(i, rates, nullptr, &r);
      total += r;
    }
    fit.stage_residuals.push_back(std::sqrt(total / norm_sq));
  }
  for (int j = 1; j <= J; ++j)
    for (int p = 0; p <= powers[j - 1]; ++p) fit.g[{j, p}] = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double cond = 0.0;
    const Eigen::VectorXd x = solve(i, J, &cond, nullptr);
    fit.condition = std::max(fit.condition, cond);
    int c = 0;
    for (int j = 1; j <= J; ++j)
      for (int p = 0; p <= powers[j - 1]; ++p) fit.g[{j, p}][i] = x[c++];
  }
  if (fit.condition > 1e8) throw NumericalError("rates unresolvable at this precision");
  return fit;
}

int ll_index(const GCoeffs& g, const BarrierSpectrum& spec) {
  double top = 0.0;
  for (const auto& [key, v] : g) top = std::max(top, v.norm());
  if (!(top > 0.0)) throw NumericalError("all fitted coefficients vanish");
  int ll = 0;
  for (const auto& [key, v] : g)
    if (key.second == 0 && v.norm() > 1e-6 * top) {
      ll = key.first;
      break;
    }
  if (ll == 0) throw NumericalError("all fitted coefficients vanish");
  const double mu = spec.mu_seq[ll - 1];
  bool is_rate = false;
  for (double l : spec.lambdas) is_rate = is_rate || spec.equal(l, mu);
  if (!is_rate) throw NumericalError("leading rate is not one of the eigen-rates");
  if (auto it = g.find({ll, 1}); it != g.end() && it->second.norm() > 1e-3 * g.at({ll, 0}).norm())
    throw NumericalError("leading rate carries a t-term of relative size " +
                         std::to_string(it->second.norm() / g.at({ll, 0}).norm()));
  return ll;
}

double maslov_determinant(const TrappedPath& path, const BarrierSpectrum& spec, double mu_r, double lo, double hi,
                          double* spread) {
  const auto& S = path.samples;
  if (!S.has_jacobians()) throw PreconditionError("Maslov determinant needs variational data");
  const int n = spec.dim();
  const Eigen::MatrixXd B = n > 1 ? perp_basis(path.omega) : Eigen::MatrixXd(n, 0);
  const double w = spec.sum() - 2.0 * mu_r;
  std::vector<double> vals, radii;
  for (std::size_t k = 0; k <= path.departure && k < S.size(); ++k) {
    const double r = S.states[k].x.norm();
    if (r < lo || r > hi) continue;
    Eigen::MatrixXd D(n, n);
    D.col(0) = S.states[k].xi;
    if (n > 1) D.rightCols(n - 1) = S.jacobians[k].topLeftCorner(n, n) * B;
    vals.push_back(std::abs(D.determinant()) * std::exp(-w * S.times[k]));
    radii.push_back(r);
  }
  if (vals.size() < 3) throw NumericalError("too few samples for the Maslov determinant");
  // The limit is read on the decade of |x| where the sequence is most settled; departure
  // from the stable manifold spoils the innermost samples.
  double best = std::numeric_limits<double>::infinity(), value = vals.back();
  for (double top = hi; top / 10.0 >= lo * (1.0 - 1e-12); top /= std::sqrt(10.0)) {
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < vals.size(); ++k)
      if (radii[k] <= top && radii[k] >= top / 10.0) {
        vmin = std::min(vmin, vals[k]);
        vmax = std::max(vmax, vals[k]);
        ++count;
      }
    if (count < 3) continue;
    const double rel = (vmax - vmin) / vmax;
    if (rel < best) {
      best = rel;
      value = 0.5 * (vmin + vmax);
    }
  }
  if (spread) *spread = best;
  if (!(best <= 0.01)) throw NumericalError("Maslov determinant did not settle over any decade of |x|");
  return value;
}

Eigen::MatrixXd tangent_hessian(const PotentialModel& model, const TrappedPath& path, const DiagonalFrame& frame,
                                double radius) {
  const auto& S = path.samples;
  const int n = model.dim();
  std::size_t best = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= path.departure && k < S.size(); ++k) {
    const double g = std::abs(std::log(S.states[k].x.norm() / radius));
    if (g < gap) {
      gap = g;
      best = k;
    }
  }
  const Eigen::MatrixXd B = n > 1 ? perp_basis(path.omega) : Eigen::MatrixXd(n, 0);
  Eigen::MatrixXd X(n, n), Xi(n, n);
  X.col(0) = S.states[best].xi;
  Xi.col(0) = -model.gradient(S.states[best].x);
  if (n > 1) {
    X.rightCols(n - 1) = S.jacobians[best].topLeftCorner(n, n) * B;
    Xi.rightCols(n - 1) = S.jacobians[best].bottomLeftCorner(n, n) * B;
  }
  const Eigen::MatrixXd H = Xi * X.inverse();
  return frame.R.transpose() * H * frame.R;
}

double trapped_action(const TrappedPath& path, const ExpandibleFit& fit, const BarrierSpectrum& spec) {
  if (path.action.empty()) throw PreconditionError("trapped action needs a traced path");
  const std::size_t k = path.departure;
  double mu = 0.0;
  Eigen::VectorXd g;
  for (const auto& [key, v] : fit.g)
    if (key.second == 0 && v.norm() > 0.0) {
      mu = spec.mu_seq[key.first - 1];
      g = v;
      break;
    }
  if (g.size() == 0) throw NumericalError("tail fit unavailable for the trapped action");
  const double t = path.samples.times[k];
  return path.action[k] + 0.5 * mu * g.squaredNorm() * std::exp(-2.0 * mu * t);
}

TrappedTrajectory analyze_trapped(const PotentialModel& model, const DiagonalFrame& frame,
                                  const Eigen::VectorXd& direction, Side side, const Eigen::VectorXd& z_star,
                                  const TrappedOptions& opts) {
  const auto& spec = frame.spec;
  const Eigen::VectorXd omega = side == Side::Incoming ? Eigen::VectorXd(direction) : Eigen::VectorXd(-direction);
  const TrappedPath path = trace_trapped(model, frame, omega, z_star, opts);

  std::vector<double> t;
  std::vector<Eigen::VectorXd> y;
  for (std::size_t k = 0; k <= path.departure; ++k) {
    t.push_back(path.samples.times[k]);
    y.push_back(frame.to_diagonal(path.samples.states[k].x));
  }
  const int J = opts.J > 0 ? opts.J : default_fit_rates(spec);
  const ExpandibleFit fit = extract_expandible_coeffs(t, y, spec, J, opts.fit_lo, opts.fit_hi);

  TrappedTrajectory out;
  out.side = side;
  out.direction = direction;
  out.z_star = path.z;
  out.momentum_nudge = path.momentum_nudge;
  out.stable_defect = path.stable_defect;
  out.g_coeffs = fit.g;
  if (side == Side::Outgoing)
    for (auto& [key, v] : out.g_coeffs)
      if (key.second == 1) v = -v;
  out.stage_residuals = fit.stage_residuals;
  out.fit_condition = fit.condition;
  out.action = trapped_action(path, fit, spec);

  double top = 0.0;
  for (const auto& [key, v] : out.g_coeffs) top = std::max(top, v.norm());
  out.g1_nonzero = out.g_coeffs.at({1, 0}).norm() > 1e-6 * top;
  out.ll = ll_index(out.g_coeffs, spec);
  const double mu_r = side == Side::Incoming ? spec.lambda1() : spec.mu_seq[out.ll - 1];
  out.D = maslov_determinant(path, spec, mu_r, opts.fit_lo, opts.fit_hi, &out.D_spread);

  Trajectory upto;
  for (std::size_t k = 0; k <= path.departure; ++k) {
    upto.times.push_back(path.samples.times[k]);
    upto.states.push_back(path.samples.states[k]);
    upto.jacobians.push_back(path.samples.jacobians[k]);
  }
  const int n = model.dim();
  out.nu = maslov_index(upto, n > 1 ? perp_basis(omega) : Eigen::MatrixXd(n, 0));

  if (side == Side::Incoming) {
    out.hessian = tangent_hessian(model, path, frame, opts.hessian_radius);
    const Eigen::VectorXd g = out.g_coeffs.at({out.ll, 0}).normalized();
    const double lnu = spec.mu_seq[out.ll - 1];
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) expect(j, j) = spec.lambdas[j];
    expect -= 2.0 * lnu * g * g.transpose();
    out.hessian_expected = expect;
  }
  return out;
}

}  // namespace barrier
